#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlc/matrix.hpp"
#include "mlc/rng.hpp"

namespace mlc {

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

enum class Activation { Identity, Sigmoid };

/// Numerically stable logistic: never overflows, output in (0,1) and finite
/// for any finite z (including |z| ~ 1000).
double sigmoid(double z);
std::vector<double> sigmoid_vec(std::span<const double> z);

/// d sigma/dz expressed through the forward output o = sigma(z): o * (1 - o).
inline double sigmoid_grad_from_output(double o) { return o * (1.0 - o); }

double activate(double z, Activation a);
double activation_grad_from_output(double o, Activation a);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;  // classic L2: lambda * param added to the gradient
};

/// Per-parameter-group Adam accumulator. The update is the original
/// bias-corrected rule, theta -= lr * mhat / (sqrt(vhat) + eps). Weight decay
/// couples as lambda*theta added to the gradient before the moment updates,
/// and callers apply it to weights only, never biases.
class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    /// One update. `grad_scale` multiplies the raw gradient first (used to
    /// turn an accumulated batch sum into a batch mean).
    void step(std::span<double> param, std::span<const double> grad, double grad_scale,
              const AdamConfig& cfg, bool decay_this_group);

    long steps_taken() const { return t_; }
    std::span<const double> first_moment() const { return m_; }
    std::span<const double> second_moment() const { return v_; }

private:
    std::vector<double> m_, v_;
    long t_ = 0;
};

// ---------------------------------------------------------------------------
// Dense (fully connected) layer
// ---------------------------------------------------------------------------

/// y = W x + b, activation applied by the caller. Forward caches its input;
/// backward accumulates parameter gradients (summed until zero_grad) and
/// returns dL/dx. Single-owner while training.
class DenseLayer {
public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng);

    std::size_t in_dim() const { return in_; }
    std::size_t out_dim() const { return out_; }

    std::vector<double> forward(std::span<const double> x);
    std::vector<double> backward(std::span<const double> upstream);

    void zero_grad();
    void adam_step(const AdamConfig& cfg, double grad_scale);

    Matrix& weights() { return w_; }
    const Matrix& weights() const { return w_; }
    std::vector<double>& bias() { return b_; }
    const std::vector<double>& bias() const { return b_; }

    std::size_t param_size() const { return w_.size() + b_.size(); }
    // Flat order: weights row-major, then bias.
    void copy_params(std::span<double> out) const;
    void set_params(std::span<const double> in);
    void copy_grads(std::span<double> out) const;

private:
    std::size_t in_, out_;
    Matrix w_;                    // out x in
    std::vector<double> b_;
    Matrix gw_;
    std::vector<double> gb_;
    AdamState adam_w_, adam_b_;
    std::vector<double> x_cache_;
    bool have_input_ = false;
};

// ---------------------------------------------------------------------------
// 1-D convolution kernel
// ---------------------------------------------------------------------------

/// One feature map: the activated sliding-window outputs of a kernel, plus the
/// argmax recorded by global_maxpool for the pooling backward.
struct FeatureMap {
    std::vector<double> values;
    std::size_t argmax = 0;
};

/// Output length of an unpadded 1-D convolution: floor((m - k) / s) + 1.
/// Requires k <= m.
std::size_t conv1d_output_length(std::size_t input_len, std::size_t kernel, std::size_t stride);

/// Single 1-D kernel of size k and stride s sliding over a length-m input:
/// o_j = act(bias + sum_i w_i * x_{i + j*s}), j = 0..c-1. Forward caches what
/// backward needs; backward expects an upstream gradient per feature-map
/// element and returns dL/dx.
class Conv1DKernel {
public:
    Conv1DKernel(std::size_t size, std::size_t stride, Rng& rng);

    std::size_t size() const { return k_; }
    std::size_t stride() const { return s_; }

    FeatureMap forward(std::span<const double> x, Activation act);
    std::vector<double> backward(std::span<const double> upstream);

    void zero_grad();
    void adam_step(const AdamConfig& cfg, double grad_scale);

    std::vector<double>& kernel_weights() { return w_; }
    const std::vector<double>& kernel_weights() const { return w_; }
    double& bias() { return b_; }
    double bias() const { return b_; }

    std::size_t param_size() const { return w_.size() + 1; }
    void copy_params(std::span<double> out) const;   // weights then bias
    void set_params(std::span<const double> in);
    void copy_grads(std::span<double> out) const;

private:
    std::size_t k_, s_;
    std::vector<double> w_;
    double b_ = 0.0;
    std::vector<double> gw_;
    double gb_ = 0.0;
    AdamState adam_w_, adam_b_;
    std::vector<double> x_cache_, out_cache_;
    Activation act_cache_ = Activation::Identity;
    bool have_input_ = false;
};

// ---------------------------------------------------------------------------
// Global max pool
// ---------------------------------------------------------------------------

/// Max element of the feature map; records the argmax (lowest index on ties)
/// into the map for the backward pass. Throws on an empty map.
double global_maxpool(FeatureMap& fm);

/// Subgradient of max: the upstream scalar lands on the recorded argmax,
/// zero elsewhere.
std::vector<double> maxpool_backward(const FeatureMap& fm, double upstream);

// ---------------------------------------------------------------------------
// Binary cross-entropy
// ---------------------------------------------------------------------------

/// Probabilities are clamped to [kBceClamp, 1 - kBceClamp] before the logs.
inline constexpr double kBceClamp = 1e-12;

/// Mean over labels of -(y ln p + (1-y) ln(1-p)). Always >= 0.
double bce_loss(std::span<const double> p, std::span<const double> y);

/// dL/dp, consistent with the clamp used by bce_loss.
std::vector<double> bce_grad(std::span<const double> p, std::span<const double> y);

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

/// Inverted dropout. Training: each element is zeroed with probability `rate`
/// and survivors are scaled by 1/(1-rate); eval: identity. Requires
/// 0 <= rate < 1, and a non-null rng whenever the mask is actually drawn
/// (training with rate > 0). The mask is cached for backward.
class Dropout {
public:
    std::vector<double> forward(std::span<const double> x, double rate, Rng* rng, bool training);
    std::vector<double> backward(std::span<const double> upstream) const;

private:
    std::vector<double> scale_;  // per element: 0 or 1/(1-rate); empty in eval mode
    bool identity_ = true;
};

}  // namespace mlc

#include "mlc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlc {

double sigmoid(double z) {
    // Split on sign so exp() only ever sees non-positive arguments.
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> sigmoid_vec(std::span<const double> z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
    return out;
}

double activate(double z, Activation a) {
    return a == Activation::Sigmoid ? sigmoid(z) : z;
}

double activation_grad_from_output(double o, Activation a) {
    return a == Activation::Sigmoid ? sigmoid_grad_from_output(o) : 1.0;
}

// ---------------------------------------------------------------------------

void AdamState::step(std::span<double> param, std::span<const double> grad, double grad_scale,
                     const AdamConfig& cfg, bool decay_this_group) {
    if (param.size() != m_.size() || grad.size() != m_.size())
        throw std::invalid_argument("AdamState::step: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < param.size(); ++i) {
        double g = grad[i] * grad_scale;
        if (decay_this_group) g += cfg.weight_decay * param[i];
        m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
        v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

// ---------------------------------------------------------------------------

namespace {

// Uniform in +-sqrt(6 / (fan_in + fan_out)); keeps activation variance of
// sigmoid stacks roughly constant at init.
double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : in_(in_dim),
      out_(out_dim),
      w_(out_dim, in_dim),
      b_(out_dim, 0.0),
      gw_(out_dim, in_dim),
      gb_(out_dim, 0.0),
      adam_w_(out_dim * in_dim),
      adam_b_(out_dim) {
    if (in_dim == 0 || out_dim == 0)
        throw std::invalid_argument("DenseLayer: zero dimension");
    const double lim = glorot_limit(in_dim, out_dim);
    for (double& v : w_.data()) v = rng.uniform(-lim, lim);
}

std::vector<double> DenseLayer::forward(std::span<const double> x) {
    if (x.size() != in_)
        throw std::invalid_argument("DenseLayer::forward: input length " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(in_));
    x_cache_.assign(x.begin(), x.end());
    have_input_ = true;
    std::vector<double> y(out_);
    for (std::size_t o = 0; o < out_; ++o) {
        const auto wrow = w_.row(o);
        double acc = b_[o];
        for (std::size_t i = 0; i < in_; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
    return y;
}

std::vector<double> DenseLayer::backward(std::span<const double> upstream) {
    if (!have_input_)
        throw std::logic_error("DenseLayer::backward called before forward");
    if (upstream.size() != out_)
        throw std::invalid_argument("DenseLayer::backward: upstream length " +
                                    std::to_string(upstream.size()) + ", expected " +
                                    std::to_string(out_));
    std::vector<double> dx(in_, 0.0);
    for (std::size_t o = 0; o < out_; ++o) {
        const double g = upstream[o];
        gb_[o] += g;
        auto grow = gw_.row(o);
        const auto wrow = w_.row(o);
        for (std::size_t i = 0; i < in_; ++i) {
            grow[i] += g * x_cache_[i];
            dx[i] += g * wrow[i];
        }
    }
    return dx;
}

void DenseLayer::zero_grad() {
    std::fill(gw_.data().begin(), gw_.data().end(), 0.0);
    std::fill(gb_.begin(), gb_.end(), 0.0);
}

void DenseLayer::adam_step(const AdamConfig& cfg, double grad_scale) {
    adam_w_.step(w_.data(), gw_.data(), grad_scale, cfg, /*decay=*/true);
    adam_b_.step(b_, gb_, grad_scale, cfg, /*decay=*/false);
}

void DenseLayer::copy_params(std::span<double> out) const {
    if (out.size() != param_size()) throw std::invalid_argument("copy_params: bad span size");
    std::copy(w_.data().begin(), w_.data().end(), out.begin());
    std::copy(b_.begin(), b_.end(), out.begin() + static_cast<std::ptrdiff_t>(w_.size()));
}

void DenseLayer::set_params(std::span<const double> in) {
    if (in.size() != param_size()) throw std::invalid_argument("set_params: bad span size");
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(w_.size()), w_.data().begin());
    std::copy(in.begin() + static_cast<std::ptrdiff_t>(w_.size()), in.end(), b_.begin());
}

void DenseLayer::copy_grads(std::span<double> out) const {
    if (out.size() != param_size()) throw std::invalid_argument("copy_grads: bad span size");
    std::copy(gw_.data().begin(), gw_.data().end(), out.begin());
    std::copy(gb_.begin(), gb_.end(), out.begin() + static_cast<std::ptrdiff_t>(gw_.size()));
}

// ---------------------------------------------------------------------------

std::size_t conv1d_output_length(std::size_t input_len, std::size_t kernel, std::size_t stride) {
    if (kernel == 0 || stride == 0)
        throw std::invalid_argument("conv1d_output_length: kernel and stride must be >= 1");
    if (kernel > input_len)
        throw std::invalid_argument("conv1d_output_length: kernel " + std::to_string(kernel) +
                                    " larger than input " + std::to_string(input_len));
    return (input_len - kernel) / stride + 1;
}

Conv1DKernel::Conv1DKernel(std::size_t size, std::size_t stride, Rng& rng)
    : k_(size), s_(stride), w_(size), gw_(size, 0.0), adam_w_(size), adam_b_(1) {
    if (size == 0 || stride == 0)
        throw std::invalid_argument("Conv1DKernel: size and stride must be >= 1");
    const double lim = glorot_limit(size, 1);
    for (double& v : w_) v = rng.uniform(-lim, lim);
}

FeatureMap Conv1DKernel::forward(std::span<const double> x, Activation act) {
    const std::size_t c = conv1d_output_length(x.size(), k_, s_);
    x_cache_.assign(x.begin(), x.end());
    act_cache_ = act;
    have_input_ = true;
    FeatureMap fm;
    fm.values.resize(c);
    for (std::size_t j = 0; j < c; ++j) {
        double acc = b_;
        const std::size_t base = j * s_;
        for (std::size_t i = 0; i < k_; ++i) acc += w_[i] * x[base + i];
        fm.values[j] = activate(acc, act);
    }
    out_cache_ = fm.values;
    return fm;
}

std::vector<double> Conv1DKernel::backward(std::span<const double> upstream) {
    if (!have_input_)
        throw std::logic_error("Conv1DKernel::backward called before forward");
    if (upstream.size() != out_cache_.size())
        throw std::invalid_argument("Conv1DKernel::backward: upstream length " +
                                    std::to_string(upstream.size()) + ", expected " +
                                    std::to_string(out_cache_.size()));
    std::vector<double> dx(x_cache_.size(), 0.0);
    for (std::size_t j = 0; j < upstream.size(); ++j) {
        const double dz = upstream[j] * activation_grad_from_output(out_cache_[j], act_cache_);
        if (dz == 0.0) continue;
        const std::size_t base = j * s_;
        gb_ += dz;
        for (std::size_t i = 0; i < k_; ++i) {
            gw_[i] += dz * x_cache_[base + i];
            dx[base + i] += dz * w_[i];
        }
    }
    return dx;
}

void Conv1DKernel::zero_grad() {
    std::fill(gw_.begin(), gw_.end(), 0.0);
    gb_ = 0.0;
}

void Conv1DKernel::adam_step(const AdamConfig& cfg, double grad_scale) {
    adam_w_.step(w_, gw_, grad_scale, cfg, /*decay=*/true);
    adam_b_.step({&b_, 1}, {&gb_, 1}, grad_scale, cfg, /*decay=*/false);
}

void Conv1DKernel::copy_params(std::span<double> out) const {
    if (out.size() != param_size()) throw std::invalid_argument("copy_params: bad span size");
    std::copy(w_.begin(), w_.end(), out.begin());
    out[k_] = b_;
}

void Conv1DKernel::set_params(std::span<const double> in) {
    if (in.size() != param_size()) throw std::invalid_argument("set_params: bad span size");
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(k_), w_.begin());
    b_ = in[k_];
}

void Conv1DKernel::copy_grads(std::span<double> out) const {
    if (out.size() != param_size()) throw std::invalid_argument("copy_grads: bad span size");
    std::copy(gw_.begin(), gw_.end(), out.begin());
    out[k_] = gb_;
}

// ---------------------------------------------------------------------------

double global_maxpool(FeatureMap& fm) {
    if (fm.values.empty())
        throw std::invalid_argument("global_maxpool: empty feature map");
    std::size_t best = 0;
    for (std::size_t j = 1; j < fm.values.size(); ++j)
        if (fm.values[j] > fm.values[best]) best = j;  // strict >: ties keep lowest index
    fm.argmax = best;
    return fm.values[best];
}

std::vector<double> maxpool_backward(const FeatureMap& fm, double upstream) {
    std::vector<double> dx(fm.values.size(), 0.0);
    if (fm.argmax >= dx.size())
        throw std::logic_error("maxpool_backward: argmax not recorded");
    dx[fm.argmax] = upstream;
    return dx;
}

// ---------------------------------------------------------------------------

double bce_loss(std::span<const double> p, std::span<const double> y) {
    if (p.size() != y.size())
        throw std::invalid_argument("bce_loss: length mismatch " + std::to_string(p.size()) +
                                    " vs " + std::to_string(y.size()));
    if (p.empty()) throw std::invalid_argument("bce_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
        acc -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
    }
    return acc / static_cast<double>(p.size());
}

std::vector<double> bce_grad(std::span<const double> p, std::span<const double> y) {
    if (p.size() != y.size())
        throw std::invalid_argument("bce_grad: length mismatch");
    const double inv_d = 1.0 / static_cast<double>(p.size());
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
        g[i] = inv_d * (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc));
    }
    return g;
}

// ---------------------------------------------------------------------------

std::vector<double> Dropout::forward(std::span<const double> x, double rate, Rng* rng,
                                     bool training) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("Dropout: rate " + std::to_string(rate) +
                                    " outside [0, 1)");
    if (!training || rate == 0.0) {
        identity_ = true;
        scale_.clear();
        return {x.begin(), x.end()};
    }
    if (rng == nullptr)
        throw std::invalid_argument("Dropout: training with rate > 0 needs an rng");
    identity_ = false;
    const double keep_scale = 1.0 / (1.0 - rate);
    scale_.resize(x.size());
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        scale_[i] = rng->uniform() < rate ? 0.0 : keep_scale;
        out[i] = x[i] * scale_[i];
    }
    return out;
}

std::vector<double> Dropout::backward(std::span<const double> upstream) const {
    if (identity_) return {upstream.begin(), upstream.end()};
    if (upstream.size() != scale_.size())
        throw std::invalid_argument("Dropout::backward: length mismatch");
    std::vector<double> dx(upstream.size());
    for (std::size_t i = 0; i < upstream.size(); ++i) dx[i] = upstream[i] * scale_[i];
    return dx;
}

}  // namespace mlc

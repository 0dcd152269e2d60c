#pragma once

#include <cstdint>
#include <vector>

#include "mlc/layers.hpp"
#include "mlc/matrix.hpp"
#include "mlc/prediction.hpp"
#include "mlc/rng.hpp"

namespace mlc {

/// Hyperparameters and shape of a multi-scale dependence network. Defaults
/// follow the reference protocol: hidden size 128, one kernel of every size
/// 1..128 at stride 1, batch 128, epoch cap 10,000.
struct MsdnConfig {
    std::size_t input_dim = 0;
    std::size_t label_dim = 0;
    std::size_t hidden_dim = 128;
    std::size_t kernel_count = 128;  // kernel i has size i; requires kernel_count <= hidden_dim
    double learning_rate = 0.001;
    double dropout_rate = 0.0;
    double weight_decay = 0.0;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 10000;
    std::size_t patience = 100;          // epochs without validation improvement
    double validation_fraction = 0.1;    // carved from the training split
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument on violations
};

struct TrainReport {
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
    std::size_t best_epoch = 0;
    double final_train_loss = 0.0;
    double wall_seconds = 0.0;
    bool stopped_early = false;
    bool budget_exhausted = false;
};

/// The three-stage model: dense encoder (m -> h, sigmoid), a bank of 1-D
/// kernels of sizes 1..K sliding over the hidden vector (sigmoid, globally
/// max-pooled to one scalar each), and a dense decoder (K -> d, sigmoid).
/// Dropout, when configured, sits on the hidden vector during training.
///
/// forward/backward mutate internal caches: one instance per thread.
class MsdnModel {
public:
    explicit MsdnModel(const MsdnConfig& cfg);

    const MsdnConfig& config() const { return cfg_; }

    /// Probabilities in (0,1)^d. `training` enables dropout (needs rng).
    std::vector<double> forward(std::span<const double> x, bool training = false,
                                Rng* dropout_rng = nullptr);

    /// Accumulates gradients of bce_loss(last forward, y) into every layer.
    /// Returns the loss value.
    double backward_from_loss(std::span<const double> y);

    void zero_grad();
    void adam_step(double grad_scale);

    std::size_t parameter_total() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);
    std::vector<double> gradients() const;

    DenseLayer& dense() { return dense_; }
    DenseLayer& decoder() { return decoder_; }
    std::vector<Conv1DKernel>& kernels() { return kernels_; }
    const DenseLayer& dense() const { return dense_; }
    const DenseLayer& decoder() const { return decoder_; }
    const std::vector<Conv1DKernel>& kernels() const { return kernels_; }

private:
    MsdnConfig cfg_;
    DenseLayer dense_;
    std::vector<Conv1DKernel> kernels_;
    DenseLayer decoder_;
    Dropout dropout_;

    // forward caches
    std::vector<double> hidden_, dropped_, pooled_, probs_;
    std::vector<FeatureMap> maps_;
    bool have_forward_ = false;
};

/// Parameter count of the architecture: dense (m+1)h, kernels sum(i)+K,
/// decoder (h+1)d. Requires kernel_count <= hidden_dim.
std::size_t msdn_param_count(std::size_t input_dim, std::size_t label_dim,
                             std::size_t hidden_dim = 128, std::size_t kernel_count = 128);

struct MsdnParamBreakdown {
    std::size_t dense = 0, conv = 0, decoder = 0, total = 0;
};
MsdnParamBreakdown msdn_param_breakdown(std::size_t input_dim, std::size_t label_dim,
                                        std::size_t hidden_dim = 128,
                                        std::size_t kernel_count = 128);

struct MsdnTrainResult {
    MsdnModel model;
    TrainReport report;
};

/// Mini-batch Adam training with early stopping: carves
/// cfg.validation_fraction of the rows (seeded shuffle) as a held-out
/// validation set, stops after cfg.patience epochs without relative
/// validation-loss improvement, and restores the best-validation weights.
/// Feature values are expected pre-scaled; labels must be binary.
/// budget_seconds > 0 caps wall time (checked between epochs).
MsdnTrainResult train_msdn(const Matrix& x_train, const Matrix& y_train, const MsdnConfig& cfg,
                           double budget_seconds = 0.0);

/// Same, but with an explicit validation set (used by grid search so every
/// candidate is judged on the same rows). Empty validation set disables early
/// stopping and runs to max_epochs.
MsdnTrainResult train_msdn_with_validation(const Matrix& x_train, const Matrix& y_train,
                                           const Matrix& x_val, const Matrix& y_val,
                                           const MsdnConfig& cfg, double budget_seconds = 0.0);

/// Probabilities plus thresholded labels for every row of x.
Prediction predict_msdn(MsdnModel& model, const Matrix& x, double threshold = 0.5);

/// Mean bce_loss of the model over the given rows (eval mode).
double msdn_mean_loss(MsdnModel& model, const Matrix& x, const Matrix& y);

}  // namespace mlc

#include "mlc/msdn.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlc {

void MsdnConfig::validate() const {
    if (input_dim == 0 || label_dim == 0)
        throw std::invalid_argument("MsdnConfig: input_dim and label_dim must be >= 1");
    if (hidden_dim == 0 || kernel_count == 0)
        throw std::invalid_argument("MsdnConfig: hidden_dim and kernel_count must be >= 1");
    if (kernel_count > hidden_dim)
        throw std::invalid_argument("MsdnConfig: kernel_count " + std::to_string(kernel_count) +
                                    " exceeds hidden_dim " + std::to_string(hidden_dim) +
                                    " (largest kernel must fit the hidden vector)");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("MsdnConfig: learning_rate must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("MsdnConfig: dropout_rate outside [0, 1)");
    if (weight_decay < 0.0)
        throw std::invalid_argument("MsdnConfig: weight_decay must be >= 0");
    if (batch_size == 0)
        throw std::invalid_argument("MsdnConfig: batch_size must be >= 1");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw std::invalid_argument("MsdnConfig: validation_fraction outside [0, 1)");
}

namespace {

// Each consumer of randomness gets its own derived stream so construction
// order and epoch count never perturb one another.
constexpr std::uint64_t kStreamDense = 101;
constexpr std::uint64_t kStreamKernelBase = 200;  // kernel i uses 200 + i
constexpr std::uint64_t kStreamDecoder = 102;
constexpr std::uint64_t kStreamShuffle = 103;
constexpr std::uint64_t kStreamDropout = 104;
constexpr std::uint64_t kStreamValCarve = 105;

MsdnConfig validated(const MsdnConfig& cfg) {
    cfg.validate();
    return cfg;
}

DenseLayer make_dense(std::size_t in, std::size_t out, std::uint64_t seed, std::uint64_t stream) {
    Rng rng = Rng::derive(seed, stream);
    return DenseLayer(in, out, rng);
}

std::vector<Conv1DKernel> make_kernel_bank(std::size_t count, std::uint64_t seed) {
    std::vector<Conv1DKernel> bank;
    bank.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        Rng rng = Rng::derive(seed, kStreamKernelBase + i);
        bank.emplace_back(i, /*stride=*/1, rng);
    }
    return bank;
}

AdamConfig adam_config(const MsdnConfig& cfg) {
    AdamConfig a;
    a.learning_rate = cfg.learning_rate;
    a.weight_decay = cfg.weight_decay;
    return a;
}

void require_binary(const Matrix& y, const char* who) {
    for (double v : y.data())
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument(std::string(who) + ": labels must be binary 0/1");
}

}  // namespace

MsdnModel::MsdnModel(const MsdnConfig& cfg)
    : cfg_(validated(cfg)),
      dense_(make_dense(cfg.input_dim, cfg.hidden_dim, cfg.seed, kStreamDense)),
      kernels_(make_kernel_bank(cfg.kernel_count, cfg.seed)),
      decoder_(make_dense(cfg.kernel_count, cfg.label_dim, cfg.seed, kStreamDecoder)) {}

std::vector<double> MsdnModel::forward(std::span<const double> x, bool training,
                                       Rng* dropout_rng) {
    if (x.size() != cfg_.input_dim)
        throw std::invalid_argument("MsdnModel::forward: input length " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(cfg_.input_dim));
    const bool drop = training && cfg_.dropout_rate > 0.0;
    if (drop && dropout_rng == nullptr)
        throw std::invalid_argument("MsdnModel::forward: training with dropout needs an rng");

    hidden_ = sigmoid_vec(dense_.forward(x));
    dropped_ = dropout_.forward(hidden_, cfg_.dropout_rate, dropout_rng, drop);

    maps_.clear();
    maps_.reserve(kernels_.size());
    pooled_.resize(kernels_.size());
    for (std::size_t i = 0; i < kernels_.size(); ++i) {
        maps_.push_back(kernels_[i].forward(dropped_, Activation::Sigmoid));
        pooled_[i] = global_maxpool(maps_.back());
    }

    probs_ = sigmoid_vec(decoder_.forward(pooled_));
    have_forward_ = true;
    return probs_;
}

double MsdnModel::backward_from_loss(std::span<const double> y) {
    if (!have_forward_)
        throw std::logic_error("MsdnModel::backward_from_loss called before forward");
    if (y.size() != cfg_.label_dim)
        throw std::invalid_argument("MsdnModel::backward_from_loss: label length mismatch");

    const double loss = bce_loss(probs_, y);

    std::vector<double> d_score = bce_grad(probs_, y);
    for (std::size_t t = 0; t < d_score.size(); ++t)
        d_score[t] *= sigmoid_grad_from_output(probs_[t]);

    std::vector<double> d_pooled = decoder_.backward(d_score);

    std::vector<double> d_dropped(dropped_.size(), 0.0);
    for (std::size_t i = 0; i < kernels_.size(); ++i) {
        const std::vector<double> d_map = maxpool_backward(maps_[i], d_pooled[i]);
        const std::vector<double> dx = kernels_[i].backward(d_map);
        for (std::size_t j = 0; j < d_dropped.size(); ++j) d_dropped[j] += dx[j];
    }

    std::vector<double> d_hidden = dropout_.backward(d_dropped);
    for (std::size_t j = 0; j < d_hidden.size(); ++j)
        d_hidden[j] *= sigmoid_grad_from_output(hidden_[j]);
    dense_.backward(d_hidden);

    return loss;
}

void MsdnModel::zero_grad() {
    dense_.zero_grad();
    for (auto& k : kernels_) k.zero_grad();
    decoder_.zero_grad();
}

void MsdnModel::adam_step(double grad_scale) {
    const AdamConfig a = adam_config(cfg_);
    dense_.adam_step(a, grad_scale);
    for (auto& k : kernels_) k.adam_step(a, grad_scale);
    decoder_.adam_step(a, grad_scale);
}

std::size_t MsdnModel::parameter_total() const {
    std::size_t n = dense_.param_size() + decoder_.param_size();
    for (const auto& k : kernels_) n += k.param_size();
    return n;
}

std::vector<double> MsdnModel::parameters() const {
    std::vector<double> flat(parameter_total());
    std::size_t off = 0;
    dense_.copy_params({flat.data() + off, dense_.param_size()});
    off += dense_.param_size();
    for (const auto& k : kernels_) {
        k.copy_params({flat.data() + off, k.param_size()});
        off += k.param_size();
    }
    decoder_.copy_params({flat.data() + off, decoder_.param_size()});
    return flat;
}

void MsdnModel::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_total())
        throw std::invalid_argument("MsdnModel::set_parameters: expected " +
                                    std::to_string(parameter_total()) + " values, got " +
                                    std::to_string(flat.size()));
    std::size_t off = 0;
    dense_.set_params(flat.subspan(off, dense_.param_size()));
    off += dense_.param_size();
    for (auto& k : kernels_) {
        k.set_params(flat.subspan(off, k.param_size()));
        off += k.param_size();
    }
    decoder_.set_params(flat.subspan(off, decoder_.param_size()));
}

std::vector<double> MsdnModel::gradients() const {
    std::vector<double> flat(parameter_total());
    std::size_t off = 0;
    dense_.copy_grads({flat.data() + off, dense_.param_size()});
    off += dense_.param_size();
    for (const auto& k : kernels_) {
        k.copy_grads({flat.data() + off, k.param_size()});
        off += k.param_size();
    }
    decoder_.copy_grads({flat.data() + off, decoder_.param_size()});
    return flat;
}

std::size_t msdn_param_count(std::size_t input_dim, std::size_t label_dim,
                             std::size_t hidden_dim, std::size_t kernel_count) {
    return msdn_param_breakdown(input_dim, label_dim, hidden_dim, kernel_count).total;
}

MsdnParamBreakdown msdn_param_breakdown(std::size_t input_dim, std::size_t label_dim,
                                        std::size_t hidden_dim, std::size_t kernel_count) {
    if (kernel_count > hidden_dim)
        throw std::invalid_argument("msdn_param_count: kernel_count exceeds hidden_dim");
    MsdnParamBreakdown b;
    b.dense = (input_dim + 1) * hidden_dim;
    b.conv = kernel_count * (kernel_count + 1) / 2 + kernel_count;  // weights + one bias each
    b.decoder = (kernel_count + 1) * label_dim;
    b.total = b.dense + b.conv + b.decoder;
    return b;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

double msdn_mean_loss(MsdnModel& model, const Matrix& x, const Matrix& y) {
    if (x.rows() == 0) throw std::invalid_argument("msdn_mean_loss: empty set");
    double acc = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto p = model.forward(x.row(r));
        acc += bce_loss(p, y.row(r));
    }
    return acc / static_cast<double>(x.rows());
}

MsdnTrainResult train_msdn(const Matrix& x_train, const Matrix& y_train, const MsdnConfig& cfg,
                           double budget_seconds) {
    cfg.validate();
    if (x_train.rows() == 0) throw std::invalid_argument("train_msdn: empty training set");

    // Carve the validation rows with a dedicated stream so the carve is
    // independent of epoch shuffling.
    const std::size_t n = x_train.rows();
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = n - 1;  // always keep at least one training row

    Rng carve = Rng::derive(cfg.seed, kStreamValCarve);
    const std::vector<std::size_t> perm = carve.permutation(n);
    const std::vector<std::size_t> val_idx(perm.begin(), perm.begin() + n_val);
    const std::vector<std::size_t> fit_idx(perm.begin() + n_val, perm.end());

    const Matrix x_fit = take_rows(x_train, fit_idx);
    const Matrix y_fit = take_rows(y_train, fit_idx);
    const Matrix x_val = take_rows(x_train, val_idx);
    const Matrix y_val = take_rows(y_train, val_idx);
    return train_msdn_with_validation(x_fit, y_fit, x_val, y_val, cfg, budget_seconds);
}

MsdnTrainResult train_msdn_with_validation(const Matrix& x_train, const Matrix& y_train,
                                           const Matrix& x_val, const Matrix& y_val,
                                           const MsdnConfig& cfg, double budget_seconds) {
    cfg.validate();
    if (x_train.rows() == 0) throw std::invalid_argument("train_msdn: empty training set");
    if (x_train.rows() != y_train.rows() || x_val.rows() != y_val.rows())
        throw std::invalid_argument("train_msdn: feature/label row mismatch");
    if (x_train.cols() != cfg.input_dim || y_train.cols() != cfg.label_dim)
        throw std::invalid_argument("train_msdn: data shape does not match config");
    require_binary(y_train, "train_msdn");
    if (y_val.rows() > 0) require_binary(y_val, "train_msdn");

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    MsdnTrainResult result{MsdnModel(cfg), TrainReport{}};
    MsdnModel& model = result.model;
    TrainReport& report = result.report;

    const bool use_val = x_val.rows() > 0;
    Rng shuffle_rng = Rng::derive(cfg.seed, kStreamShuffle);
    Rng dropout_rng = Rng::derive(cfg.seed, kStreamDropout);

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = model.parameters();
    std::size_t best_epoch = 0;
    std::size_t epochs_since_improvement = 0;

    const std::size_t n = x_train.rows();
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (budget_seconds > 0.0 && elapsed() >= budget_seconds) {
            report.budget_exhausted = true;
            break;
        }

        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            model.zero_grad();
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t r = order[b];
                model.forward(x_train.row(r), /*training=*/true, &dropout_rng);
                model.backward_from_loss(y_train.row(r));
            }
            model.adam_step(1.0 / static_cast<double>(stop - start));
        }
        report.epochs_run = epoch;

        if (use_val) {
            const double vloss = msdn_mean_loss(model, x_val, y_val);
            if (vloss < best_val * (1.0 - 1e-6)) {
                best_val = vloss;
                best_epoch = epoch;
                best_params = model.parameters();
                epochs_since_improvement = 0;
            } else {
                ++epochs_since_improvement;
                if (epochs_since_improvement >= cfg.patience) {
                    report.stopped_early = true;
                    break;
                }
            }
        }
    }

    if (use_val) {
        model.set_parameters(best_params);
        if (!std::isfinite(best_val)) best_val = msdn_mean_loss(model, x_val, y_val);
        report.best_val_loss = best_val;
        report.best_epoch = best_epoch;
    } else {
        report.best_val_loss = std::numeric_limits<double>::quiet_NaN();
        report.best_epoch = report.epochs_run;
    }
    report.final_train_loss = msdn_mean_loss(model, x_train, y_train);
    report.wall_seconds = elapsed();
    return result;
}

Prediction predict_msdn(MsdnModel& model, const Matrix& x, double threshold) {
    if (x.cols() != model.config().input_dim && x.rows() > 0)
        throw std::invalid_argument("predict_msdn: feature dim " + std::to_string(x.cols()) +
                                    ", model expects " +
                                    std::to_string(model.config().input_dim));
    Matrix probs(x.rows(), model.config().label_dim);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto p = model.forward(x.row(r));
        auto dst = probs.row(r);
        for (std::size_t c = 0; c < p.size(); ++c) dst[c] = p[c];
    }
    return make_prediction(std::move(probs), threshold);
}

}  // namespace mlc

#include "mlc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlc/layers.hpp"
#include "mlc/rng.hpp"

namespace mlc {

void BaseLearnerConfig::validate() const {
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("BaseLearnerConfig: learning_rate must be positive");
    if (weight_decay < 0.0)
        throw std::invalid_argument("BaseLearnerConfig: weight_decay must be >= 0");
    if (batch_size == 0)
        throw std::invalid_argument("BaseLearnerConfig: batch_size must be >= 1");
}

namespace {

void require_binary_targets(std::span<const double> y, const char* who) {
    for (double v : y)
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument(std::string(who) + ": targets must be binary 0/1");
}

BaseLearnerConfig with_seed(BaseLearnerConfig cfg, std::uint64_t stream) {
    cfg.seed = derive_seed(cfg.seed, stream);
    return cfg;
}

std::vector<std::size_t> identity_order(std::size_t d) {
    std::vector<std::size_t> order(d);
    for (std::size_t j = 0; j < d; ++j) order[j] = j;
    return order;
}

void check_order(const std::vector<std::size_t>& order, std::size_t d) {
    if (order.size() != d)
        throw std::invalid_argument("chain order: expected " + std::to_string(d) +
                                    " entries, got " + std::to_string(order.size()));
    std::vector<bool> seen(d, false);
    for (std::size_t v : order) {
        if (v >= d || seen[v])
            throw std::invalid_argument("chain order: not a permutation of 0.." +
                                        std::to_string(d - 1));
        seen[v] = true;
    }
}

void check_fit_inputs(const Matrix& x, const Matrix& y, const char* who) {
    if (x.rows() == 0 || x.cols() == 0)
        throw std::invalid_argument(std::string(who) + ": empty feature matrix");
    if (y.rows() != x.rows())
        throw std::invalid_argument(std::string(who) + ": feature/label row mismatch");
    if (y.cols() == 0)
        throw std::invalid_argument(std::string(who) + ": no labels");
}

}  // namespace

// ---------------------------------------------------------------------------
// LogisticBase
// ---------------------------------------------------------------------------

LogisticBase::LogisticBase(std::size_t n_features, std::size_t n_extra,
                           const BaseLearnerConfig& cfg)
    : n_features_(n_features),
      n_extra_(n_extra),
      cross_(cfg.cross_terms && n_extra > 0),
      cfg_(cfg) {
    cfg.validate();
    if (n_features == 0)
        throw std::invalid_argument("LogisticBase: need at least one feature");
    // Zero start: the objective is convex in the weights, so no symmetry
    // breaking is needed and the fit is seed-independent up to batch order.
    w_.assign(augmented_size(), 0.0);
}

std::size_t LogisticBase::augmented_size() const {
    return n_features_ + n_extra_ + (cross_ ? n_extra_ * n_features_ : 0);
}

void LogisticBase::build_augmented(std::span<const double> x, std::span<const double> extra,
                                   std::span<double> out) const {
    if (x.size() != n_features_)
        throw std::invalid_argument("LogisticBase: feature length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(n_features_));
    if (extra.size() != n_extra_)
        throw std::invalid_argument("LogisticBase: supplementary length " +
                                    std::to_string(extra.size()) + ", expected " +
                                    std::to_string(n_extra_));
    std::size_t off = 0;
    for (double v : x) out[off++] = v;
    for (double v : extra) out[off++] = v;
    if (cross_)
        for (double e : extra)
            for (double v : x) out[off++] = e * v;
}

double LogisticBase::predict_proba(std::span<const double> x,
                                   std::span<const double> extra) const {
    std::vector<double> aug(augmented_size());
    build_augmented(x, extra, aug);
    double z = b_;
    for (std::size_t i = 0; i < aug.size(); ++i) z += w_[i] * aug[i];
    return sigmoid(z);
}

void LogisticBase::fit(const Matrix& x, const Matrix& extra, std::span<const double> y) {
    if (x.rows() == 0) throw std::invalid_argument("LogisticBase::fit: empty data");
    if (x.rows() != y.size() || (n_extra_ > 0 && extra.rows() != x.rows()))
        throw std::invalid_argument("LogisticBase::fit: row count mismatch");
    if (x.cols() != n_features_ || extra.cols() != n_extra_)
        throw std::invalid_argument("LogisticBase::fit: column count mismatch");
    require_binary_targets(y, "LogisticBase::fit");

    const std::size_t n = x.rows();
    const std::size_t dim = augmented_size();

    // Materialize the augmented design once; desk-scale data keeps this small.
    Matrix aug(n, dim);
    for (std::size_t r = 0; r < n; ++r)
        build_augmented(x.row(r), n_extra_ > 0 ? extra.row(r) : std::span<const double>{},
                        aug.row(r));

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg_.learning_rate;
    adam_cfg.weight_decay = cfg_.weight_decay;
    AdamState adam_w(dim), adam_b(1);
    std::vector<double> gw(dim);
    double gb = 0.0;

    Rng shuffle_rng = Rng::derive(cfg_.seed, /*stream=*/7);
    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
            const std::size_t stop = std::min(start + cfg_.batch_size, n);
            std::fill(gw.begin(), gw.end(), 0.0);
            gb = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const auto row = aug.row(order[b]);
                double z = b_;
                for (std::size_t i = 0; i < dim; ++i) z += w_[i] * row[i];
                const double err = sigmoid(z) - y[order[b]];  // d(BCE o sigmoid)/dz
                for (std::size_t i = 0; i < dim; ++i) gw[i] += err * row[i];
                gb += err;
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            adam_w.step(w_, gw, scale, adam_cfg, /*decay=*/true);
            adam_b.step({&b_, 1}, {&gb, 1}, scale, adam_cfg, /*decay=*/false);
        }
    }
}

// ---------------------------------------------------------------------------
// Binary Relevance
// ---------------------------------------------------------------------------

BrModel br_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg) {
    check_fit_inputs(x, y, "br_fit");
    const std::size_t d = y.cols();
    BrModel model;
    model.models.reserve(d);
    const Matrix no_extra(x.rows(), 0);
    for (std::size_t j = 0; j < d; ++j) {
        LogisticBase base(x.cols(), 0, with_seed(cfg, j));
        std::vector<double> target(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) target[r] = y(r, j);
        base.fit(x, no_extra, target);
        model.models.push_back(std::move(base));
    }
    return model;
}

Prediction br_predict(const BrModel& model, const Matrix& x, double threshold) {
    Matrix probs(x.rows(), model.label_count());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t j = 0; j < model.label_count(); ++j)
            probs(r, j) = model.models[j].predict_proba(x.row(r));
    return make_prediction(std::move(probs), threshold);
}

// ---------------------------------------------------------------------------
// Classifier Chain
// ---------------------------------------------------------------------------

ChainModel cc_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg,
                  std::vector<std::size_t> order) {
    check_fit_inputs(x, y, "cc_fit");
    const std::size_t d = y.cols();
    if (order.empty()) order = identity_order(d);
    check_order(order, d);

    ChainModel chain;
    chain.order = std::move(order);
    chain.models.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        // Teacher forcing: the j earlier labels, true values, in chain order.
        Matrix extra(x.rows(), j);
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t t = 0; t < j; ++t) extra(r, t) = y(r, chain.order[t]);
        std::vector<double> target(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) target[r] = y(r, chain.order[j]);
        LogisticBase base(x.cols(), j, with_seed(cfg, j));
        base.fit(x, extra, target);
        chain.models.push_back(std::move(base));
    }
    return chain;
}

ChainPrediction cc_predict(const ChainModel& chain, const Matrix& x, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("cc_predict: threshold outside (0,1)");
    const std::size_t d = chain.label_count();
    ChainPrediction out;
    out.prediction.probabilities = Matrix(x.rows(), d);
    out.prediction.labels = Matrix(x.rows(), d);
    out.joint_probability.assign(x.rows(), 1.0);

    std::vector<double> decided(d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double p =
                chain.models[j].predict_proba(x.row(r), {decided.data(), j});
            const double hard = p >= threshold ? 1.0 : 0.0;
            decided[j] = hard;
            out.prediction.probabilities(r, chain.order[j]) = p;
            out.prediction.labels(r, chain.order[j]) = hard;
            out.joint_probability[r] *= hard == 1.0 ? p : 1.0 - p;
        }
    }
    return out;
}

double chain_joint_probability(const ChainModel& chain, std::span<const double> x,
                               std::span<const double> labels) {
    const std::size_t d = chain.label_count();
    if (labels.size() != d)
        throw std::invalid_argument("chain_joint_probability: label length mismatch");
    std::vector<double> prefix(d);
    double joint = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double p = chain.models[j].predict_proba(x, {prefix.data(), j});
        const double bit = labels[chain.order[j]];
        if (bit != 0.0 && bit != 1.0)
            throw std::invalid_argument("chain_joint_probability: labels must be binary");
        joint *= bit == 1.0 ? p : 1.0 - p;
        prefix[j] = bit;
    }
    return joint;
}

namespace {

// Depth-first walk of the assignment tree. Trying bit 0 before bit 1 with a
// strictly-greater replacement rule makes ties resolve to the assignment
// whose chain-order bit string is the smallest binary number.
void pcc_enumerate(const ChainModel& chain, std::span<const double> x, std::size_t depth,
                   std::vector<double>& prefix, double joint_so_far, double& best_joint,
                   std::vector<double>& best_bits, std::vector<double>& best_conds,
                   std::vector<double>& conds) {
    const std::size_t d = chain.label_count();
    if (depth == d) {
        if (joint_so_far > best_joint) {
            best_joint = joint_so_far;
            best_bits = prefix;
            best_conds = conds;
        }
        return;
    }
    const double p = chain.models[depth].predict_proba(x, {prefix.data(), depth});
    for (const double bit : {0.0, 1.0}) {
        prefix[depth] = bit;
        conds[depth] = p;
        pcc_enumerate(chain, x, depth + 1, prefix, joint_so_far * (bit == 1.0 ? p : 1.0 - p),
                      best_joint, best_bits, best_conds, conds);
    }
}

}  // namespace

ChainPrediction pcc_predict(const ChainModel& chain, const Matrix& x, std::size_t max_labels) {
    const std::size_t d = chain.label_count();
    if (d > max_labels)
        throw std::invalid_argument(
            "pcc_predict: " + std::to_string(d) + " labels exceed the exhaustive-search guard of " +
            std::to_string(max_labels) + " (the 2^d enumeration would be impractical)");

    ChainPrediction out;
    out.prediction.probabilities = Matrix(x.rows(), d);
    out.prediction.labels = Matrix(x.rows(), d);
    out.joint_probability.assign(x.rows(), 0.0);

    std::vector<double> prefix(d), conds(d), best_bits(d), best_conds(d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double best_joint = -1.0;
        pcc_enumerate(chain, x.row(r), 0, prefix, 1.0, best_joint, best_bits, best_conds, conds);
        for (std::size_t j = 0; j < d; ++j) {
            out.prediction.labels(r, chain.order[j]) = best_bits[j];
            out.prediction.probabilities(r, chain.order[j]) = best_conds[j];
        }
        out.joint_probability[r] = best_joint;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stacked BR
// ---------------------------------------------------------------------------

Matrix sta_level1_probs(const std::vector<LogisticBase>& level1, const Matrix& x) {
    Matrix probs(x.rows(), level1.size());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t j = 0; j < level1.size(); ++j)
            probs(r, j) = level1[j].predict_proba(x.row(r));
    return probs;
}

std::vector<LogisticBase> sta_fit_level2(const Matrix& x, const Matrix& level1_probs,
                                         const Matrix& y, const BaseLearnerConfig& cfg) {
    check_fit_inputs(x, y, "sta_fit_level2");
    if (level1_probs.rows() != x.rows() || level1_probs.cols() != y.cols())
        throw std::invalid_argument("sta_fit_level2: level-1 probability shape mismatch");
    const std::size_t d = y.cols();
    std::vector<LogisticBase> level2;
    level2.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> target(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) target[r] = y(r, j);
        LogisticBase base(x.cols(), d, with_seed(cfg, d + j));
        base.fit(x, level1_probs, target);
        level2.push_back(std::move(base));
    }
    return level2;
}

StackModel sta_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg) {
    check_fit_inputs(x, y, "sta_fit");
    StackModel model;
    model.level1 = br_fit(x, y, cfg).models;
    const Matrix p1 = sta_level1_probs(model.level1, x);
    model.level2 = sta_fit_level2(x, p1, y, cfg);
    return model;
}

Prediction sta_predict(const StackModel& model, const Matrix& x, double threshold) {
    const Matrix p1 = sta_level1_probs(model.level1, x);
    Matrix probs(x.rows(), model.label_count());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t j = 0; j < model.label_count(); ++j)
            probs(r, j) = model.level2[j].predict_proba(x.row(r), p1.row(r));
    return make_prediction(std::move(probs), threshold);
}

}  // namespace mlc

#pragma once

#include <cstdint>
#include <vector>

#include "mlc/matrix.hpp"
#include "mlc/prediction.hpp"

namespace mlc {

/// Training knobs shared by every base learner in BR / CC / PCC / STA.
struct BaseLearnerConfig {
    double learning_rate = 0.05;
    double weight_decay = 0.0;
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    /// Let supplementary inputs (chain labels, stacked probabilities) interact
    /// multiplicatively with the base features. Chain and stack conditionals
    /// such as "label j flips with label j-1" are not linearly separable in
    /// the raw inputs; the cross terms make them representable while leaving
    /// a learner with no supplementary inputs (BR, stack level 1) an ordinary
    /// logistic regression over the features.
    bool cross_terms = true;

    void validate() const;
};

/// Logistic regression over a feature vector plus optional supplementary
/// inputs, trained with Adam on binary cross-entropy. The public contract is
/// predict_proba(x, extra) with |x| = n_features and |extra| = n_extra; the
/// cross-term expansion (see BaseLearnerConfig) is internal.
class LogisticBase {
public:
    LogisticBase(std::size_t n_features, std::size_t n_extra, const BaseLearnerConfig& cfg);

    std::size_t n_features() const { return n_features_; }
    std::size_t n_extra() const { return n_extra_; }
    bool cross_terms() const { return cross_; }

    double predict_proba(std::span<const double> x, std::span<const double> extra = {}) const;

    /// `extra` may be an N x 0 matrix when the learner has no supplementary
    /// inputs. Targets must be binary.
    void fit(const Matrix& x, const Matrix& extra, std::span<const double> y);

    // Weight layout: [features..., extras..., cross terms extra-major...], then bias.
    std::vector<double>& weights() { return w_; }
    const std::vector<double>& weights() const { return w_; }
    double& bias() { return b_; }
    double bias() const { return b_; }
    std::size_t weight_size() const { return w_.size(); }

private:
    std::size_t n_features_, n_extra_;
    bool cross_;
    BaseLearnerConfig cfg_;
    std::vector<double> w_;
    double b_ = 0.0;

    std::size_t augmented_size() const;
    void build_augmented(std::span<const double> x, std::span<const double> extra,
                         std::span<double> out) const;
};

// ---------------------------------------------------------------------------
// Binary Relevance: one independent learner per label.
// ---------------------------------------------------------------------------

struct BrModel {
    std::vector<LogisticBase> models;  // one per label, features only
    std::size_t label_count() const { return models.size(); }
};

BrModel br_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg);
Prediction br_predict(const BrModel& model, const Matrix& x, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Classifier Chain: learner j consumes the features plus the j earlier chain
// labels. Training teacher-forces the true labels; prediction feeds the
// chain's own hard 0/1 decisions forward.
// ---------------------------------------------------------------------------

struct ChainModel {
    std::vector<LogisticBase> models;   // models[j] consumes m + j inputs
    std::vector<std::size_t> order;     // permutation of 0..d-1; chain position j predicts label order[j]
    std::size_t label_count() const { return models.size(); }
};

struct ChainPrediction {
    Prediction prediction;
    std::vector<double> joint_probability;  // per instance, product of the chain conditionals
};

/// Empty `order` means dataset column order 0..d-1 (the documented default).
ChainModel cc_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg,
                  std::vector<std::size_t> order = {});

/// Greedy chain decoding. probabilities(r, j) is the conditional
/// p(label j = 1 | x, earlier hard decisions).
ChainPrediction cc_predict(const ChainModel& chain, const Matrix& x, double threshold = 0.5);

/// Exact MAP over all 2^d label vectors via the chain factorization. Ties go
/// to the assignment whose chain-order bit string reads as the smaller binary
/// number. Refuses d > max_labels: the enumeration is O(2^d).
/// probabilities(r, j) holds the conditional along the MAP assignment.
ChainPrediction pcc_predict(const ChainModel& chain, const Matrix& x,
                            std::size_t max_labels = 20);

/// Chain joint probability of one explicit assignment (natural label order).
double chain_joint_probability(const ChainModel& chain, std::span<const double> x,
                               std::span<const double> labels);

// ---------------------------------------------------------------------------
// Stacked BR: level 1 is plain BR; level 2 consumes the features plus level
// 1's raw in-sample probabilities as supplementary inputs.
// ---------------------------------------------------------------------------

struct StackModel {
    std::vector<LogisticBase> level1;  // features only
    std::vector<LogisticBase> level2;  // features + d probabilities
    std::size_t label_count() const { return level1.size(); }
};

StackModel sta_fit(const Matrix& x, const Matrix& y, const BaseLearnerConfig& cfg);

/// Level-2 fit against a given matrix of level-1 probabilities; split out so
/// the stacking step can be exercised with an oracle level 1.
std::vector<LogisticBase> sta_fit_level2(const Matrix& x, const Matrix& level1_probs,
                                         const Matrix& y, const BaseLearnerConfig& cfg);

Prediction sta_predict(const StackModel& model, const Matrix& x, double threshold = 0.5);

/// Level-1 probabilities for every row (also used inside sta_fit/predict).
Matrix sta_level1_probs(const std::vector<LogisticBase>& level1, const Matrix& x);

}  // namespace mlc

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mlc/matrix.hpp"

namespace mlc {

/// Immutable after load; freely shared read-only across threads.
struct Dataset {
    std::string name;
    Matrix x;  // N x m features
    Matrix y;  // N x d binary labels
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;
    std::string domain;

    std::size_t instances() const { return x.rows(); }
    std::size_t features() const { return x.cols(); }
    std::size_t labels() const { return y.cols(); }

    /// Binary labels, finite features, N/m/d >= 1, matching name lists.
    void validate() const;
};

struct DatasetMeta {
    std::string name;
    std::size_t instances, features, labels;
    std::string domain;
};

/// The five benchmark datasets with their published dimensions.
std::span<const DatasetMeta> dataset_registry();
const DatasetMeta* registry_lookup(const std::string& name);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

enum class DataFormat {
    Canonical,  // self-describing delimited text, see docs/file-formats
    Arff,       // dense ARFF subset: numeric features, {0,1} nominal labels
    Auto,       // by extension: .arff -> Arff, else Canonical
};

struct LoadOptions {
    DataFormat format = DataFormat::Auto;
    /// ARFF label count; 0 means take it from "<path>.labels" sidecar or a
    /// MEKA-style "-C n" marker in @relation. Labels are the trailing
    /// `label_count` attributes (MEKA -C n > 0 declares leading labels).
    std::size_t label_count = 0;
    /// Dimension mismatches against the registry are reported here (the load
    /// still succeeds); a null pointer drops them.
    std::vector<std::string>* warnings = nullptr;
};

/// Throws std::runtime_error with a line number on malformed input and on
/// non-binary label values (naming row and column).
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Canonical format writer. save -> load -> save is byte-identical.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
void write_canonical(const Dataset& ds, std::ostream& out);
Dataset read_canonical(std::istream& in, const std::string& display_name);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct SplitPlan {
    std::uint64_t seed = 0;
    std::size_t repeat = 0;
    std::vector<std::size_t> train, test;
};

/// `repeats` independent seeded shuffles; |train| = round(train_fraction * N).
/// Deterministic per (seed, repeat). Requires n >= 4 so both sides are
/// non-empty at the default fraction.
std::vector<SplitPlan> make_splits(std::size_t n_instances, std::uint64_t seed,
                                   std::size_t repeats = 5, double train_fraction = 0.75);

// ---------------------------------------------------------------------------
// Min-max scaling
// ---------------------------------------------------------------------------

/// Per-feature min/max learned from the training rows only.
struct Scaler {
    std::vector<double> min, max;
};

Scaler fit_scaler(const Matrix& x, std::span<const std::size_t> train_indices);

/// x' = (x - min) / (max - min). Constant training features map to 0; test
/// values outside the training range are NOT clipped.
Matrix apply_scaler(const Scaler& scaler, const Matrix& x);

// ---------------------------------------------------------------------------
// Synthetic chain-dependence generator
// ---------------------------------------------------------------------------

/// Features uniform in [0,1]; label 0 is [x_0 > 0.5] and label j is
/// label_{j-1} XOR [x_j > 0.5], then every label is flipped independently
/// with probability `noise`. Marginals of the later labels sit near 0.5
/// while each conditional given the previous label is (noise-capped)
/// deterministic -- exactly the structure a per-label-independent model
/// cannot exploit. Requires d >= 2 and m >= d (label j reads feature j).
Dataset synth_xor(std::size_t n, std::size_t m, std::size_t d, double noise,
                  std::uint64_t seed);

}  // namespace mlc

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlc/baselines.hpp"
#include "mlc/dataset.hpp"
#include "mlc/metrics.hpp"
#include "mlc/msdn.hpp"

namespace mlc {

struct SynthSpec {
    std::size_t n = 2000, m = 4, d = 4;
    double noise = 0.05;
    std::uint64_t seed = 42;
};

/// Either a file to load or a synthetic generator call.
struct DatasetSpec {
    std::string name;  // empty: file stem / "synth_xor"
    std::filesystem::path path;
    DataFormat format = DataFormat::Auto;
    std::size_t label_count = 0;  // ARFF only
    std::optional<SynthSpec> synth;
};

/// Hyperparameter search axes. Defaults are the full reference grids; narrow
/// them in the config file for desk-scale runs. The network searches all
/// three axes, the baselines learning rate x weight decay.
struct GridSpec {
    std::vector<double> learning_rates{0.0005, 0.00075, 0.001, 0.0025, 0.005,
                                       0.0075, 0.01,    0.025, 0.05,  0.075};
    std::vector<double> dropouts{0.0, 0.25, 0.5};
    std::vector<double> weight_decays{0.0, 0.00001, 0.000025, 0.00005, 0.000075, 0.0001};
};

inline constexpr const char* kKnownModels[] = {"msdn", "br", "cc", "pcc", "sta"};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<std::string> models{"msdn", "br", "cc", "pcc", "sta"};
    std::uint64_t seed = 0;
    std::size_t repeats = 5;
    double train_fraction = 0.75;
    GridSpec grid;
    /// Shape and training-loop knobs; learning rate, dropout and weight decay
    /// come from the grid, input/label dims from the data.
    MsdnConfig msdn;
    /// Baseline training knobs; learning rate and weight decay come from the grid.
    BaseLearnerConfig base;
    std::string selection_metric = "ema";  // or "micro_f1"
    std::filesystem::path output_dir = "benchmark_out";
    std::size_t pcc_max_labels = 20;
    double budget_seconds = 0.0;  // per network training run; 0 = unlimited
    std::size_t jobs = 1;         // grid-point parallelism
    std::string reference_model = "msdn";
    double threshold = 0.5;
    bool save_models = true;

    void validate() const;
};

/// Parse an ExperimentConfig from a JSON config file (see README for the key
/// set). Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// The full protocol: per dataset x repeat, split -> scale -> grid search
/// (selection by validation metric) -> test metrics; then aggregation,
/// t-tests and report files under cfg.output_dir (metrics.csv, ttests.csv,
/// timings.csv, report.md, models/). Progress goes to `log`; timestamps never
/// reach the output files, so reruns with one seed are byte-identical.
/// Per-cell errors are recorded in the returned report and the run continues.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg, std::ostream& log);

/// Resolve a DatasetSpec (load the file or run the generator).
Dataset materialize_dataset(const DatasetSpec& spec, std::vector<std::string>* warnings);

}  // namespace mlc

#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mlc/matrix.hpp"

namespace mlc {

/// Fraction of rows whose whole predicted label vector matches the truth.
double exact_match_accuracy(const Matrix& y_pred, const Matrix& y_true);

/// 2 TP / (2 TP + FP + FN) with the counts summed over every instance-label
/// cell. A zero denominator (no positives anywhere) returns 0.
double micro_f1(const Matrix& y_pred, const Matrix& y_true);

enum class Verdict { Win, Tie, Loss };
const char* verdict_name(Verdict v);

struct TTestVerdict {
    double t = 0.0;        // meaningless when degenerate
    double p = 1.0;
    Verdict verdict = Verdict::Tie;
    bool degenerate = false;  // zero-variance differences
};

/// Two-sided paired t-test on a - b, from a's perspective: win if p < alpha
/// and mean(a-b) > 0, loss if p < alpha and mean < 0, else tie. Zero-variance
/// nonzero differences are decided by sign with the degenerate flag set;
/// all-zero differences are a tie. Requires equal lengths >= 2.
TTestVerdict paired_ttest(std::span<const double> a, std::span<const double> b,
                          double alpha = 0.05);

// ---------------------------------------------------------------------------
// Benchmark aggregation
// ---------------------------------------------------------------------------

struct MetricRecord {
    std::string dataset;
    std::string model;
    std::size_t repeat = 0;
    double ema = 0.0;
    double micro_f1 = 0.0;
    double wall_seconds = 0.0;  // reported separately; never part of metrics.csv
    std::size_t param_count = 0;
};

struct CellStats {
    double ema_mean = 0.0, ema_std = 0.0;
    double f1_mean = 0.0, f1_std = 0.0;
    std::size_t repeats = 0;
    std::size_t param_count = 0;
    double wall_seconds_total = 0.0;
};

struct CellVerdicts {
    TTestVerdict ema;
    TTestVerdict f1;
};

struct WinTieLoss {
    std::size_t win = 0, tie = 0, loss = 0;
};

/// mean +- sample (n-1) standard deviation per (dataset, model) cell, plus
/// paired t-test verdicts of the reference model against every other model,
/// with per-dataset and per-model win/tie/loss margins.
struct BenchmarkReport {
    std::vector<MetricRecord> records;  // sorted dataset, model, repeat
    std::string reference_model;
    double alpha = 0.05;
    std::vector<std::string> datasets, models;  // first-appearance order
    std::map<std::pair<std::string, std::string>, CellStats> cells;
    std::map<std::pair<std::string, std::string>, CellVerdicts> verdicts;  // vs reference
    std::map<std::string, WinTieLoss> per_model_ema, per_model_f1;    // keyed by competitor
    std::map<std::string, WinTieLoss> per_dataset_ema, per_dataset_f1;
    std::vector<std::string> notes;     // non-fatal remarks (single repeat, skipped cells)
    std::vector<std::string> failures;  // cells that errored during the run
};

/// Requires every (dataset, model) pair to carry the same repeat count; a
/// single repeat is allowed (std reported as 0) but flagged in the report.
BenchmarkReport aggregate(std::vector<MetricRecord> records, const std::string& reference_model,
                          double alpha = 0.05);

/// One record per row, full double precision, no timestamps: byte-identical
/// across reruns with the same seed.
void write_metrics_csv(const BenchmarkReport& report, std::ostream& out);

/// Reference-vs-competitor verdicts, one row per (dataset, competitor, metric).
void write_ttests_csv(const BenchmarkReport& report, std::ostream& out);

/// Wall-clock seconds per cell; kept out of metrics.csv on purpose.
void write_timings_csv(const BenchmarkReport& report, std::ostream& out);

/// mean+-std tables for both metrics with significance marks against the
/// reference model and win/tie/loss margins.
void write_markdown_report(const BenchmarkReport& report, std::ostream& out);

}  // namespace mlc

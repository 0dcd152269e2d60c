#include "mlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "mlc/stats.hpp"
#include "mlc/text.hpp"

namespace mlc {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(who) + ": shape mismatch " + shape_string(a) +
                                    " vs " + shape_string(b));
    if (a.rows() == 0 || a.cols() == 0)
        throw std::invalid_argument(std::string(who) + ": empty matrices");
}

}  // namespace

double exact_match_accuracy(const Matrix& y_pred, const Matrix& y_true) {
    check_same_shape(y_pred, y_true, "exact_match_accuracy");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < y_pred.rows(); ++r) {
        bool all = true;
        for (std::size_t c = 0; c < y_pred.cols(); ++c)
            if (y_pred(r, c) != y_true(r, c)) {
                all = false;
                break;
            }
        hits += all;
    }
    return static_cast<double>(hits) / static_cast<double>(y_pred.rows());
}

double micro_f1(const Matrix& y_pred, const Matrix& y_true) {
    check_same_shape(y_pred, y_true, "micro_f1");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < y_pred.rows(); ++r)
        for (std::size_t c = 0; c < y_pred.cols(); ++c) {
            const bool p = y_pred(r, c) == 1.0;
            const bool t = y_true(r, c) == 1.0;
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;  // no positives anywhere, by convention
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Win: return "win";
        case Verdict::Tie: return "tie";
        case Verdict::Loss: return "loss";
    }
    return "?";
}

TTestVerdict paired_ttest(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() != b.size())
        throw std::invalid_argument("paired_ttest: length mismatch " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    if (a.size() < 2)
        throw std::invalid_argument("paired_ttest: need at least 2 paired samples");

    const std::size_t n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    bool any_nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) any_nonzero = true;
        ss += (d - mean) * (d - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestVerdict out;
    if (sd == 0.0) {
        out.degenerate = true;
        if (!any_nonzero) {  // identical series
            out.t = 0.0;
            out.p = 1.0;
            out.verdict = Verdict::Tie;
        } else {  // constant nonzero difference: decided by sign
            out.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
            out.p = 0.0;
            out.verdict = mean > 0.0 ? Verdict::Win : Verdict::Loss;
        }
        return out;
    }

    out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    out.p = student_t_two_sided_p(out.t, static_cast<double>(n - 1));
    if (out.p < alpha)
        out.verdict = mean > 0.0 ? Verdict::Win : Verdict::Loss;
    else
        out.verdict = Verdict::Tie;
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

namespace {

void push_unique(std::vector<std::string>& list, const std::string& v) {
    if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
}

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

void count_verdict(WinTieLoss& wtl, Verdict v) {
    switch (v) {
        case Verdict::Win: ++wtl.win; break;
        case Verdict::Tie: ++wtl.tie; break;
        case Verdict::Loss: ++wtl.loss; break;
    }
}

}  // namespace

BenchmarkReport aggregate(std::vector<MetricRecord> records, const std::string& reference_model,
                          double alpha) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");

    BenchmarkReport report;
    report.reference_model = reference_model;
    report.alpha = alpha;

    for (const auto& r : records) {
        push_unique(report.datasets, r.dataset);
        push_unique(report.models, r.model);
    }

    std::sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
        return std::tie(a.dataset, a.model, a.repeat) < std::tie(b.dataset, b.model, b.repeat);
    });

    // Group into cells; every present cell must carry the same repeat count.
    std::map<std::pair<std::string, std::string>, std::vector<const MetricRecord*>> groups;
    for (const auto& r : records) groups[{r.dataset, r.model}].push_back(&r);
    std::size_t expected_repeats = 0;
    for (const auto& [key, rows] : groups) {
        if (expected_repeats == 0) expected_repeats = rows.size();
        if (rows.size() != expected_repeats)
            throw std::invalid_argument("aggregate: cell " + key.first + "/" + key.second +
                                        " has " + std::to_string(rows.size()) +
                                        " repeats, expected " + std::to_string(expected_repeats));
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i]->repeat != i)
                throw std::invalid_argument("aggregate: cell " + key.first + "/" + key.second +
                                            " is missing repeat " + std::to_string(i));
        CellStats stats;
        std::vector<double> emas, f1s;
        for (const auto* r : rows) {
            emas.push_back(r->ema);
            f1s.push_back(r->micro_f1);
            stats.wall_seconds_total += r->wall_seconds;
        }
        const MeanStd e = mean_std(emas), f = mean_std(f1s);
        stats.ema_mean = e.mean;
        stats.ema_std = e.std;
        stats.f1_mean = f.mean;
        stats.f1_std = f.std;
        stats.repeats = rows.size();
        stats.param_count = rows.front()->param_count;
        report.cells[key] = stats;
    }
    if (expected_repeats == 1)
        report.notes.push_back("single repeat per cell; standard deviations reported as 0");

    // Reference-vs-competitor t-tests per dataset.
    for (const auto& dataset : report.datasets) {
        auto values = [&](const std::string& model, auto pick) {
            std::vector<double> v;
            const auto it = groups.find({dataset, model});
            if (it == groups.end()) return v;
            for (const auto* r : it->second) v.push_back(pick(*r));
            return v;
        };
        const auto ref_ema = values(reference_model, [](const MetricRecord& r) { return r.ema; });
        const auto ref_f1 =
            values(reference_model, [](const MetricRecord& r) { return r.micro_f1; });
        if (ref_ema.size() < 2) continue;  // no reference cell (or single repeat): no tests
        for (const auto& model : report.models) {
            const auto ema = values(model, [](const MetricRecord& r) { return r.ema; });
            const auto f1 = values(model, [](const MetricRecord& r) { return r.micro_f1; });
            if (ema.size() != ref_ema.size()) continue;  // competitor absent on this dataset
            CellVerdicts v;
            v.ema = paired_ttest(ref_ema, ema, alpha);
            v.f1 = paired_ttest(ref_f1, f1, alpha);
            report.verdicts[{dataset, model}] = v;
            if (model != reference_model) {
                count_verdict(report.per_model_ema[model], v.ema.verdict);
                count_verdict(report.per_model_f1[model], v.f1.verdict);
                count_verdict(report.per_dataset_ema[dataset], v.ema.verdict);
                count_verdict(report.per_dataset_f1[dataset], v.f1.verdict);
            }
        }
    }

    report.records = std::move(records);
    return report;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_metrics_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "dataset,model,repeat,ema,micro_f1,param_count\n";
    for (const auto& r : report.records)
        out << r.dataset << ',' << r.model << ',' << r.repeat << ',' << format_double(r.ema)
            << ',' << format_double(r.micro_f1) << ',' << r.param_count << "\n";
}

void write_ttests_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "dataset,reference,competitor,metric,t,p,verdict,degenerate\n";
    for (const auto& [key, v] : report.verdicts) {
        const auto& [dataset, model] = key;
        out << dataset << ',' << report.reference_model << ',' << model << ",ema,"
            << format_double(v.ema.t) << ',' << format_double(v.ema.p) << ','
            << verdict_name(v.ema.verdict) << ',' << (v.ema.degenerate ? 1 : 0) << "\n";
        out << dataset << ',' << report.reference_model << ',' << model << ",micro_f1,"
            << format_double(v.f1.t) << ',' << format_double(v.f1.p) << ','
            << verdict_name(v.f1.verdict) << ',' << (v.f1.degenerate ? 1 : 0) << "\n";
    }
}

void write_timings_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "dataset,model,wall_seconds_total\n";
    for (const auto& [key, stats] : report.cells)
        out << key.first << ',' << key.second << ',' << format_double(stats.wall_seconds_total)
            << "\n";
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_metric_table(const BenchmarkReport& report, std::ostream& out, bool use_ema) {
    out << "| Model |";
    for (const auto& ds : report.datasets) out << ' ' << ds << " |";
    out << " #win/#tie/#loss |\n";
    out << "|---|";
    for (std::size_t i = 0; i < report.datasets.size() + 1; ++i) out << "---|";
    out << "\n";

    for (const auto& model : report.models) {
        out << "| " << model << " |";
        for (const auto& ds : report.datasets) {
            const auto cell = report.cells.find({ds, model});
            if (cell == report.cells.end()) {
                out << " - |";
                continue;
            }
            const auto& s = cell->second;
            out << ' ' << fixed4(use_ema ? s.ema_mean : s.f1_mean) << "±"
                << fixed4(use_ema ? s.ema_std : s.f1_std);
            const auto v = report.verdicts.find({ds, model});
            if (v != report.verdicts.end() && model != report.reference_model) {
                const Verdict verdict = use_ema ? v->second.ema.verdict : v->second.f1.verdict;
                if (verdict == Verdict::Win) out << " ⊖";   // reference significantly better
                if (verdict == Verdict::Loss) out << " ↑";  // reference significantly worse
            }
            out << " |";
        }
        if (model == report.reference_model) {
            out << " - |\n";
            continue;
        }
        const auto& per_model = use_ema ? report.per_model_ema : report.per_model_f1;
        const auto wtl = per_model.find(model);
        if (wtl == per_model.end())
            out << " - |\n";
        else
            out << ' ' << wtl->second.win << " / " << wtl->second.tie << " / "
                << wtl->second.loss << " |\n";
    }

    // Per-dataset margins for the reference model.
    out << "| #win/#tie/#loss |";
    const auto& per_ds = use_ema ? report.per_dataset_ema : report.per_dataset_f1;
    for (const auto& ds : report.datasets) {
        const auto wtl = per_ds.find(ds);
        if (wtl == per_ds.end())
            out << " - |";
        else
            out << ' ' << wtl->second.win << " / " << wtl->second.tie << " / "
                << wtl->second.loss << " |";
    }
    out << " |\n";
}

}  // namespace

void write_markdown_report(const BenchmarkReport& report, std::ostream& out) {
    out << "# Benchmark report\n\n";
    out << "Reference model: **" << report.reference_model << "**. Cells are mean±std over "
        << "repeats; paired t-test at alpha = " << format_double(report.alpha)
        << ". Mark ⊖ = reference significantly better than the row's model (a \"win\" for "
        << "the reference), ↑ = reference significantly worse (a \"loss\"); no mark = tie. "
        << "Margins count win/tie/loss for the reference.\n\n";
    out << "## Exact match accuracy\n\n";
    write_metric_table(report, out, /*use_ema=*/true);
    out << "\n## Micro-averaged F1\n\n";
    write_metric_table(report, out, /*use_ema=*/false);
    if (!report.notes.empty() || !report.failures.empty()) {
        out << "\n## Notes and failures\n\n";
        for (const auto& n : report.notes) out << "- note: " << n << "\n";
        for (const auto& f : report.failures) out << "- FAILED: " << f << "\n";
    }

    out << "\n## Parameter counts\n\n| Model |";
    for (const auto& ds : report.datasets) out << ' ' << ds << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.datasets.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& model : report.models) {
        out << "| " << model << " |";
        for (const auto& ds : report.datasets) {
            const auto cell = report.cells.find({ds, model});
            if (cell == report.cells.end())
                out << " - |";
            else
                out << ' ' << cell->second.param_count << " |";
        }
        out << "\n";
    }
}

}  // namespace mlc

#include "mlc/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <variant>

#include <json.hpp>

#include "mlc/model_io.hpp"
#include "mlc/rng.hpp"
#include "mlc/text.hpp"

namespace mlc {

namespace {

bool known_model(const std::string& name) {
    for (const char* m : kKnownModels)
        if (name == m) return true;
    return false;
}

// Seed stream per model family. cc and pcc share one on purpose: both then
// fit the identical chain for a given (dataset, repeat, grid point), so their
// comparison isolates greedy vs exhaustive decoding.
std::uint64_t model_stream(const std::string& name) {
    if (name == "msdn") return 10;
    if (name == "br") return 11;
    if (name == "cc" || name == "pcc") return 12;
    if (name == "sta") return 13;
    throw std::logic_error("model_stream: unknown model " + name);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw std::invalid_argument("experiment: no datasets configured");
    if (models.empty()) throw std::invalid_argument("experiment: no models configured");
    for (const auto& m : models) {
        if (!known_model(m))
            throw std::invalid_argument("experiment: unknown model '" + m +
                                        "' (known: msdn, br, cc, pcc, sta)");
        if (std::count(models.begin(), models.end(), m) != 1)
            throw std::invalid_argument("experiment: duplicate model '" + m + "'");
    }
    if (std::find(models.begin(), models.end(), reference_model) == models.end())
        throw std::invalid_argument("experiment: reference model '" + reference_model +
                                    "' is not in the model list");
    if (repeats == 0) throw std::invalid_argument("experiment: repeats must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("experiment: train_fraction outside (0,1)");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("experiment: threshold outside (0,1)");
    if (selection_metric != "ema" && selection_metric != "micro_f1")
        throw std::invalid_argument("experiment: selection_metric must be ema or micro_f1");
    if (grid.learning_rates.empty() || grid.dropouts.empty() || grid.weight_decays.empty())
        throw std::invalid_argument("experiment: empty grid axis");
    if (jobs == 0) throw std::invalid_argument("experiment: jobs must be >= 1");
    if (msdn.hidden_dim == 0 || msdn.kernel_count == 0 || msdn.kernel_count > msdn.hidden_dim)
        throw std::invalid_argument("experiment: msdn kernel_count must be in [1, hidden_dim]");
    if (msdn.batch_size == 0 || base.batch_size == 0)
        throw std::invalid_argument("experiment: batch sizes must be >= 1");
    if (msdn.validation_fraction < 0.0 || msdn.validation_fraction >= 1.0)
        throw std::invalid_argument("experiment: validation_fraction outside [0,1)");
    const std::size_t grid_points =
        grid.learning_rates.size() * grid.dropouts.size() * grid.weight_decays.size();
    if (grid_points > 1 && msdn.validation_fraction == 0.0)
        throw std::invalid_argument(
            "experiment: grid search needs validation_fraction > 0 for selection");
    if (budget_seconds < 0.0)
        throw std::invalid_argument("experiment: budget_seconds must be >= 0");
}

Dataset materialize_dataset(const DatasetSpec& spec, std::vector<std::string>* warnings) {
    Dataset ds;
    if (spec.synth.has_value()) {
        const SynthSpec& s = *spec.synth;
        ds = synth_xor(s.n, s.m, s.d, s.noise, s.seed);
    } else {
        if (spec.path.empty())
            throw std::invalid_argument("dataset spec needs either a path or a synth block");
        LoadOptions opt;
        opt.format = spec.format;
        opt.label_count = spec.label_count;
        opt.warnings = warnings;
        ds = load_dataset(spec.path, opt);
    }
    if (!spec.name.empty()) ds.name = spec.name;
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// Grid search plumbing
// ---------------------------------------------------------------------------

namespace {

struct GridPoint {
    double learning_rate = 0.0;
    double dropout = 0.0;
    double weight_decay = 0.0;
};

// The baselines have no dropout axis; collapsing it keeps their search honest
// (no duplicate training runs).
std::vector<GridPoint> expand_grid(const GridSpec& grid, bool with_dropout) {
    std::vector<GridPoint> points;
    for (const double lr : grid.learning_rates)
        for (const double wd : grid.weight_decays) {
            if (with_dropout)
                for (const double dr : grid.dropouts) points.push_back({lr, dr, wd});
            else
                points.push_back({lr, 0.0, wd});
        }
    return points;
}

using AnyModel = std::variant<MsdnModel, BrModel, ChainModel, StackModel>;

struct Candidate {
    std::unique_ptr<AnyModel> model;
    double selection_value = 0.0;
};

// Bounded-worker parallel loop. Tasks must not touch shared mutable state;
// exceptions are captured per index and the first (by index) is rethrown.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct CellContext {
    const ExperimentConfig& cfg;
    const Dataset& ds;
    Matrix x_fit, y_fit;    // training rows minus the selection validation
    Matrix x_val, y_val;    // selection validation (may be empty)
    Matrix x_test, y_test;
    std::uint64_t cell_seed = 0;
};

AnyModel train_candidate(const std::string& model_name, const CellContext& ctx,
                         const GridPoint& point, std::size_t grid_index) {
    const std::uint64_t run_seed = derive_seed(ctx.cell_seed, grid_index);
    if (model_name == "msdn") {
        MsdnConfig mc = ctx.cfg.msdn;
        mc.input_dim = ctx.x_fit.cols();
        mc.label_dim = ctx.y_fit.cols();
        mc.learning_rate = point.learning_rate;
        mc.dropout_rate = point.dropout;
        mc.weight_decay = point.weight_decay;
        mc.seed = run_seed;
        // The selection validation rows double as the early-stopping monitor,
        // so all candidates are judged on the same held-out data.
        return train_msdn_with_validation(ctx.x_fit, ctx.y_fit, ctx.x_val, ctx.y_val, mc,
                                          ctx.cfg.budget_seconds)
            .model;
    }
    BaseLearnerConfig bc = ctx.cfg.base;
    bc.learning_rate = point.learning_rate;
    bc.weight_decay = point.weight_decay;
    bc.seed = run_seed;
    if (model_name == "br") return br_fit(ctx.x_fit, ctx.y_fit, bc);
    if (model_name == "cc" || model_name == "pcc") return cc_fit(ctx.x_fit, ctx.y_fit, bc);
    if (model_name == "sta") return sta_fit(ctx.x_fit, ctx.y_fit, bc);
    throw std::logic_error("train_candidate: unknown model " + model_name);
}

Prediction predict_candidate(const std::string& model_name, AnyModel& model, const Matrix& x,
                             const ExperimentConfig& cfg) {
    if (auto* msdn = std::get_if<MsdnModel>(&model))
        return predict_msdn(*msdn, x, cfg.threshold);
    if (auto* br = std::get_if<BrModel>(&model)) return br_predict(*br, x, cfg.threshold);
    if (auto* chain = std::get_if<ChainModel>(&model)) {
        if (model_name == "pcc")
            return pcc_predict(*chain, x, cfg.pcc_max_labels).prediction;
        return cc_predict(*chain, x, cfg.threshold).prediction;
    }
    if (auto* sta = std::get_if<StackModel>(&model)) return sta_predict(*sta, x, cfg.threshold);
    throw std::logic_error("predict_candidate: empty model variant");
}

std::size_t logistic_params(const std::vector<LogisticBase>& models) {
    std::size_t n = 0;
    for (const auto& m : models) n += m.weight_size() + 1;
    return n;
}

std::size_t candidate_param_count(const AnyModel& model) {
    if (const auto* msdn = std::get_if<MsdnModel>(&model)) return msdn->parameter_total();
    if (const auto* br = std::get_if<BrModel>(&model)) return logistic_params(br->models);
    if (const auto* chain = std::get_if<ChainModel>(&model))
        return logistic_params(chain->models);
    if (const auto* sta = std::get_if<StackModel>(&model))
        return logistic_params(sta->level1) + logistic_params(sta->level2);
    return 0;
}

void save_candidate(const std::string& model_name, const AnyModel& model,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    if (const auto* msdn = std::get_if<MsdnModel>(&model)) save_msdn(*msdn, out);
    if (const auto* br = std::get_if<BrModel>(&model)) save_br(*br, out);
    if (const auto* chain = std::get_if<ChainModel>(&model)) save_chain(*chain, out, model_name);
    if (const auto* sta = std::get_if<StackModel>(&model)) save_sta(*sta, out);
}

double selection_score(const ExperimentConfig& cfg, const Prediction& pred, const Matrix& truth) {
    return cfg.selection_metric == "ema" ? exact_match_accuracy(pred.labels, truth)
                                         : micro_f1(pred.labels, truth);
}

}  // namespace

// ---------------------------------------------------------------------------
// The protocol
// ---------------------------------------------------------------------------

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto t_bench = std::chrono::steady_clock::now();
    auto since = [](auto t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    std::vector<MetricRecord> records;
    std::vector<std::string> notes, failures;

    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.save_models) std::filesystem::create_directories(cfg.output_dir / "models");

    for (std::size_t ds_i = 0; ds_i < cfg.datasets.size(); ++ds_i) {
        Dataset ds;
        try {
            std::vector<std::string> warnings;
            ds = materialize_dataset(cfg.datasets[ds_i], &warnings);
            for (auto& w : warnings) {
                log << "warning: " << w << "\n";
                notes.push_back(w);
            }
        } catch (const std::exception& e) {
            failures.push_back("dataset #" + std::to_string(ds_i) + ": " + e.what());
            log << "FAILED to load dataset #" << ds_i << ": " << e.what() << "\n";
            continue;
        }
        log << "dataset " << ds.name << ": " << ds.instances() << " instances, "
            << ds.features() << " features, " << ds.labels() << " labels\n";

        const auto splits =
            make_splits(ds.instances(), derive_seed(cfg.seed, ds_i), cfg.repeats,
                        cfg.train_fraction);

        for (const auto& model_name : cfg.models) {
            if (model_name == "pcc" && ds.labels() > cfg.pcc_max_labels) {
                const std::string msg = "pcc skipped on " + ds.name + ": " +
                                        std::to_string(ds.labels()) +
                                        " labels exceed the exhaustive-search guard of " +
                                        std::to_string(cfg.pcc_max_labels);
                notes.push_back(msg);
                log << "note: " << msg << "\n";
                continue;
            }

            for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
                const auto t_cell = std::chrono::steady_clock::now();
                try {
                    const SplitPlan& plan = splits[rep];
                    const Scaler scaler = fit_scaler(ds.x, plan.train);
                    const Matrix x_scaled = apply_scaler(scaler, ds.x);

                    CellContext ctx{cfg, ds, {}, {}, {}, {}, {}, {},
                                    derive_seed(derive_seed(cfg.seed, ds_i * 64 + rep),
                                                model_stream(model_name))};

                    const Matrix x_train = take_rows(x_scaled, plan.train);
                    const Matrix y_train = take_rows(ds.y, plan.train);
                    ctx.x_test = take_rows(x_scaled, plan.test);
                    ctx.y_test = take_rows(ds.y, plan.test);

                    // Selection validation: same rows for every model and grid
                    // point of this (dataset, repeat).
                    std::size_t n_val = static_cast<std::size_t>(std::llround(
                        cfg.msdn.validation_fraction * static_cast<double>(x_train.rows())));
                    if (n_val >= x_train.rows()) n_val = x_train.rows() - 1;
                    Rng carve = Rng::derive(derive_seed(cfg.seed, ds_i), 5000 + rep);
                    const auto perm = carve.permutation(x_train.rows());
                    const std::vector<std::size_t> val_idx(perm.begin(), perm.begin() + n_val);
                    const std::vector<std::size_t> fit_idx(perm.begin() + n_val, perm.end());
                    ctx.x_fit = take_rows(x_train, fit_idx);
                    ctx.y_fit = take_rows(y_train, fit_idx);
                    ctx.x_val = take_rows(x_train, val_idx);
                    ctx.y_val = take_rows(y_train, val_idx);

                    const auto points = expand_grid(cfg.grid, model_name == "msdn");
                    std::vector<Candidate> results(points.size());
                    parallel_for(points.size(), cfg.jobs, [&](std::size_t i) {
                        auto model = std::make_unique<AnyModel>(
                            train_candidate(model_name, ctx, points[i], i));
                        double score = 0.0;
                        if (ctx.x_val.rows() > 0) {
                            const Prediction val_pred =
                                predict_candidate(model_name, *model, ctx.x_val, cfg);
                            score = selection_score(cfg, val_pred, ctx.y_val);
                        }
                        results[i] = Candidate{std::move(model), score};
                    });

                    std::size_t best = 0;
                    for (std::size_t i = 1; i < results.size(); ++i)
                        if (results[i].selection_value > results[best].selection_value) best = i;

                    AnyModel& winner = *results[best].model;
                    const Prediction test_pred =
                        predict_candidate(model_name, winner, ctx.x_test, cfg);

                    MetricRecord record;
                    record.dataset = ds.name;
                    record.model = model_name;
                    record.repeat = rep;
                    record.ema = exact_match_accuracy(test_pred.labels, ctx.y_test);
                    record.micro_f1 = micro_f1(test_pred.labels, ctx.y_test);
                    record.param_count = candidate_param_count(winner);
                    record.wall_seconds = since(t_cell);
                    records.push_back(record);

                    if (cfg.save_models)
                        save_candidate(model_name, winner,
                                       cfg.output_dir / "models" /
                                           (ds.name + "_" + model_name + "_r" +
                                            std::to_string(rep) + ".model"));

                    log << ds.name << " / " << model_name << " / repeat " << rep << ": ema "
                        << format_double(record.ema) << ", micro_f1 "
                        << format_double(record.micro_f1) << " (grid point " << best << ", "
                        << format_double(record.wall_seconds) << "s)\n";
                } catch (const std::exception& e) {
                    const std::string msg = ds.name + " / " + model_name + " / repeat " +
                                            std::to_string(rep) + ": " + e.what();
                    failures.push_back(msg);
                    log << "FAILED " << msg << "\n";
                }
            }
        }
    }

    // Cells that did not complete every repeat cannot enter the paired tests.
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (const auto& r : records) ++counts[{r.dataset, r.model}];
    std::vector<MetricRecord> complete;
    for (auto& r : records) {
        if (counts[{r.dataset, r.model}] == cfg.repeats)
            complete.push_back(std::move(r));
    }
    for (const auto& [key, n] : counts)
        if (n != cfg.repeats)
            notes.push_back("cell " + key.first + "/" + key.second + " dropped from the report (" +
                            std::to_string(n) + " of " + std::to_string(cfg.repeats) +
                            " repeats completed)");

    BenchmarkReport report;
    if (!complete.empty()) {
        report = aggregate(std::move(complete), cfg.reference_model, /*alpha=*/0.05);
    } else {
        report.reference_model = cfg.reference_model;
        failures.push_back("no cell completed all repeats; report is empty");
    }
    report.notes.insert(report.notes.end(), notes.begin(), notes.end());
    report.failures.insert(report.failures.end(), failures.begin(), failures.end());

    auto write_file = [&](const char* name, auto writer) {
        const auto path = cfg.output_dir / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        writer(report, out);
        if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    };
    write_file("metrics.csv", write_metrics_csv);
    write_file("ttests.csv", write_ttests_csv);
    write_file("timings.csv", write_timings_csv);
    write_file("report.md", write_markdown_report);

    log << "benchmark finished in " << format_double(since(t_bench)) << "s; outputs under "
        << cfg.output_dir.string() << "\n";
    return report;
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::runtime_error(std::string("config: unknown key '") + key + "' in " +
                                     where);
    }
}

DataFormat parse_format(const std::string& name) {
    const std::string low = lower(name);
    if (low == "canonical") return DataFormat::Canonical;
    if (low == "arff") return DataFormat::Arff;
    if (low == "auto") return DataFormat::Auto;
    throw std::runtime_error("config: unknown format '" + name + "'");
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config '" + path.string() + "': " + e.what());
    }

    ExperimentConfig cfg;
    check_keys(j,
               {"datasets", "models", "seed", "repeats", "train_fraction", "grid", "msdn",
                "base", "selection_metric", "output_dir", "pcc_max_labels", "budget_seconds",
                "jobs", "reference_model", "threshold", "save_models"},
               "the top level");

    if (!j.contains("datasets")) throw std::runtime_error("config: 'datasets' is required");
    for (const auto& dj : j.at("datasets")) {
        check_keys(dj, {"name", "path", "format", "labels", "synth"}, "a dataset entry");
        DatasetSpec spec;
        spec.name = dj.value("name", "");
        spec.path = dj.value("path", "");
        if (dj.contains("format")) spec.format = parse_format(dj.at("format"));
        spec.label_count = dj.value("labels", 0);
        if (dj.contains("synth")) {
            const auto& sj = dj.at("synth");
            check_keys(sj, {"n", "m", "d", "noise", "seed"}, "a synth block");
            SynthSpec s;
            s.n = sj.value("n", s.n);
            s.m = sj.value("m", s.m);
            s.d = sj.value("d", s.d);
            s.noise = sj.value("noise", s.noise);
            s.seed = sj.value("seed", s.seed);
            spec.synth = s;
        }
        cfg.datasets.push_back(std::move(spec));
    }

    if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.repeats = j.value("repeats", cfg.repeats);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    if (j.contains("grid")) {
        const auto& gj = j.at("grid");
        check_keys(gj, {"learning_rates", "dropouts", "weight_decays"}, "the grid block");
        if (gj.contains("learning_rates"))
            cfg.grid.learning_rates = gj.at("learning_rates").get<std::vector<double>>();
        if (gj.contains("dropouts"))
            cfg.grid.dropouts = gj.at("dropouts").get<std::vector<double>>();
        if (gj.contains("weight_decays"))
            cfg.grid.weight_decays = gj.at("weight_decays").get<std::vector<double>>();
    }
    if (j.contains("msdn")) {
        const auto& mj = j.at("msdn");
        check_keys(mj,
                   {"hidden_dim", "kernel_count", "batch_size", "max_epochs", "patience",
                    "validation_fraction"},
                   "the msdn block");
        cfg.msdn.hidden_dim = mj.value("hidden_dim", cfg.msdn.hidden_dim);
        cfg.msdn.kernel_count = mj.value("kernel_count", cfg.msdn.kernel_count);
        cfg.msdn.batch_size = mj.value("batch_size", cfg.msdn.batch_size);
        cfg.msdn.max_epochs = mj.value("max_epochs", cfg.msdn.max_epochs);
        cfg.msdn.patience = mj.value("patience", cfg.msdn.patience);
        cfg.msdn.validation_fraction =
            mj.value("validation_fraction", cfg.msdn.validation_fraction);
    }
    if (j.contains("base")) {
        const auto& bj = j.at("base");
        check_keys(bj, {"epochs", "batch_size", "learning_rate", "cross_terms"},
                   "the base block");
        cfg.base.epochs = bj.value("epochs", cfg.base.epochs);
        cfg.base.batch_size = bj.value("batch_size", cfg.base.batch_size);
        cfg.base.learning_rate = bj.value("learning_rate", cfg.base.learning_rate);
        cfg.base.cross_terms = bj.value("cross_terms", cfg.base.cross_terms);
    }
    cfg.selection_metric = j.value("selection_metric", cfg.selection_metric);
    cfg.output_dir = std::filesystem::path(j.value("output_dir", cfg.output_dir.string()));
    cfg.pcc_max_labels = j.value("pcc_max_labels", cfg.pcc_max_labels);
    cfg.budget_seconds = j.value("budget_seconds", cfg.budget_seconds);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.reference_model = j.value("reference_model", cfg.reference_model);
    cfg.threshold = j.value("threshold", cfg.threshold);
    cfg.save_models = j.value("save_models", cfg.save_models);
    return cfg;
}

}  // namespace mlc

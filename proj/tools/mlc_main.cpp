// mlc: multi-label classification toolkit CLI.
//
// Subcommands: train, predict, benchmark, params, synth. All outputs are
// deterministic for a fixed seed; wall-clock times appear only on stdout.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mlc/baselines.hpp"
#include "mlc/benchmark.hpp"
#include "mlc/dataset.hpp"
#include "mlc/metrics.hpp"
#include "mlc/model_io.hpp"
#include "mlc/msdn.hpp"
#include "mlc/text.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mlc;

DataFormat format_from_flag(const std::string& name) {
    const std::string low = lower(name);
    if (low == "canonical") return DataFormat::Canonical;
    if (low == "arff") return DataFormat::Arff;
    if (low == "auto") return DataFormat::Auto;
    throw CLI::ValidationError("--format", "expected auto, canonical or arff");
}

Dataset load_with_warnings(const std::string& path, const std::string& format,
                           std::size_t labels) {
    LoadOptions opt;
    opt.format = format_from_flag(format);
    opt.label_count = labels;
    std::vector<std::string> warnings;
    opt.warnings = &warnings;
    Dataset ds = load_dataset(path, opt);
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    return ds;
}

struct TrainArgs {
    std::string data, format = "auto", model, out_dir = "train_out";
    std::size_t labels = 0;
    std::uint64_t seed = 0;
    // network knobs
    std::size_t hidden = 128, kernels = 128, batch = 128, max_epochs = 10000, patience = 100;
    double val_fraction = 0.1, dropout = 0.0;
    // shared learner knobs
    double lr = 0.01, weight_decay = 0.0;
    std::size_t base_epochs = 200;
    std::size_t pcc_dmax = 20;
    double budget_seconds = 0.0;
};

int cmd_train(const TrainArgs& args) {
    const Dataset ds = load_with_warnings(args.data, args.format, args.labels);
    fs::create_directories(args.out_dir);
    const fs::path model_path = fs::path(args.out_dir) / (ds.name + "_" + args.model + ".model");
    const fs::path report_path = fs::path(args.out_dir) / (ds.name + "_" + args.model + "_report.txt");

    std::ostringstream report;
    report << "model " << args.model << "\n";
    report << "dataset " << ds.name << " (" << ds.instances() << " x " << ds.features()
           << " features, " << ds.labels() << " labels)\n";
    report << "seed " << args.seed << "\n";

    std::ofstream model_out(model_path);
    if (!model_out) throw std::runtime_error("cannot write '" + model_path.string() + "'");

    if (args.model == "msdn") {
        MsdnConfig cfg;
        cfg.input_dim = ds.features();
        cfg.label_dim = ds.labels();
        cfg.hidden_dim = args.hidden;
        cfg.kernel_count = args.kernels;
        cfg.learning_rate = args.lr;
        cfg.dropout_rate = args.dropout;
        cfg.weight_decay = args.weight_decay;
        cfg.batch_size = args.batch;
        cfg.max_epochs = args.max_epochs;
        cfg.patience = args.patience;
        cfg.validation_fraction = args.val_fraction;
        cfg.seed = args.seed;
        auto [model, train_report] = train_msdn(ds.x, ds.y, cfg, args.budget_seconds);
        save_msdn(model, model_out);
        report << "parameters " << model.parameter_total() << "\n";
        report << "epochs_run " << train_report.epochs_run << " (cap " << cfg.max_epochs
               << ")\n";
        report << "best_epoch " << train_report.best_epoch << "\n";
        report << "best_val_loss " << format_double(train_report.best_val_loss) << "\n";
        report << "final_train_loss " << format_double(train_report.final_train_loss) << "\n";
        report << "stopped_early " << (train_report.stopped_early ? "yes" : "no") << "\n";
        if (train_report.budget_exhausted) report << "budget_exhausted yes\n";
        std::cout << "trained msdn in " << format_double(train_report.wall_seconds) << "s ("
                  << train_report.epochs_run << " epochs)\n";
    } else {
        BaseLearnerConfig cfg;
        cfg.learning_rate = args.lr;
        cfg.weight_decay = args.weight_decay;
        cfg.epochs = args.base_epochs;
        cfg.batch_size = args.batch;
        cfg.seed = args.seed;
        if (args.model == "br") {
            const BrModel model = br_fit(ds.x, ds.y, cfg);
            save_br(model, model_out);
        } else if (args.model == "cc" || args.model == "pcc") {
            if (args.model == "pcc" && ds.labels() > args.pcc_dmax)
                throw std::runtime_error(
                    "pcc refused: " + std::to_string(ds.labels()) +
                    " labels exceed --pcc-dmax " + std::to_string(args.pcc_dmax) +
                    " (exhaustive prediction is O(2^d))");
            const ChainModel model = cc_fit(ds.x, ds.y, cfg);
            save_chain(model, model_out, args.model);
        } else if (args.model == "sta") {
            const StackModel model = sta_fit(ds.x, ds.y, cfg);
            save_sta(model, model_out);
        } else {
            throw std::runtime_error("unknown model '" + args.model + "'");
        }
        report << "base_epochs " << cfg.epochs << "\n";
        report << "learning_rate " << format_double(cfg.learning_rate) << "\n";
    }
    model_out.flush();
    if (!model_out) throw std::runtime_error("write failed for '" + model_path.string() + "'");

    std::ofstream report_out(report_path);
    report_out << report.str();
    std::cout << "model written to " << model_path.string() << "\n";
    std::cout << "report written to " << report_path.string() << "\n";
    return 0;
}

struct PredictArgs {
    std::string model_file, data, format = "auto", out = "predictions.csv";
    std::size_t labels = 0;
    double threshold = 0.5;
    std::size_t pcc_dmax = 20;
};

int cmd_predict(const PredictArgs& args) {
    const Dataset ds = load_with_warnings(args.data, args.format, args.labels);
    const std::string kind = peek_model_kind(args.model_file);
    std::ifstream in(args.model_file);
    if (!in) throw std::runtime_error("cannot open '" + args.model_file + "'");

    Prediction pred;
    if (kind == "msdn") {
        MsdnModel model = load_msdn(in);
        pred = predict_msdn(model, ds.x, args.threshold);
    } else if (kind == "br") {
        pred = br_predict(load_br(in), ds.x, args.threshold);
    } else if (kind == "cc") {
        pred = cc_predict(load_chain(in), ds.x, args.threshold).prediction;
    } else if (kind == "pcc") {
        pred = pcc_predict(load_chain(in), ds.x, args.pcc_dmax).prediction;
    } else if (kind == "sta") {
        pred = sta_predict(load_sta(in), ds.x, args.threshold);
    } else {
        throw std::runtime_error("model kind '" + kind + "' not recognized");
    }

    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot write '" + args.out + "'");
    for (std::size_t c = 0; c < ds.labels(); ++c) out << (c ? "," : "") << "p_" << ds.label_names[c];
    for (std::size_t c = 0; c < ds.labels(); ++c) out << ",y_" << ds.label_names[c];
    out << "\n";
    for (std::size_t r = 0; r < pred.probabilities.rows(); ++r) {
        for (std::size_t c = 0; c < pred.probabilities.cols(); ++c)
            out << (c ? "," : "") << format_double(pred.probabilities(r, c));
        for (std::size_t c = 0; c < pred.labels.cols(); ++c)
            out << ',' << (pred.labels(r, c) == 1.0 ? '1' : '0');
        out << "\n";
    }
    std::cout << "predictions for " << pred.probabilities.rows() << " instances written to "
              << args.out << "\n";

    // When the file carries ground truth (it always does in our formats),
    // print the two benchmark metrics as a convenience.
    if (pred.labels.rows() > 0) {
        std::cout << "ema " << format_double(exact_match_accuracy(pred.labels, ds.y)) << "\n";
        std::cout << "micro_f1 " << format_double(micro_f1(pred.labels, ds.y)) << "\n";
    }
    return 0;
}

struct BenchmarkArgs {
    std::string config;
    std::string out_override, models_override, selection_override, reference_override;
    std::int64_t seed_override = -1;
    std::int64_t repeats_override = -1;
    std::int64_t jobs_override = -1;
    double budget_override = -1.0;
};

int cmd_benchmark(const BenchmarkArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args.config);
    if (!args.out_override.empty()) cfg.output_dir = args.out_override;
    if (!args.models_override.empty()) {
        cfg.models.clear();
        for (const auto& m : split(args.models_override, ','))
            cfg.models.push_back(std::string(trim(m)));
    }
    if (!args.selection_override.empty()) cfg.selection_metric = args.selection_override;
    if (!args.reference_override.empty()) cfg.reference_model = args.reference_override;
    if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    if (args.repeats_override >= 0) cfg.repeats = static_cast<std::size_t>(args.repeats_override);
    if (args.jobs_override >= 0) cfg.jobs = static_cast<std::size_t>(args.jobs_override);
    if (args.budget_override >= 0.0) cfg.budget_seconds = args.budget_override;

    const BenchmarkReport report = run_benchmark(cfg, std::cout);
    if (!report.failures.empty()) {
        std::cout << "\nfailures:\n";
        for (const auto& f : report.failures) std::cout << "  " << f << "\n";
        return 1;
    }
    return 0;
}

struct ParamsArgs {
    std::size_t m = 0, d = 0, h = 128, kernels = 128;
    std::string dataset;
};

int cmd_params(const ParamsArgs& args) {
    std::size_t m = args.m, d = args.d;
    if (!args.dataset.empty()) {
        const DatasetMeta* meta = registry_lookup(args.dataset);
        if (meta == nullptr)
            throw std::runtime_error("dataset '" + args.dataset + "' is not in the registry");
        m = meta->features;
        d = meta->labels;
    }
    if (m == 0 || d == 0) throw std::runtime_error("params: provide --m and --d (or --dataset)");
    const MsdnParamBreakdown b = msdn_param_breakdown(m, d, args.h, args.kernels);
    std::cout << "encoder (dense " << m << " -> " << args.h << "): " << b.dense << "\n";
    std::cout << "conv bank (" << args.kernels << " kernels, sizes 1.." << args.kernels
              << "): " << b.conv << "\n";
    std::cout << "decoder (dense " << args.kernels << " -> " << d << "): " << b.decoder << "\n";
    std::cout << "total: " << b.total << "\n";
    return 0;
}

struct SynthArgs {
    std::size_t n = 2000, m = 4, d = 4;
    double noise = 0.05;
    std::uint64_t seed = 42;
    std::string out = "synth_xor.mlc";
};

int cmd_synth(const SynthArgs& args) {
    const Dataset ds = synth_xor(args.n, args.m, args.d, args.noise, args.seed);
    save_dataset(ds, args.out);
    std::cout << "wrote " << ds.instances() << " x (" << ds.features() << " features + "
              << ds.labels() << " labels) to " << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlc: multi-label classification toolkit"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train one model on a dataset file");
    t->add_option("--data", train.data, "dataset file")->required();
    t->add_option("--format", train.format, "auto | canonical | arff")->capture_default_str();
    t->add_option("--labels", train.labels, "ARFF label count (trailing attributes)");
    t->add_option("--model", train.model, "msdn | br | cc | pcc | sta")->required();
    t->add_option("--out", train.out_dir, "output directory")->capture_default_str();
    t->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
    t->add_option("--hidden", train.hidden, "network hidden size")->capture_default_str();
    t->add_option("--kernels", train.kernels, "network kernel count")->capture_default_str();
    t->add_option("--batch", train.batch, "mini-batch size")->capture_default_str();
    t->add_option("--max-epochs", train.max_epochs, "network epoch cap")->capture_default_str();
    t->add_option("--patience", train.patience, "early-stopping patience")->capture_default_str();
    t->add_option("--val-fraction", train.val_fraction, "validation carve for early stopping")
        ->capture_default_str();
    t->add_option("--dropout", train.dropout, "network dropout rate")->capture_default_str();
    t->add_option("--lr", train.lr, "learning rate")->capture_default_str();
    t->add_option("--weight-decay", train.weight_decay, "L2 weight decay")->capture_default_str();
    t->add_option("--base-epochs", train.base_epochs, "baseline learner epochs")
        ->capture_default_str();
    t->add_option("--pcc-dmax", train.pcc_dmax, "label cap for exhaustive pcc")
        ->capture_default_str();
    t->add_option("--budget-seconds", train.budget_seconds, "wall-time cap per training run")
        ->capture_default_str();

    PredictArgs predict;
    auto* p = app.add_subcommand("predict", "Predict with a saved model");
    p->add_option("--model-file", predict.model_file, "saved .model file")->required();
    p->add_option("--data", predict.data, "dataset file")->required();
    p->add_option("--format", predict.format, "auto | canonical | arff")->capture_default_str();
    p->add_option("--labels", predict.labels, "ARFF label count");
    p->add_option("--out", predict.out, "output CSV")->capture_default_str();
    p->add_option("--threshold", predict.threshold, "decision threshold")->capture_default_str();
    p->add_option("--pcc-dmax", predict.pcc_dmax, "label cap for exhaustive pcc")
        ->capture_default_str();

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Run the full split/scale/grid/t-test protocol");
    b->add_option("--config", bench.config, "JSON experiment config")->required();
    b->add_option("--out", bench.out_override, "override output directory");
    b->add_option("--models", bench.models_override, "override model list (comma separated)");
    b->add_option("--seed", bench.seed_override, "override seed");
    b->add_option("--repeats", bench.repeats_override, "override repeat count");
    b->add_option("--jobs", bench.jobs_override, "grid-search worker threads");
    b->add_option("--budget-seconds", bench.budget_override, "per-run wall-time cap");
    b->add_option("--selection-metric", bench.selection_override, "ema | micro_f1");
    b->add_option("--reference", bench.reference_override, "reference model for t-tests");

    ParamsArgs params;
    auto* pa = app.add_subcommand("params", "Print the network parameter count");
    pa->add_option("--m", params.m, "input features");
    pa->add_option("--d", params.d, "labels");
    pa->add_option("--h", params.h, "hidden size")->capture_default_str();
    pa->add_option("--K", params.kernels, "kernel count")->capture_default_str();
    pa->add_option("--dataset", params.dataset, "registry dataset name (sets --m/--d)");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate the synthetic chain-dependence dataset");
    s->add_option("--n", synth.n, "instances")->capture_default_str();
    s->add_option("--m", synth.m, "features")->capture_default_str();
    s->add_option("--d", synth.d, "labels")->capture_default_str();
    s->add_option("--noise", synth.noise, "label flip probability")->capture_default_str();
    s->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
    s->add_option("--out", synth.out, "output file (canonical format)")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_train(train);
        if (p->parsed()) return cmd_predict(predict);
        if (b->parsed()) return cmd_benchmark(bench);
        if (pa->parsed()) return cmd_params(params);
        if (s->parsed()) return cmd_synth(synth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

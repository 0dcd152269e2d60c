#include "mlc/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mlc/text.hpp"

namespace mlc {

namespace {

constexpr const char* kMagic = "mlc-model v1";

void write_array(std::ostream& out, const char* tag, std::span<const double> values) {
    out << tag;
    for (double v : values) out << ' ' << format_double(v);
    out << "\n";
}

[[noreturn]] void bad_model(const std::string& msg) {
    throw std::runtime_error("model file: " + msg);
}

std::string next_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) bad_model("unexpected end of file");
    return line;
}

std::vector<double> read_array(std::istream& in, const std::string& tag, std::size_t expected) {
    const std::string line = next_line(in);
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head != tag) bad_model("expected '" + tag + "' block, found '" + head + "'");
    std::vector<double> values;
    values.reserve(expected);
    std::string token;
    while (fields >> token) values.push_back(parse_double(token));
    if (values.size() != expected)
        bad_model("'" + tag + "' carries " + std::to_string(values.size()) +
                  " values, expected " + std::to_string(expected));
    return values;
}

// "key value" line with a required key.
std::string read_field(std::istream& in, const std::string& key) {
    const std::string line = next_line(in);
    std::istringstream fields(line);
    std::string head, value;
    fields >> head >> value;
    if (head != key) bad_model("expected field '" + key + "', found '" + head + "'");
    return value;
}

void expect_header(std::istream& in, const std::string& kind) {
    if (next_line(in) != kMagic) bad_model("missing 'mlc-model v1' header");
    const std::string k = read_field(in, "kind");
    if (k != kind) bad_model("kind '" + k + "', expected '" + kind + "'");
}

void write_dense(std::ostream& out, const char* name, const DenseLayer& layer) {
    out << "layer " << name << ' ' << layer.out_dim() << ' ' << layer.in_dim() << "\n";
    write_array(out, "weights", layer.weights().data());
    write_array(out, "bias", layer.bias());
}

void read_dense(std::istream& in, const char* name, DenseLayer& layer) {
    std::istringstream fields(next_line(in));
    std::string tag, got_name;
    std::size_t out_dim = 0, in_dim = 0;
    fields >> tag >> got_name >> out_dim >> in_dim;
    if (tag != "layer" || got_name != name)
        bad_model("expected 'layer " + std::string(name) + "'");
    if (out_dim != layer.out_dim() || in_dim != layer.in_dim())
        bad_model("layer '" + std::string(name) + "' has shape " + std::to_string(out_dim) +
                  "x" + std::to_string(in_dim) + ", config expects " +
                  std::to_string(layer.out_dim()) + "x" + std::to_string(layer.in_dim()));
    const auto w = read_array(in, "weights", layer.weights().size());
    const auto b = read_array(in, "bias", layer.bias().size());
    std::copy(w.begin(), w.end(), layer.weights().data().begin());
    layer.bias() = b;
}

void write_base(std::ostream& out, const LogisticBase& base) {
    out << "base features " << base.n_features() << " extra " << base.n_extra() << " cross "
        << (base.cross_terms() ? 1 : 0) << "\n";
    write_array(out, "weights", base.weights());
    out << "bias " << format_double(base.bias()) << "\n";
}

LogisticBase read_base(std::istream& in) {
    std::istringstream fields(next_line(in));
    std::string tag, f_kw, e_kw, c_kw;
    std::size_t n_features = 0, n_extra = 0;
    int cross = 0;
    fields >> tag >> f_kw >> n_features >> e_kw >> n_extra >> c_kw >> cross;
    if (tag != "base" || f_kw != "features" || e_kw != "extra" || c_kw != "cross")
        bad_model("expected a 'base features <m> extra <k> cross <0|1>' line");
    BaseLearnerConfig cfg;
    cfg.cross_terms = cross != 0;
    LogisticBase base(n_features, n_extra, cfg);
    const auto w = read_array(in, "weights", base.weight_size());
    base.weights() = w;
    base.bias() = parse_double(read_field(in, "bias"));
    return base;
}

}  // namespace

// ---------------------------------------------------------------------------
// MSDN
// ---------------------------------------------------------------------------

void save_msdn(const MsdnModel& model, std::ostream& out) {
    const MsdnConfig& cfg = model.config();
    out << kMagic << "\n";
    out << "kind msdn\n";
    out << "input_dim " << cfg.input_dim << "\n";
    out << "label_dim " << cfg.label_dim << "\n";
    out << "hidden_dim " << cfg.hidden_dim << "\n";
    out << "kernel_count " << cfg.kernel_count << "\n";
    out << "learning_rate " << format_double(cfg.learning_rate) << "\n";
    out << "dropout_rate " << format_double(cfg.dropout_rate) << "\n";
    out << "weight_decay " << format_double(cfg.weight_decay) << "\n";
    out << "batch_size " << cfg.batch_size << "\n";
    out << "max_epochs " << cfg.max_epochs << "\n";
    out << "patience " << cfg.patience << "\n";
    out << "validation_fraction " << format_double(cfg.validation_fraction) << "\n";
    out << "seed " << cfg.seed << "\n";
    write_dense(out, "dense", model.dense());
    for (const auto& k : model.kernels()) {
        out << "layer kernel " << k.size() << ' ' << k.stride() << "\n";
        write_array(out, "weights", k.kernel_weights());
        out << "bias " << format_double(k.bias()) << "\n";
    }
    write_dense(out, "decoder", model.decoder());
}

MsdnModel load_msdn(std::istream& in) {
    expect_header(in, "msdn");
    MsdnConfig cfg;
    cfg.input_dim = static_cast<std::size_t>(parse_int(read_field(in, "input_dim")));
    cfg.label_dim = static_cast<std::size_t>(parse_int(read_field(in, "label_dim")));
    cfg.hidden_dim = static_cast<std::size_t>(parse_int(read_field(in, "hidden_dim")));
    cfg.kernel_count = static_cast<std::size_t>(parse_int(read_field(in, "kernel_count")));
    cfg.learning_rate = parse_double(read_field(in, "learning_rate"));
    cfg.dropout_rate = parse_double(read_field(in, "dropout_rate"));
    cfg.weight_decay = parse_double(read_field(in, "weight_decay"));
    cfg.batch_size = static_cast<std::size_t>(parse_int(read_field(in, "batch_size")));
    cfg.max_epochs = static_cast<std::size_t>(parse_int(read_field(in, "max_epochs")));
    cfg.patience = static_cast<std::size_t>(parse_int(read_field(in, "patience")));
    cfg.validation_fraction = parse_double(read_field(in, "validation_fraction"));
    cfg.seed = static_cast<std::uint64_t>(parse_int(read_field(in, "seed")));

    MsdnModel model(cfg);
    read_dense(in, "dense", model.dense());
    for (auto& k : model.kernels()) {
        std::istringstream fields(next_line(in));
        std::string tag, name;
        std::size_t size = 0, stride = 0;
        fields >> tag >> name >> size >> stride;
        if (tag != "layer" || name != "kernel" || size != k.size() || stride != k.stride())
            bad_model("kernel block mismatch (expected size " + std::to_string(k.size()) + ")");
        const auto w = read_array(in, "weights", k.kernel_weights().size());
        k.kernel_weights() = w;
        k.bias() = parse_double(read_field(in, "bias"));
    }
    read_dense(in, "decoder", model.decoder());
    return model;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

void save_br(const BrModel& model, std::ostream& out) {
    out << kMagic << "\n";
    out << "kind br\n";
    out << "labels " << model.label_count() << "\n";
    for (const auto& base : model.models) write_base(out, base);
}

BrModel load_br(std::istream& in) {
    expect_header(in, "br");
    const std::size_t d = static_cast<std::size_t>(parse_int(read_field(in, "labels")));
    BrModel model;
    for (std::size_t j = 0; j < d; ++j) model.models.push_back(read_base(in));
    return model;
}

void save_chain(const ChainModel& model, std::ostream& out, const std::string& kind) {
    if (kind != "cc" && kind != "pcc") throw std::invalid_argument("save_chain: bad kind");
    out << kMagic << "\n";
    out << "kind " << kind << "\n";
    out << "labels " << model.label_count() << "\n";
    out << "order";
    for (std::size_t v : model.order) out << ' ' << v;
    out << "\n";
    for (const auto& base : model.models) write_base(out, base);
}

ChainModel load_chain(std::istream& in) {
    if (next_line(in) != kMagic) bad_model("missing 'mlc-model v1' header");
    const std::string kind = read_field(in, "kind");
    if (kind != "cc" && kind != "pcc") bad_model("kind '" + kind + "' is not a chain model");
    const std::size_t d = static_cast<std::size_t>(parse_int(read_field(in, "labels")));
    ChainModel model;
    {
        std::istringstream fields(next_line(in));
        std::string tag;
        fields >> tag;
        if (tag != "order") bad_model("expected 'order' line");
        std::size_t v = 0;
        while (fields >> v) model.order.push_back(v);
        if (model.order.size() != d) bad_model("order length mismatch");
    }
    for (std::size_t j = 0; j < d; ++j) model.models.push_back(read_base(in));
    return model;
}

void save_sta(const StackModel& model, std::ostream& out) {
    out << kMagic << "\n";
    out << "kind sta\n";
    out << "labels " << model.label_count() << "\n";
    for (const auto& base : model.level1) write_base(out, base);
    for (const auto& base : model.level2) write_base(out, base);
}

StackModel load_sta(std::istream& in) {
    expect_header(in, "sta");
    const std::size_t d = static_cast<std::size_t>(parse_int(read_field(in, "labels")));
    StackModel model;
    for (std::size_t j = 0; j < d; ++j) model.level1.push_back(read_base(in));
    for (std::size_t j = 0; j < d; ++j) model.level2.push_back(read_base(in));
    return model;
}

std::string peek_model_kind(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    if (next_line(in) != kMagic) bad_model("missing 'mlc-model v1' header in " + path.string());
    return read_field(in, "kind");
}

}  // namespace mlc

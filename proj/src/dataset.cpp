#include "mlc/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mlc/rng.hpp"
#include "mlc/text.hpp"

namespace mlc {

void Dataset::validate() const {
    if (instances() == 0 || features() == 0 || labels() == 0)
        throw std::invalid_argument("Dataset '" + name + "': N, m, d must all be >= 1");
    if (y.rows() != x.rows())
        throw std::invalid_argument("Dataset '" + name + "': feature/label row mismatch");
    if (!x.all_finite())
        throw std::invalid_argument("Dataset '" + name + "': non-finite feature value");
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = 0; c < y.cols(); ++c)
            if (y(r, c) != 0.0 && y(r, c) != 1.0)
                throw std::invalid_argument("Dataset '" + name + "': non-binary label at row " +
                                            std::to_string(r) + ", label column " +
                                            std::to_string(c));
    if (feature_names.size() != features() || label_names.size() != labels())
        throw std::invalid_argument("Dataset '" + name + "': name list length mismatch");
}

std::span<const DatasetMeta> dataset_registry() {
    static const std::array<DatasetMeta, 5> registry{{
        {"Scene", 2408, 294, 6, "image"},
        {"Yeast", 2417, 103, 14, "biology"},
        {"Business", 11214, 21950, 30, "text"},
        {"Science", 6428, 37230, 40, "text"},
        {"TMC2007_500", 28596, 500, 22, "text"},
    }};
    return registry;
}

const DatasetMeta* registry_lookup(const std::string& name) {
    const std::string key = lower(name);
    for (const auto& meta : dataset_registry())
        if (lower(meta.name) == key) return &meta;
    return nullptr;
}

namespace {

void check_against_registry(const Dataset& ds, std::vector<std::string>* warnings) {
    if (warnings == nullptr) return;
    const DatasetMeta* meta = registry_lookup(ds.name);
    if (meta == nullptr) return;
    auto complain = [&](const char* what, std::size_t got, std::size_t want) {
        if (got != want)
            warnings->push_back("dataset '" + ds.name + "': " + what + " " +
                                std::to_string(got) + " differs from the published " +
                                std::to_string(want));
    };
    complain("instance count", ds.instances(), meta->instances);
    complain("feature count", ds.features(), meta->features);
    complain("label count", ds.labels(), meta->labels);
}

[[noreturn]] void parse_fail(const std::string& where, std::size_t line_no,
                             const std::string& msg) {
    throw std::runtime_error(where + ":" + std::to_string(line_no) + ": " + msg);
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Canonical format
//
//   #mlc v1 N=<int> m=<int> d=<int>
//   <m comma-separated feature names>
//   <d comma-separated label names>
//   <N rows of m floats + d binary labels, comma-separated>
// ---------------------------------------------------------------------------

void write_canonical(const Dataset& ds, std::ostream& out) {
    out << "#mlc v1 N=" << ds.instances() << " m=" << ds.features() << " d=" << ds.labels()
        << "\n";
    out << join(ds.feature_names, ',') << "\n";
    out << join(ds.label_names, ',') << "\n";
    for (std::size_t r = 0; r < ds.instances(); ++r) {
        for (std::size_t c = 0; c < ds.features(); ++c) {
            if (c) out << ',';
            out << format_double(ds.x(r, c));
        }
        for (std::size_t c = 0; c < ds.labels(); ++c)
            out << ',' << (ds.y(r, c) == 1.0 ? '1' : '0');
        out << "\n";
    }
}

Dataset read_canonical(std::istream& in, const std::string& display_name) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) parse_fail(display_name, 1, "empty file");
    ++line_no;
    std::size_t n = 0, m = 0, d = 0;
    {
        std::istringstream header(line);
        std::string magic, version, nf, mf, df;
        header >> magic >> version >> nf >> mf >> df;
        if (magic != "#mlc" || version != "v1" || nf.rfind("N=", 0) != 0 ||
            mf.rfind("m=", 0) != 0 || df.rfind("d=", 0) != 0)
            parse_fail(display_name, line_no,
                       "bad header, expected '#mlc v1 N=<int> m=<int> d=<int>'");
        try {
            n = static_cast<std::size_t>(parse_int(nf.substr(2)));
            m = static_cast<std::size_t>(parse_int(mf.substr(2)));
            d = static_cast<std::size_t>(parse_int(df.substr(2)));
        } catch (const std::exception& e) {
            parse_fail(display_name, line_no, e.what());
        }
    }

    Dataset ds;
    ds.name = display_name;
    if (!std::getline(in, line)) parse_fail(display_name, 2, "missing feature-name line");
    ++line_no;
    ds.feature_names = split(line, ',');
    if (ds.feature_names.size() != m)
        parse_fail(display_name, line_no,
                   "expected " + std::to_string(m) + " feature names, got " +
                       std::to_string(ds.feature_names.size()));
    if (!std::getline(in, line)) parse_fail(display_name, 3, "missing label-name line");
    ++line_no;
    ds.label_names = split(line, ',');
    if (ds.label_names.size() != d)
        parse_fail(display_name, line_no,
                   "expected " + std::to_string(d) + " label names, got " +
                       std::to_string(ds.label_names.size()));

    ds.x = Matrix(n, m);
    ds.y = Matrix(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        if (!std::getline(in, line))
            parse_fail(display_name, line_no + 1,
                       "expected " + std::to_string(n) + " data rows, got " + std::to_string(r));
        ++line_no;
        const auto fields = split(line, ',');
        if (fields.size() != m + d)
            parse_fail(display_name, line_no,
                       "expected " + std::to_string(m + d) + " fields, got " +
                           std::to_string(fields.size()));
        try {
            for (std::size_t c = 0; c < m; ++c) ds.x(r, c) = parse_double(fields[c]);
        } catch (const std::exception& e) {
            parse_fail(display_name, line_no, e.what());
        }
        for (std::size_t c = 0; c < d; ++c) {
            const auto tok = trim(fields[m + c]);
            if (tok == "0")
                ds.y(r, c) = 0.0;
            else if (tok == "1")
                ds.y(r, c) = 1.0;
            else
                parse_fail(display_name, line_no,
                           "label value '" + std::string(tok) + "' at row " + std::to_string(r) +
                               ", label column " + std::to_string(c) + " is not 0/1");
        }
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// ARFF subset: numeric feature attributes, {0,1} nominal labels, dense @data.
// ---------------------------------------------------------------------------

namespace {

// "-C n" inside the @relation line (MEKA convention): n > 0 leading labels,
// n < 0 trailing |n| labels.
long long meka_label_count(const std::string& relation) {
    const std::size_t pos = relation.find("-C");
    if (pos == std::string::npos) return 0;
    std::istringstream rest(relation.substr(pos + 2));
    long long n = 0;
    rest >> n;
    return n;
}

struct ArffAttribute {
    std::string name;
    bool nominal01 = false;  // declared {0,1}
};

bool parse_attribute(const std::string& body, std::size_t line_no, const std::string& where,
                     ArffAttribute& out) {
    // body is everything after "@attribute"
    std::string_view rest = trim(body);
    if (rest.empty()) parse_fail(where, line_no, "@attribute without a name");
    std::string name;
    if (rest.front() == '\'' || rest.front() == '"') {
        const char quote = rest.front();
        const std::size_t end = rest.find(quote, 1);
        if (end == std::string_view::npos)
            parse_fail(where, line_no, "unterminated quoted attribute name");
        name = std::string(rest.substr(1, end - 1));
        rest = trim(rest.substr(end + 1));
    } else {
        const std::size_t end = rest.find_first_of(" \t");
        if (end == std::string_view::npos)
            parse_fail(where, line_no, "@attribute missing a type");
        name = std::string(rest.substr(0, end));
        rest = trim(rest.substr(end));
    }
    out.name = name;
    const std::string type = lower(rest);
    if (type == "numeric" || type == "real" || type == "integer") {
        out.nominal01 = false;
        return true;
    }
    if (!rest.empty() && rest.front() == '{') {
        const std::size_t close = rest.find('}');
        if (close == std::string_view::npos)
            parse_fail(where, line_no, "unterminated nominal value list");
        const auto values = split(rest.substr(1, close - 1), ',');
        bool saw0 = false, saw1 = false;
        for (const auto& v : values) {
            const auto t = trim(v);
            if (t == "0")
                saw0 = true;
            else if (t == "1")
                saw1 = true;
            else
                return false;  // nominal but not {0,1}
        }
        out.nominal01 = saw0 && saw1;
        return out.nominal01;
    }
    return false;
}

Dataset read_arff(std::istream& in, const std::string& display_name,
                  const std::filesystem::path& path, std::size_t label_count_opt) {
    std::string line;
    std::size_t line_no = 0;
    std::string relation;
    std::vector<ArffAttribute> attrs;
    std::vector<std::vector<double>> rows;
    bool in_data = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '%') continue;
        if (!in_data) {
            const std::string low = lower(t.substr(0, t.find_first_of(" \t")));
            if (low == "@relation") {
                relation = std::string(trim(t.substr(9)));
            } else if (low == "@attribute") {
                ArffAttribute attr;
                if (!parse_attribute(std::string(t.substr(10)), line_no, display_name, attr))
                    parse_fail(display_name, line_no,
                               "unsupported attribute type (numeric and {0,1} nominal only)");
                attrs.push_back(std::move(attr));
            } else if (low == "@data") {
                in_data = true;
            } else {
                parse_fail(display_name, line_no, "unrecognized header line");
            }
            continue;
        }
        if (t.front() == '{')
            parse_fail(display_name, line_no, "sparse ARFF rows are not supported");
        const auto fields = split(t, ',');
        if (fields.size() != attrs.size())
            parse_fail(display_name, line_no,
                       "expected " + std::to_string(attrs.size()) + " fields, got " +
                           std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        try {
            for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_double(fields[c]);
        } catch (const std::exception& e) {
            parse_fail(display_name, line_no, e.what());
        }
        rows.push_back(std::move(row));
    }
    if (!in_data) parse_fail(display_name, line_no, "no @data section");
    if (rows.empty()) parse_fail(display_name, line_no, "no data rows");

    // Where do the labels sit?
    std::size_t d = label_count_opt;
    bool leading = false;
    if (d == 0) {
        const auto sidecar = std::filesystem::path(path.string() + ".labels");
        if (std::filesystem::exists(sidecar)) {
            std::ifstream sf(sidecar);
            long long v = 0;
            sf >> v;
            if (!sf || v <= 0)
                throw std::runtime_error(sidecar.string() + ": expected a positive label count");
            d = static_cast<std::size_t>(v);
        } else if (const long long meka = meka_label_count(relation); meka != 0) {
            leading = meka > 0;
            d = static_cast<std::size_t>(meka > 0 ? meka : -meka);
        } else {
            throw std::runtime_error(display_name +
                                     ": label count unknown; pass --labels, add a '" +
                                     path.filename().string() + ".labels' sidecar, or use a "
                                     "'-C n' marker in @relation");
        }
    }
    if (d == 0 || d >= attrs.size())
        throw std::runtime_error(display_name + ": label count " + std::to_string(d) +
                                 " leaves no features (file has " +
                                 std::to_string(attrs.size()) + " attributes)");

    const std::size_t m = attrs.size() - d;
    const std::size_t feat_off = leading ? d : 0;
    const std::size_t label_off = leading ? 0 : m;

    Dataset ds;
    ds.name = display_name;
    ds.x = Matrix(rows.size(), m);
    ds.y = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < m; ++c) ds.x(r, c) = rows[r][feat_off + c];
        for (std::size_t c = 0; c < d; ++c) {
            const double v = rows[r][label_off + c];
            if (v != 0.0 && v != 1.0)
                throw std::runtime_error(display_name + ": label value " + format_double(v) +
                                         " at row " + std::to_string(r) + ", label column " +
                                         std::to_string(c) + " is not 0/1");
            ds.y(r, c) = v;
        }
    }
    for (std::size_t c = 0; c < m; ++c) ds.feature_names.push_back(attrs[feat_off + c].name);
    for (std::size_t c = 0; c < d; ++c) ds.label_names.push_back(attrs[label_off + c].name);
    ds.validate();
    return ds;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
    DataFormat fmt = options.format;
    if (fmt == DataFormat::Auto)
        fmt = lower(path.extension().string()) == ".arff" ? DataFormat::Arff
                                                          : DataFormat::Canonical;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    const std::string display_name = path.stem().string();
    Dataset ds = fmt == DataFormat::Arff
                     ? read_arff(in, display_name, path, options.label_count)
                     : read_canonical(in, display_name);
    check_against_registry(ds, options.warnings);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_canonical(ds, out);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

std::vector<SplitPlan> make_splits(std::size_t n_instances, std::uint64_t seed,
                                   std::size_t repeats, double train_fraction) {
    if (n_instances < 4)
        throw std::invalid_argument("make_splits: need at least 4 instances");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("make_splits: train_fraction outside (0,1)");
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n_instances)));
    n_train = std::min(std::max<std::size_t>(n_train, 1), n_instances - 1);

    std::vector<SplitPlan> plans;
    plans.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        Rng rng = Rng::derive(seed, r);
        const auto perm = rng.permutation(n_instances);
        SplitPlan plan;
        plan.seed = seed;
        plan.repeat = r;
        plan.train.assign(perm.begin(), perm.begin() + n_train);
        plan.test.assign(perm.begin() + n_train, perm.end());
        std::sort(plan.train.begin(), plan.train.end());
        std::sort(plan.test.begin(), plan.test.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

Scaler fit_scaler(const Matrix& x, std::span<const std::size_t> train_indices) {
    if (train_indices.empty())
        throw std::invalid_argument("fit_scaler: empty training index set");
    Scaler s;
    s.min.assign(x.cols(), std::numeric_limits<double>::infinity());
    s.max.assign(x.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t idx : train_indices) {
        const auto row = x.row(idx);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            s.min[c] = std::min(s.min[c], row[c]);
            s.max[c] = std::max(s.max[c], row[c]);
        }
    }
    return s;
}

Matrix apply_scaler(const Scaler& scaler, const Matrix& x) {
    if (scaler.min.size() != x.cols())
        throw std::invalid_argument("apply_scaler: scaler fit on " +
                                    std::to_string(scaler.min.size()) + " features, data has " +
                                    std::to_string(x.cols()));
    Matrix out(x.rows(), x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        const double range = scaler.max[c] - scaler.min[c];
        for (std::size_t r = 0; r < x.rows(); ++r)
            out(r, c) = range == 0.0 ? 0.0 : (x(r, c) - scaler.min[c]) / range;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

Dataset synth_xor(std::size_t n, std::size_t m, std::size_t d, double noise,
                  std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("synth_xor: need d >= 2");
    if (m < d)
        throw std::invalid_argument("synth_xor: need m >= d (label j thresholds feature j)");
    if (n == 0) throw std::invalid_argument("synth_xor: need n >= 1");
    if (noise < 0.0 || noise > 1.0)
        throw std::invalid_argument("synth_xor: noise outside [0,1]");

    Rng feature_rng = Rng::derive(seed, 1);
    Rng flip_rng = Rng::derive(seed, 2);

    Dataset ds;
    ds.name = "synth_xor";
    ds.domain = "synthetic";
    ds.x = Matrix(n, m);
    ds.y = Matrix(n, d);
    for (double& v : ds.x.data()) v = feature_rng.uniform();
    for (std::size_t r = 0; r < n; ++r) {
        double prev = ds.x(r, 0) > 0.5 ? 1.0 : 0.0;
        ds.y(r, 0) = prev;
        for (std::size_t j = 1; j < d; ++j) {
            const double bit = ds.x(r, j) > 0.5 ? 1.0 : 0.0;
            prev = prev != bit ? 1.0 : 0.0;  // XOR
            ds.y(r, j) = prev;
        }
        for (std::size_t j = 0; j < d; ++j)
            if (flip_rng.uniform() < noise) ds.y(r, j) = 1.0 - ds.y(r, j);
    }
    for (std::size_t c = 0; c < m; ++c) ds.feature_names.push_back("x" + std::to_string(c));
    for (std::size_t c = 0; c < d; ++c) ds.label_names.push_back("y" + std::to_string(c));
    return ds;
}

}  // namespace mlc

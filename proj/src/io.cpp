#include "rtlab/io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rtlab/errors.hpp"

namespace rtlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const char* what) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw DataError(std::string("bad ") + what + ": '" + text + "'");
    }
    return v;
}

long parse_long(const std::string& text, const char* what) {
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw DataError(std::string("bad ") + what + ": '" + text + "'");
    }
    return v;
}

void write_header(std::ostream& out, const char* kind, const Provenance& prov) {
    out << "# rtlab " << kind << "\n";
    out << "# format_version: " << kFormatVersion << "\n";
    out << "# tool_version: " << kToolVersion << "\n";
    out << "# invocation: " << prov.command << "\n";
    out << "# seed: " << prov.seed.value << "\n";
}

// "# key: value" comment lines, collected until the first data line.
struct CommentBlock {
    std::map<std::string, std::string> fields;
    std::string first_data_line;
    bool has_data = false;
};

CommentBlock read_comments(std::istream& in) {
    CommentBlock block;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] != '#') {
            block.first_data_line = line;
            block.has_data = true;
            break;
        }
        auto colon = line.find(':');
        if (colon != std::string::npos) block.fields[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
    }
    return block;
}

void check_version(const CommentBlock& block) {
    auto it = block.fields.find("format_version");
    if (it != block.fields.end() && parse_long(it->second, "format version") != kFormatVersion) {
        throw DataError("unsupported format version " + it->second);
    }
}

const char* mode_name(ExperimentMode m) { return m == ExperimentMode::SingleInstance ? "single" : "multi"; }

ExperimentMode parse_mode(const std::string& s) {
    if (s == "single") return ExperimentMode::SingleInstance;
    if (s == "multi") return ExperimentMode::MultiInstance;
    throw DataError("unknown experiment mode '" + s + "'");
}

}  // namespace

// ---- instances -------------------------------------------------------------

void write_instance(std::ostream& out, const PartialLatinSquare& square) {
    const int n = square.order();
    out << n << "\n";
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c) out << ' ';
            const auto& v = square.at(r, c);
            if (v) out << *v; else out << '.';
        }
        out << "\n";
    }
}

void write_instance(std::ostream& out, const PartialLatinSquare& square, const Provenance& prov) {
    write_header(out, "instance", prov);
    write_instance(out, square);
}

PartialLatinSquare read_instance(std::istream& raw) {
    // '#' lines carry provenance and are not part of the grid.
    std::string text, line;
    while (std::getline(raw, line)) {
        auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') continue;
        text += line;
        text += '\n';
    }
    std::istringstream in(text);
    std::string token;
    if (!(in >> token)) throw DataError("instance file is empty");
    long n = parse_long(token, "order");
    if (n < 1 || n > kMaxOrder) throw DataError("instance order out of range: " + token);
    std::vector<std::vector<Cell>> rows(n, std::vector<Cell>(n));
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            if (!(in >> token)) throw DataError("instance file ends early");
            if (token != ".") rows[r][c] = static_cast<int>(parse_long(token, "symbol"));
        }
    }
    if (in >> token) throw DataError("trailing data after instance grid");
    return PartialLatinSquare::from_rows(rows);
}

// ---- datasets --------------------------------------------------------------

std::optional<InstrumentOptions> infer_instrument_options(const std::vector<std::string>& columns) {
    for (bool split_var : {false, true}) {
        for (bool second : {false, true}) {
            InstrumentOptions opts{split_var, second};
            if (FeatureRegistry::standard(opts).column_names() == columns) return opts;
        }
    }
    return std::nullopt;
}

void write_dataset(std::ostream& out, const LabeledDataset& data, const Provenance& prov) {
    write_header(out, "dataset", prov);
    out << "# mode: " << mode_name(data.mode) << "\n";
    out << "# horizon: " << data.horizon << "\n";
    out << "# median: " << format_double(data.median) << "\n";
    out << "# rows: " << data.rows.size() << "\n";
    for (const auto& name : data.columns) out << name << ',';
    out << "runtime,label,censored,divisor\n";
    for (const auto& row : data.rows) {
        if (row.x.values.size() != data.columns.size()) throw DataError("row width does not match the column list");
        for (double v : row.x.values) out << format_double(v) << ',';
        out << row.runtime << ',' << (row.label == RunLabel::Short ? "SHORT" : "LONG") << ','
            << (row.x.censored ? 1 : 0) << ',' << format_double(row.x.divisor) << "\n";
    }
}

LabeledDataset read_dataset(std::istream& in) {
    auto block = read_comments(in);
    check_version(block);
    if (!block.has_data) throw DataError("dataset has no header row");
    auto header = split(block.first_data_line, ',');
    if (header.size() < 5) throw DataError("dataset header is too short");
    const std::vector<std::string> tail{"runtime", "label", "censored", "divisor"};
    if (!std::equal(tail.begin(), tail.end(), header.end() - 4)) {
        throw DataError("dataset header must end with runtime,label,censored,divisor");
    }
    LabeledDataset data;
    data.columns.assign(header.begin(), header.end() - 4);
    if (!infer_instrument_options(data.columns)) {
        throw DataError("dataset columns do not match the feature registry");
    }
    if (auto it = block.fields.find("mode"); it != block.fields.end()) data.mode = parse_mode(it->second);
    if (auto it = block.fields.find("horizon"); it != block.fields.end()) {
        data.horizon = static_cast<int>(parse_long(it->second, "horizon"));
    }
    if (auto it = block.fields.find("median"); it != block.fields.end()) data.median = parse_double(it->second, "median");

    const std::size_t width = header.size();
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != width) {
            throw DataError("dataset row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(width));
        }
        DatasetRow row;
        const std::size_t d = data.columns.size();
        row.x.values.reserve(d);
        for (std::size_t i = 0; i < d; ++i) row.x.values.push_back(parse_double(fields[i], "feature value"));
        row.runtime = parse_long(fields[d], "runtime");
        if (fields[d + 1] == "SHORT") row.label = RunLabel::Short;
        else if (fields[d + 1] == "LONG") row.label = RunLabel::Long;
        else throw DataError("bad label '" + fields[d + 1] + "'");
        if (fields[d + 2] != "0" && fields[d + 2] != "1") throw DataError("bad censored flag '" + fields[d + 2] + "'");
        row.x.censored = fields[d + 2] == "1";
        row.x.divisor = parse_double(fields[d + 3], "divisor");
        data.rows.push_back(std::move(row));
    }
    return data;
}

// ---- run-time distributions ------------------------------------------------

void write_rtd(std::ostream& out, const EmpiricalRTD& rtd, const Provenance& prov) {
    write_header(out, "rtd", prov);
    out << "# runs: " << rtd.size() << "\n";
    out << "# unsolved: " << rtd.unsolved() << "\n";
    for (long t : rtd.lengths()) out << t << "\n";
    for (std::size_t i = 0; i < rtd.unsolved(); ++i) out << "inf\n";
}

EmpiricalRTD read_rtd(std::istream& in) {
    auto block = read_comments(in);
    check_version(block);
    std::vector<long> lengths;
    std::size_t unsolved = 0;
    auto take = [&](std::string line) {
        line = trim(line);
        if (line.empty() || line[0] == '#') return;
        if (line == "inf") {
            ++unsolved;
            return;
        }
        if (unsolved) throw DataError("rtd lists a finite length after an unfinished run");
        long t = parse_long(line, "run length");
        if (t < 0) throw DataError("negative run length in rtd");
        if (!lengths.empty() && t < lengths.back()) throw DataError("rtd lengths must be ascending");
        lengths.push_back(t);
    };
    if (block.has_data) take(block.first_data_line);
    std::string line;
    while (std::getline(in, line)) take(line);
    if (lengths.empty() && unsolved == 0) throw DataError("rtd file has no runs");
    return EmpiricalRTD(std::move(lengths), unsolved);
}

// ---- models ----------------------------------------------------------------

namespace {

nlohmann::ordered_json node_json(const ModelFile& m, int index) {
    const auto& node = m.tree.nodes()[index];
    nlohmann::ordered_json j;
    if (!node.is_leaf()) {
        j["feature"] = m.columns.at(node.feature);
        j["threshold"] = node.threshold;
    }
    j["n_short"] = node.n_short;
    j["n_long"] = node.n_long;
    if (!node.is_leaf()) {
        j["left"] = node_json(m, node.left);
        j["right"] = node_json(m, node.right);
    }
    return j;
}

int node_from_json(const nlohmann::ordered_json& j, const std::vector<std::string>& columns,
                   std::vector<TreeNode>& nodes, int depth) {
    if (depth > 10000) throw DataError("model tree is too deep");
    if (!j.is_object()) throw DataError("model node must be an object");
    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    TreeNode node;
    node.n_short = j.at("n_short").get<long>();
    node.n_long = j.at("n_long").get<long>();
    if (j.contains("feature")) {
        auto name = j.at("feature").get<std::string>();
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw DataError("model uses unknown feature '" + name + "'");
        node.feature = static_cast<int>(it - columns.begin());
        node.threshold = j.at("threshold").get<double>();
        node.left = node_from_json(j.at("left"), columns, nodes, depth + 1);
        node.right = node_from_json(j.at("right"), columns, nodes, depth + 1);
    }
    nodes[index] = node;
    return index;
}

}  // namespace

nlohmann::ordered_json provenance_json(const Provenance& prov) {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["invocation"] = prov.command;
    j["seed"] = prov.seed.value;
    return j;
}

nlohmann::ordered_json model_to_json(const ModelFile& model) {
    nlohmann::ordered_json j;
    j["kind"] = "rtlab-model";
    j["kappa"] = model.kappa;
    j["training_median"] = model.training_median;
    j["horizon"] = model.horizon;
    j["mode"] = mode_name(model.mode);
    j["registry_hash"] = hex64(model.schema_hash);
    j["leaves"] = model.tree.leaf_count();
    j["tree"] = node_json(model, 0);
    return j;
}

ModelFile model_from_json(const nlohmann::ordered_json& j) {
    try {
        if (j.value("kind", "") != "rtlab-model") throw DataError("not a model file");
        ModelFile m;
        m.kappa = j.at("kappa").get<double>();
        m.training_median = j.at("training_median").get<double>();
        m.horizon = j.at("horizon").get<int>();
        m.mode = parse_mode(j.at("mode").get<std::string>());
        const auto hash = j.at("registry_hash").get<std::string>();
        // The hash identifies which registry layout the feature names refer to.
        for (bool split_var : {false, true}) {
            for (bool second : {false, true}) {
                auto reg = FeatureRegistry::standard({split_var, second});
                if (hex64(reg.schema_hash()) == hash) {
                    m.columns = reg.column_names();
                    m.schema_hash = reg.schema_hash();
                }
            }
        }
        if (m.columns.empty()) throw DataError("model registry hash " + hash + " does not match any known schema");
        std::vector<TreeNode> nodes;
        node_from_json(j.at("tree"), m.columns, nodes, 0);
        m.tree = DecisionTreeModel(std::move(nodes));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

nlohmann::ordered_json report_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["average_log_score"] = r.average_log_score;
    j["test_size"] = r.size;
    j["confusion"] = {{"short_as_short", r.short_as_short},
                      {"short_as_long", r.short_as_long},
                      {"long_as_short", r.long_as_short},
                      {"long_as_long", r.long_as_long}};
    return j;
}

// ---- files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        out << text;
        if (!out) throw DataError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace rtlab

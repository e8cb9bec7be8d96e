#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtlab/dataset.hpp"
#include "rtlab/latin_square.hpp"
#include "rtlab/learn.hpp"
#include "rtlab/policy.hpp"

namespace rtlab {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

/// Reproducibility header embedded in every output file.
struct Provenance {
    std::string command;     // verb plus canonical parameters
    Seed seed;
};

// ---- instances -------------------------------------------------------------

/// Line 1 holds the order; then n lines of n tokens, "." for a hole.
/// Lines starting with '#' are comments; the overload with provenance writes
/// the reproducibility header that way.
void write_instance(std::ostream& out, const PartialLatinSquare& square);
void write_instance(std::ostream& out, const PartialLatinSquare& square, const Provenance& prov);
/// Throws DataError on malformed text and StructuralError on bad symbols.
PartialLatinSquare read_instance(std::istream& in);

// ---- datasets --------------------------------------------------------------

void write_dataset(std::ostream& out, const LabeledDataset& data, const Provenance& prov);
/// Parses a dataset file and checks its columns against the feature
/// registry. Throws DataError on any mismatch or malformed row.
LabeledDataset read_dataset(std::istream& in);

/// Registry options whose column list matches the given names, if any.
std::optional<InstrumentOptions> infer_instrument_options(const std::vector<std::string>& columns);

// ---- run-time distributions ------------------------------------------------

/// Ascending solved lengths, then one "inf" line per unfinished run.
void write_rtd(std::ostream& out, const EmpiricalRTD& rtd, const Provenance& prov);
EmpiricalRTD read_rtd(std::istream& in);

// ---- models ----------------------------------------------------------------

struct ModelFile {
    DecisionTreeModel tree;
    std::vector<std::string> columns;
    double kappa = 1;
    double training_median = 0;
    int horizon = 0;
    ExperimentMode mode = ExperimentMode::SingleInstance;
    std::uint64_t schema_hash = 0;
};

nlohmann::ordered_json model_to_json(const ModelFile& model);
/// Throws DataError for an unknown feature name, a schema-hash mismatch or a
/// malformed node.
ModelFile model_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json provenance_json(const Provenance& prov);
nlohmann::ordered_json report_json(const EvaluationReport& report);

// ---- files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for a single writer: a temp file renamed into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string format_double(double v);
std::string hex64(std::uint64_t v);

}  // namespace rtlab

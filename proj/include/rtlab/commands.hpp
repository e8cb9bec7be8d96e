#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtlab/experiment.hpp"
#include "rtlab/io.hpp"

namespace rtlab {

// Each command reads and writes files and returns the JSON report it wrote
// (or would print). The CLI is a thin flag parser over these.

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct DatasetCommand {
    ExperimentSpec spec;
    bool peak_search = false;
    std::size_t peak_probe_runs = 100;
    double peak_ratio = 10.0;
    long peak_probe_cutoff = 100000;
    fs::path out_dir;
    Provenance prov;
};

/// Writes train.csv, test.csv, rtd.txt, censoring.json and (SINGLE mode)
/// instance.txt into out_dir.
Json dataset_command(const DatasetCommand& cmd);

struct TrainCommand {
    fs::path train;
    std::vector<double> kappa_grid = default_kappa_grid();
    Seed seed{1};
    fs::path model_out;
    std::optional<fs::path> report_out;
    Provenance prov;
};
Json train_command(const TrainCommand& cmd);

struct EvalCommand {
    fs::path model;
    fs::path test;
    std::optional<fs::path> report_out;
    Provenance prov;
};
/// The model and the marginal baseline from the model's training counts, side by side.
Json eval_command(const EvalCommand& cmd);

struct CascadeCommand {
    fs::path train;
    std::optional<fs::path> test;
    std::vector<long> thresholds;
    std::vector<double> kappa_grid = default_kappa_grid();
    std::size_t min_size = 50;
    Seed seed{1};
    fs::path out_dir;
    Provenance prov;
};
Json cascade_command(const CascadeCommand& cmd);

/// One --policy argument. "dynamic:O" without L asks for a scan over L.
struct PolicySpec {
    std::string text;
    RestartPolicy policy;
    bool scan_limit = false;
};
/// Parses fixed:C, luby:S, dynamic:O,L (L may be "inf") or dynamic:O.
/// Throws std::invalid_argument on bad syntax or values.
PolicySpec parse_policy_spec(const std::string& text);

struct PolicyCommand {
    fs::path rtd;
    std::vector<PolicySpec> policies;
    std::optional<double> accuracy;
    std::optional<fs::path> model;      // live prediction from a trained tree
    std::optional<fs::path> dataset;    // rows the model predictor resamples
    SimulationOptions sim;
    std::optional<fs::path> report_out;
    Provenance prov;
};

struct PolicyOutcome {
    Json report;
    bool unbounded = false;  // some requested policy cannot succeed
};
PolicyOutcome policy_command(const PolicyCommand& cmd);

/// Summary of an RTD, dataset or model file, detected from its contents.
Json report_command(const fs::path& path);

/// Human-readable table of a policy report.
std::string format_policy_table(const Json& report);

}  // namespace rtlab

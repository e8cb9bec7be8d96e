#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rtlab/dataset.hpp"
#include "rtlab/latin_square.hpp"
#include "rtlab/policy.hpp"
#include "rtlab/solver.hpp"

namespace rtlab {

struct ExperimentSpec {
    ExperimentMode mode = ExperimentMode::SingleInstance;
    int order = 18;
    HoleSpec holes = HoleSpec::balanced(8);
    std::optional<PartialLatinSquare> instance;  // SINGLE only; generated from the seed when absent
    std::size_t train_runs = 1000;
    std::size_t test_runs = 300;
    SolverConfig solver;                         // horizon, cutoff, propagation, instrument options
    Seed seed{1};
    int threads = 1;
};

/// Where the launched runs went. launched = under_horizon + rows + capped.
struct CensoringLog {
    std::size_t launched = 0;
    std::size_t under_horizon = 0;  // solved before the horizon; left out of the dataset
    std::size_t rows = 0;           // solved at or after the horizon
    std::size_t capped = 0;         // hit the safety cutoff; kept as censored LONG rows
};

struct ExperimentResult {
    LabeledDataset train;
    LabeledDataset test;
    EmpiricalRTD rtd{{}};               // every training run, capped ones as unfinished
    CensoringLog train_log;
    CensoringLog test_log;
    std::optional<PartialLatinSquare> instance;  // the SINGLE instance
};

/// The instance used for run index i of a MULTI experiment, or the single
/// instance of a SINGLE experiment when none is supplied.
PartialLatinSquare experiment_instance(int order, HoleSpec holes, Seed master, std::uint64_t index);

/// Runs every seeded solve, builds the train and test datasets and the RTD.
/// Test labels use the training median. Throws DataError when no training
/// row survives censoring, StructuralError for an invalid instance.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct PeakCandidate {
    std::size_t index;
    std::size_t solved = 0;
    double median = 0;        // over all probe runs, capped ones counting as the cap
    double max = 0;
    double tail_ratio = 0;    // max / median
};

struct PeakSearch {
    std::vector<PeakCandidate> candidates;  // in probe order
    std::optional<std::size_t> chosen;      // first candidate meeting the ratio
    std::size_t heaviest = 0;               // largest ratio seen
    std::optional<PartialLatinSquare> instance;  // the chosen candidate, else the heaviest
};

/// Probes up to max_candidates generated instances with probe_runs
/// unrestarted runs each and stops at the first whose max/median run length
/// reaches min_ratio.
PeakSearch search_heavy_tailed_instance(int order, HoleSpec holes, const SolverConfig& config, Seed seed,
                                        std::size_t probe_runs, double min_ratio = 10.0,
                                        std::size_t max_candidates = 20, int threads = 1);

}  // namespace rtlab

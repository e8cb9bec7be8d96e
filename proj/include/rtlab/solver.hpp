#pragma once

#include <cstdint>
#include <optional>

#include "rtlab/domain_state.hpp"
#include "rtlab/features.hpp"
#include "rtlab/latin_square.hpp"
#include "rtlab/propagation.hpp"
#include "rtlab/random.hpp"

namespace rtlab {

struct SolverConfig {
    std::optional<long> cutoff;  // max choice points per run; nullopt = unlimited
    PropagationLevel propagation = PropagationLevel::AlldiffRegin;
    int horizon = 1000;          // trace length cap, in choice points
    bool trace_enabled = false;
    InstrumentOptions instrument;
};

enum class Outcome {
    Solved,
    Cutoff,
    Exhausted,  // search space exhausted: the instance has no completion
};

struct RunRecord {
    Seed seed;
    Outcome outcome = Outcome::Cutoff;
    std::optional<PartialLatinSquare> assignment;  // set iff Solved
    long choice_points = 0;
    std::optional<FeatureTrace> trace;
    int post_propagation_size = 0;  // unassigned cells after root propagation

    bool solved() const noexcept { return outcome == Outcome::Solved; }
};

struct Branch {
    int cell;
    int value;
};

/// Smallest domain, ties by largest degree, remaining ties uniformly at
/// random; the value is uniform over the chosen cell's domain.
Branch select_branch(const DomainState& state, Rng& rng);

/// Randomized chronological backtracking. Each branching decision and each
/// retry of another value at the same cell is one choice point; assignments
/// forced by propagation are not. Throws StructuralError for an instance
/// that violates the Latin property.
RunRecord solve(const PartialLatinSquare& instance, const SolverConfig& config, Seed seed);

}  // namespace rtlab

#pragma once

#include <optional>

#include "rtlab/domain_state.hpp"

namespace rtlab {

enum class PropagationLevel { ForwardCheck, AlldiffRegin };

enum class PropagationResult { Fixpoint, Contradiction };

/// Cumulative effect of propagation; these feed the search features.
struct PropagationCounters {
    long forced_assignments = 0;
    long alldiff_prunings = 0;
};

/// Removes every (cell, value) pair of the line that lies in no maximum
/// matching of the cell/value graph. Returns the number of pairs removed, or
/// nullopt when no matching covers every cell of the line. Singletons created
/// here are left for propagate() to assign.
std::optional<int> propagate_alldiff(DomainState& state, Line line);

/// Runs forward checking (and alldiff filtering, at that level) to a
/// fixpoint. Forced assignments are counted but are never choice points.
PropagationResult propagate(DomainState& state, PropagationLevel level, PropagationCounters& counters);

}  // namespace rtlab

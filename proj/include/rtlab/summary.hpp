#pragma once

#include <vector>

#include "rtlab/features.hpp"

namespace rtlab {

/// Fixed-length summary of a trace prefix, laid out as the registry's columns.
struct SummaryVector {
    std::vector<double> values;
    bool censored = false;
    double divisor = 1.0;  // multi-instance normalization divisor (1 = none)

    friend bool operator==(const SummaryVector&, const SummaryVector&) = default;
};

/// Statistics over the first min(horizon, trace.size()) entries. Throws
/// DataError when fewer than two entries are available.
SummaryVector summarize(const FeatureTrace& trace, int horizon, const FeatureRegistry& registry);

/// Divides every size-scale column except sign-change counts by the
/// post-propagation size. Throws DataError for a divisor below 1.
SummaryVector normalize_for_multi(const SummaryVector& summary, long post_propagation_size,
                                  const FeatureRegistry& registry);

}  // namespace rtlab

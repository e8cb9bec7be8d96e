#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtlab/domain_state.hpp"
#include "rtlab/propagation.hpp"

namespace rtlab {

/// Raw quantities observable at a choice point. The registry selects which
/// of them become base features.
enum class BaseFeature {
    Backtracks,
    Depth,
    MaxDepth,
    MinDepth,           // shallowest dead end so far (current depth before the first one)
    AvgDepth,           // mean depth over every visited search node
    UnassignedCells,
    AvgDomain,
    MinDomain,
    TotalDomain,
    VarRowColumn,       // population variance of the 2n per-line open-cell counts
    VarRow,
    VarColumn,
    AvgColumn,          // open cells per row (= per column)
    ForcedAssignments,
    AlldiffPrunings,
    Contradictions,
};

enum class Statistic { Init, Final, Avg, Min, Max, DAvg, DMin, DMax, DSignChanges, D2Avg, D2Min, D2Max };

std::string_view statistic_name(Statistic s);

struct FeatureInfo {
    BaseFeature id;
    std::string_view name;
    bool size_scale;  // divided by the post-propagation size in multi-instance mode
    bool cumulative;  // non-decreasing over a run
};

struct InstrumentOptions {
    bool split_line_variance = false;  // VarRow + VarColumn instead of the pooled VarRowColumn
    bool second_differences = false;   // adds d2_avg, d2_min, d2_max per feature
};

/// Ordered list of base features and the statistics computed for each.
/// Summary column j*S + s holds statistic s of feature j.
class FeatureRegistry {
public:
    static FeatureRegistry standard(InstrumentOptions options = {});

    std::span<const FeatureInfo> features() const noexcept { return features_; }
    std::span<const Statistic> statistics() const noexcept { return stats_; }
    std::size_t dimension() const noexcept { return features_.size() * stats_.size(); }

    /// "<feature>__<stat>" for every summary column.
    std::vector<std::string> column_names() const;
    std::optional<std::size_t> column_index(std::string_view name) const;
    /// FNV-1a over the column names; identifies the schema in model files.
    std::uint64_t schema_hash() const;

private:
    std::vector<FeatureInfo> features_;
    std::vector<Statistic> stats_;
};

/// Counters the search maintains alongside the domain state.
struct SearchCounters {
    long backtracks = 0;
    long contradictions = 0;
    int depth = 0;
    int max_depth = 0;
    std::optional<int> min_leaf_depth;
    double depth_sum = 0;
    long nodes = 0;
    PropagationCounters propagation;

    void visit(int node_depth) {
        depth_sum += node_depth;
        ++nodes;
        if (node_depth > max_depth) max_depth = node_depth;
    }
    void dead_end(int node_depth) {
        ++contradictions;
        if (!min_leaf_depth || node_depth < *min_leaf_depth) min_leaf_depth = node_depth;
    }
};

/// One value per registry feature, at a single choice point.
using BaseFeatureVector = std::vector<double>;

/// Entry i belongs to choice point i+1; at most horizon entries.
using FeatureTrace = std::vector<BaseFeatureVector>;

/// O(n) given the state's incremental counters.
BaseFeatureVector snapshot(const DomainState& state, const SearchCounters& counters, const FeatureRegistry& registry);

}  // namespace rtlab

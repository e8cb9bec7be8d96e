#include "rtlab/features.hpp"

#include <algorithm>

namespace rtlab {

std::string_view statistic_name(Statistic s) {
    switch (s) {
        case Statistic::Init: return "init";
        case Statistic::Final: return "final";
        case Statistic::Avg: return "avg";
        case Statistic::Min: return "min";
        case Statistic::Max: return "max";
        case Statistic::DAvg: return "d_avg";
        case Statistic::DMin: return "d_min";
        case Statistic::DMax: return "d_max";
        case Statistic::DSignChanges: return "d_signchg";
        case Statistic::D2Avg: return "d2_avg";
        case Statistic::D2Min: return "d2_min";
        case Statistic::D2Max: return "d2_max";
    }
    return "?";
}

FeatureRegistry FeatureRegistry::standard(InstrumentOptions options) {
    using F = BaseFeature;
    FeatureRegistry reg;
    reg.features_ = {
        {F::Backtracks, "Backtracks", false, true},
        {F::Depth, "Depth", true, false},
        {F::MaxDepth, "MaxDepth", true, true},
        {F::MinDepth, "MinDepth", true, false},
        {F::AvgDepth, "AvgDepth", true, false},
        {F::UnassignedCells, "Unassigned", true, false},
        {F::AvgDomain, "AvgDomain", false, false},
        {F::MinDomain, "MinDomain", false, false},
        {F::TotalDomain, "TotalDomain", true, false},
    };
    if (options.split_line_variance) {
        reg.features_.push_back({F::VarRow, "VarRow", false, false});
        reg.features_.push_back({F::VarColumn, "VarColumn", false, false});
    } else {
        reg.features_.push_back({F::VarRowColumn, "VarRowColumn", false, false});
    }
    reg.features_.insert(reg.features_.end(), {
        {F::AvgColumn, "AvgColumn", true, false},
        {F::ForcedAssignments, "Forced", true, true},
        {F::AlldiffPrunings, "AlldiffPrunings", true, true},
        {F::Contradictions, "Contradictions", false, true},
    });
    using S = Statistic;
    reg.stats_ = {S::Init, S::Final, S::Avg, S::Min, S::Max, S::DAvg, S::DMin, S::DMax, S::DSignChanges};
    if (options.second_differences) reg.stats_.insert(reg.stats_.end(), {S::D2Avg, S::D2Min, S::D2Max});
    return reg;
}

std::vector<std::string> FeatureRegistry::column_names() const {
    std::vector<std::string> names;
    names.reserve(dimension());
    for (const auto& f : features_) {
        for (auto s : stats_) {
            names.push_back(std::string(f.name) + "__" + std::string(statistic_name(s)));
        }
    }
    return names;
}

std::optional<std::size_t> FeatureRegistry::column_index(std::string_view name) const {
    auto names = column_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

std::uint64_t FeatureRegistry::schema_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& name : column_names()) {
        for (unsigned char ch : name) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        h ^= ',';
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

double variance(std::span<const int> a, std::span<const int> b) {
    double sum = 0, sq = 0;
    for (int x : a) sum += x, sq += static_cast<double>(x) * x;
    for (int x : b) sum += x, sq += static_cast<double>(x) * x;
    double count = static_cast<double>(a.size() + b.size());
    double mean = sum / count;
    return std::max(0.0, sq / count - mean * mean);
}

}  // namespace

BaseFeatureVector snapshot(const DomainState& state, const SearchCounters& counters, const FeatureRegistry& registry) {
    const int n = state.order();
    std::vector<int> rows(n), cols(n);
    for (int i = 0; i < n; ++i) {
        rows[i] = state.row_open(i);
        cols[i] = state.col_open(i);
    }
    const double open = state.unassigned();

    BaseFeatureVector out;
    out.reserve(registry.features().size());
    for (const auto& f : registry.features()) {
        double v = 0;
        switch (f.id) {
            case BaseFeature::Backtracks: v = static_cast<double>(counters.backtracks); break;
            case BaseFeature::Depth: v = counters.depth; break;
            case BaseFeature::MaxDepth: v = counters.max_depth; break;
            case BaseFeature::MinDepth: v = counters.min_leaf_depth.value_or(counters.depth); break;
            case BaseFeature::AvgDepth: v = counters.nodes ? counters.depth_sum / counters.nodes : 0.0; break;
            case BaseFeature::UnassignedCells: v = open; break;
            case BaseFeature::AvgDomain: v = open > 0 ? state.total_domain() / open : 0.0; break;
            case BaseFeature::MinDomain: v = state.min_domain(); break;
            case BaseFeature::TotalDomain: v = static_cast<double>(state.total_domain()); break;
            case BaseFeature::VarRowColumn: v = variance(rows, cols); break;
            case BaseFeature::VarRow: v = variance(rows, {}); break;
            case BaseFeature::VarColumn: v = variance(cols, {}); break;
            case BaseFeature::AvgColumn: v = open / n; break;
            case BaseFeature::ForcedAssignments: v = static_cast<double>(counters.propagation.forced_assignments); break;
            case BaseFeature::AlldiffPrunings: v = static_cast<double>(counters.propagation.alldiff_prunings); break;
            case BaseFeature::Contradictions: v = static_cast<double>(counters.contradictions); break;
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace rtlab

#include <catch_amalgamated.hpp>

#include "rtlab/errors.hpp"
#include "rtlab/solver.hpp"
#include "rtlab/summary.hpp"

using namespace rtlab;
using Catch::Approx;

namespace {

std::size_t feature_slot(const FeatureRegistry& reg, std::string_view name) {
    for (std::size_t j = 0; j < reg.features().size(); ++j)
        if (reg.features()[j].name == name) return j;
    FAIL("no feature " << name);
    return 0;
}

double col(const SummaryVector& s, const FeatureRegistry& reg, const std::string& name) {
    auto i = reg.column_index(name);
    REQUIRE(i);
    return s.values[*i];
}

// Trace whose feature `slot` follows `series`; every other feature is zero.
FeatureTrace trace_with(const FeatureRegistry& reg, std::size_t slot, std::vector<double> series) {
    FeatureTrace t;
    for (double v : series) {
        BaseFeatureVector x(reg.features().size(), 0.0);
        x[slot] = v;
        t.push_back(x);
    }
    return t;
}

}  // namespace

TEST_CASE("registry layout", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    CHECK(reg.features().size() == 14);
    CHECK(reg.statistics().size() == 9);
    CHECK(reg.dimension() == 126);
    auto names = reg.column_names();
    REQUIRE(names.size() == 126);
    CHECK(names.front() == "Backtracks__init");
    CHECK(reg.column_index("VarRowColumn__d_min"));
    CHECK(reg.column_index("AvgColumn__d_signchg"));
    CHECK_FALSE(reg.column_index("VarRow__avg"));

    auto split = FeatureRegistry::standard({true, false});
    CHECK(split.features().size() == 15);
    CHECK(split.column_index("VarRow__avg"));
    auto d2 = FeatureRegistry::standard({false, true});
    CHECK(d2.dimension() == 14 * 12);
    CHECK(d2.column_index("Depth__d2_max"));
    CHECK(reg.schema_hash() != split.schema_hash());
    CHECK(reg.schema_hash() == FeatureRegistry::standard().schema_hash());
}

TEST_CASE("snapshot at the first choice point", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    const int n = 9, h = 4;
    auto q = poke_holes(generate_complete(n, Seed{1}), HoleSpec::balanced(h), Seed{2});
    auto s = DomainState::from_instance(q);
    SearchCounters counters;
    auto x = snapshot(s, counters, reg);
    CHECK(x[feature_slot(reg, "AvgColumn")] == Approx(double(n * h) / n));
    CHECK(x[feature_slot(reg, "Unassigned")] == n * h);
    CHECK(x[feature_slot(reg, "VarRowColumn")] == 0.0);
    CHECK(x[feature_slot(reg, "Backtracks")] == 0.0);

    counters.backtracks = 1;
    counters.depth = 3;
    counters.visit(3);
    counters.dead_end(3);
    auto y = snapshot(s, counters, reg);
    CHECK(y[feature_slot(reg, "Backtracks")] == 1.0);
    CHECK(y[feature_slot(reg, "MinDepth")] == 3.0);
    CHECK(y[feature_slot(reg, "Contradictions")] == 1.0);
}

TEST_CASE("line variance pools rows and columns", "[instrument]") {
    // Row 0 fully open, everything else given: row counts (3,0,0), column counts (1,1,1).
    auto full = generate_complete(3, Seed{1});
    auto q = full;
    for (int c = 0; c < 3; ++c) q.set(0, c, kHole);
    auto s = DomainState::from_instance(q);
    auto reg = FeatureRegistry::standard();
    auto x = snapshot(s, {}, reg);
    // Mean 1, squared deviations 4,1,1,0,0,0 over 6.
    CHECK(x[feature_slot(reg, "VarRowColumn")] == Approx(1.0));
    auto split = FeatureRegistry::standard({true, false});
    auto y = snapshot(s, {}, split);
    CHECK(y[feature_slot(split, "VarRow")] == Approx(2.0));
    CHECK(y[feature_slot(split, "VarColumn")] == Approx(0.0));
}

TEST_CASE("summarize examples", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    const auto slot = feature_slot(reg, "Depth");

    auto flat = summarize(trace_with(reg, slot, {5, 5, 5, 5}), 100, reg);
    for (auto stat : {"init", "final", "avg", "min", "max"}) CHECK(col(flat, reg, std::string("Depth__") + stat) == 5);
    for (auto stat : {"d_avg", "d_min", "d_max", "d_signchg"}) CHECK(col(flat, reg, std::string("Depth__") + stat) == 0);

    auto zig = summarize(trace_with(reg, slot, {1, 3, 2, 4}), 100, reg);
    CHECK(col(zig, reg, "Depth__d_avg") == Approx(1.0));
    CHECK(col(zig, reg, "Depth__d_min") == -1);
    CHECK(col(zig, reg, "Depth__d_max") == 2);
    CHECK(col(zig, reg, "Depth__d_signchg") == 2);
    CHECK(col(zig, reg, "Depth__init") == 1);
    CHECK(col(zig, reg, "Depth__final") == 4);
    CHECK(col(zig, reg, "Depth__avg") == Approx(2.5));

    auto ramp = summarize(trace_with(reg, slot, {0, 1, 2, 3}), 100, reg);
    CHECK(col(ramp, reg, "Depth__d_signchg") == 0);
    CHECK(col(ramp, reg, "Depth__d_avg") == Approx(1.0));

    // A zero difference breaks a run of sign changes without counting.
    auto pause = summarize(trace_with(reg, slot, {0, 1, 1, 0}), 100, reg);
    CHECK(col(pause, reg, "Depth__d_signchg") == 0);
}

TEST_CASE("summarize validates its input and is prefix-stable", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    const auto slot = feature_slot(reg, "Unassigned");
    CHECK_THROWS_AS(summarize(trace_with(reg, slot, {1}), 10, reg), DataError);
    CHECK_THROWS_AS(summarize(trace_with(reg, slot, {1, 2, 3}), 1, reg), DataError);
    auto a = summarize(trace_with(reg, slot, {9, 7, 8, 4}), 3, reg);
    auto b = summarize(trace_with(reg, slot, {9, 7, 8, 4, 100, -3}), 3, reg);
    auto c = summarize(trace_with(reg, slot, {9, 7, 8}), 3, reg);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("second differences", "[instrument]") {
    auto reg = FeatureRegistry::standard({false, true});
    const auto slot = feature_slot(reg, "Depth");
    auto s = summarize(trace_with(reg, slot, {0, 1, 4, 9}), 10, reg);
    CHECK(col(s, reg, "Depth__d2_avg") == Approx(2.0));
    CHECK(col(s, reg, "Depth__d2_min") == 2);
    CHECK(col(s, reg, "Depth__d2_max") == 2);
}

TEST_CASE("normalize_for_multi scales only size-scale columns", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    const auto slot = feature_slot(reg, "Unassigned");
    auto base = summarize(trace_with(reg, slot, {200, 190, 195, 190}), 10, reg);
    CHECK(normalize_for_multi(base, 1, reg).values == base.values);
    auto scaled = normalize_for_multi(base, 380, reg);
    CHECK(scaled.divisor == 380);
    CHECK(col(scaled, reg, "Unassigned__final") == Approx(0.5));
    CHECK(col(scaled, reg, "Unassigned__d_signchg") == col(base, reg, "Unassigned__d_signchg"));
    CHECK(col(scaled, reg, "Backtracks__final") == col(base, reg, "Backtracks__final"));
    CHECK_THROWS_AS(normalize_for_multi(base, 0, reg), DataError);
}

TEST_CASE("summary ordering invariants hold on real traces", "[instrument]") {
    auto reg = FeatureRegistry::standard();
    auto q = poke_holes(generate_complete(14, Seed{6}), HoleSpec::balanced(6), Seed{7});
    SolverConfig cfg;
    cfg.trace_enabled = true;
    cfg.horizon = 40;
    cfg.cutoff = 2000;
    const std::size_t S = reg.statistics().size();
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto r = solve(q, cfg, Seed{seed});
        if (r.trace->size() < 2) continue;
        auto s = summarize(*r.trace, cfg.horizon, reg);
        for (std::size_t j = 0; j < reg.features().size(); ++j) {
            const double init = s.values[j * S], fin = s.values[j * S + 1], avg = s.values[j * S + 2];
            const double lo = s.values[j * S + 3], hi = s.values[j * S + 4];
            REQUIRE(lo <= init);
            REQUIRE(init <= hi);
            REQUIRE(lo <= fin);
            REQUIRE(fin <= hi);
            REQUIRE(lo <= avg + 1e-9);
            REQUIRE(avg <= hi + 1e-9);
            REQUIRE(s.values[j * S + 8] <= static_cast<double>(r.trace->size()) - 2);
            if (reg.features()[j].cumulative) REQUIRE(s.values[j * S + 6] >= 0);
        }
        const auto ac = feature_slot(reg, "AvgColumn");
        for (const auto& x : *r.trace) {
            REQUIRE(x[ac] >= 0);
            REQUIRE(x[ac] <= 14);
        }
    }
}

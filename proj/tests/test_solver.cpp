#include <catch_amalgamated.hpp>

#include <map>

#include "oracles.hpp"
#include "rtlab/errors.hpp"
#include "rtlab/matching.hpp"
#include "rtlab/propagation.hpp"
#include "rtlab/solver.hpp"

using namespace rtlab;

namespace {

PartialLatinSquare square(std::vector<std::vector<int>> rows) {
    std::vector<std::vector<Cell>> cells;
    for (const auto& r : rows) {
        std::vector<Cell> row;
        for (int v : r) row.push_back(v ? Cell{v} : kHole);
        cells.push_back(row);
    }
    return PartialLatinSquare::from_rows(cells);
}

oracle::Grid grid(const PartialLatinSquare& s) {
    oracle::Grid g(s.order(), std::vector<int>(s.order()));
    for (int r = 0; r < s.order(); ++r)
        for (int c = 0; c < s.order(); ++c) g[r][c] = s.at(r, c).value_or(0);
    return g;
}

DomainMask mask(std::initializer_list<int> symbols) {
    DomainMask m = 0;
    for (int v : symbols) m |= symbol_bit(v);
    return m;
}

bool extends(const PartialLatinSquare& full, const PartialLatinSquare& partial) {
    return oracle::extends(grid(full), grid(partial));
}

}  // namespace

// ---- matching ----------------------------------------------------------------

TEST_CASE("max_matching examples", "[solver][matching]") {
    std::vector<Edge> k22{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK(max_matching(2, 2, k22).size == 2);
    std::vector<Edge> star{{0, 0}, {0, 1}};
    CHECK(max_matching(1, 2, star).size == 1);
    std::vector<Edge> three{{0, 0}, {1, 0}, {2, 1}};
    auto m = max_matching(3, 2, three);
    CHECK(m.size == 2);
    CHECK(m.edges().size() == 2);
}

TEST_CASE("max_matching agrees with subset enumeration", "[solver][matching]") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int l = 1 + static_cast<int>(uniform_index(rng, 5));
        const int r = 1 + static_cast<int>(uniform_index(rng, 5));
        std::vector<Edge> edges;
        for (int a = 0; a < l; ++a)
            for (int b = 0; b < r; ++b)
                if (uniform_index(rng, 3) == 0 && edges.size() < 14) edges.push_back({a, b});
        auto m = max_matching(l, r, edges);
        REQUIRE(m.size == oracle::max_matching_size(edges));
        // The matching is a real matching over the given edges.
        std::set<int> used;
        for (auto [a, b] : m.edges()) {
            REQUIRE(std::find(edges.begin(), edges.end(), Edge{a, b}) != edges.end());
            REQUIRE(used.insert(b).second);
        }
        std::vector<std::uint64_t> adj(l, 0);
        for (auto [a, b] : edges) adj[a] |= std::uint64_t{1} << b;
        std::vector<int> mate(l, -1);
        REQUIRE(max_matching_dense(adj, mate) == m.size);
    }
}

// ---- propagation -------------------------------------------------------------

TEST_CASE("propagate_alldiff examples", "[solver][alldiff]") {
    SECTION("chain of nested domains collapses") {
        DomainState s(3);
        s.set_domain(s.cell(0, 0), mask({1}));
        s.set_domain(s.cell(0, 1), mask({1, 2}));
        s.set_domain(s.cell(0, 2), mask({1, 2, 3}));
        auto pruned = propagate_alldiff(s, {Line::Kind::Row, 0});
        REQUIRE(pruned);
        CHECK(*pruned == 3);
        CHECK(s.domain(s.cell(0, 0)) == mask({1}));
        CHECK(s.domain(s.cell(0, 1)) == mask({2}));
        CHECK(s.domain(s.cell(0, 2)) == mask({3}));
    }
    SECTION("pigeonhole is a contradiction") {
        DomainState s(3);
        for (int c = 0; c < 3; ++c) s.set_domain(s.cell(0, c), mask({1, 2}));
        CHECK_FALSE(propagate_alldiff(s, {Line::Kind::Row, 0}));
    }
    SECTION("full domains are left alone") {
        DomainState s(6);
        auto pruned = propagate_alldiff(s, {Line::Kind::Column, 4});
        REQUIRE(pruned);
        CHECK(*pruned == 0);
    }
}

TEST_CASE("alldiff filtering keeps exactly the values some line assignment uses", "[solver][alldiff]") {
    // Generalized arc consistency on a single line, checked against enumeration.
    Rng rng(3);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 3 + static_cast<int>(uniform_index(rng, 3));
        DomainState s(n);
        std::vector<DomainMask> doms(n);
        for (int c = 0; c < n; ++c) {
            do doms[c] = uniform_index(rng, (DomainMask{1} << n) - 1) + 1; while (!doms[c]);
            s.set_domain(s.cell(0, c), doms[c]);
        }
        std::vector<DomainMask> support(n, 0);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 1);
        bool any = false;
        do {
            bool ok = true;
            for (int c = 0; c < n && ok; ++c) ok = doms[c] & symbol_bit(perm[c]);
            if (!ok) continue;
            any = true;
            for (int c = 0; c < n; ++c) support[c] |= symbol_bit(perm[c]);
        } while (std::next_permutation(perm.begin(), perm.end()));

        auto pruned = propagate_alldiff(s, {Line::Kind::Row, 0});
        REQUIRE(pruned.has_value() == any);
        if (!any) continue;
        for (int c = 0; c < n; ++c) REQUIRE(s.domain(s.cell(0, c)) == support[c]);
    }
}

TEST_CASE("alldiff filtering never removes a completion-supported value", "[solver][alldiff]") {
    for (int n = 2; n <= 4; ++n) {
        const auto squares = oracle::all_latin_squares(n);
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            const int holes = 1 + static_cast<int>(seed % (n * n));
            auto q = poke_holes(generate_complete(n, Seed{seed}), HoleSpec::unbalanced(holes), Seed{seed + 7});
            const auto support = oracle::supported_pairs(grid(q), squares);
            for (auto level : {PropagationLevel::ForwardCheck, PropagationLevel::AlldiffRegin}) {
                auto s = DomainState::from_instance(q);
                PropagationCounters counters;
                REQUIRE(propagate(s, level, counters) == PropagationResult::Fixpoint);
                for (int i = 0; i < n; ++i) {
                    REQUIRE(propagate_alldiff(s, {Line::Kind::Row, i}));
                    REQUIRE(propagate_alldiff(s, {Line::Kind::Column, i}));
                }
                for (const auto& [cell, value] : support) REQUIRE((s.domain(cell) & symbol_bit(value)));
            }
        }
    }
}

TEST_CASE("propagation detects dead partial squares", "[solver][alldiff]") {
    // Valid partial square with no completion.
    auto q = square({{1, 0}, {0, 2}});
    REQUIRE(count_completions(q, 1) == 0);
    auto s = DomainState::from_instance(q);
    PropagationCounters c;
    CHECK(propagate(s, PropagationLevel::ForwardCheck, c) == PropagationResult::Contradiction);

    DomainState e(3);
    e.set_domain(e.cell(1, 1), 0);
    CHECK(propagate(e, PropagationLevel::AlldiffRegin, c) == PropagationResult::Contradiction);
}

TEST_CASE("propagate reaches the forced completion", "[solver][alldiff]") {
    auto s = DomainState::from_instance(square({{1, 0}, {0, 0}}));
    PropagationCounters c;
    REQUIRE(propagate(s, PropagationLevel::ForwardCheck, c) == PropagationResult::Fixpoint);
    CHECK(s.solved());
    CHECK(c.forced_assignments == 3);

    auto full = generate_complete(6, Seed{2});
    auto t = DomainState::from_instance(full);
    REQUIRE(propagate(t, PropagationLevel::AlldiffRegin, c) == PropagationResult::Fixpoint);
    CHECK(t.to_square() == full);
}

// ---- branching -----------------------------------------------------------------

TEST_CASE("select_branch prefers the unique smallest domain", "[solver][branch]") {
    DomainState s(3);
    s.set_domain(s.cell(2, 1), mask({3}));
    Rng rng(1);
    auto b = select_branch(s, rng);
    CHECK(b.cell == s.cell(2, 1));
    CHECK(b.value == 3);
}

TEST_CASE("select_branch breaks domain ties by degree", "[solver][branch]") {
    auto s = DomainState::from_instance(square({{0, 0, 0, 0}, {2, 0, 3, 0}, {0, 4, 0, 0}, {0, 0, 0, 0}}));
    const int a = s.cell(0, 0), b = s.cell(1, 1);
    s.set_domain(a, mask({1, 3}));
    s.set_domain(b, mask({1, 4}));
    REQUIRE(s.degree(a) == 5);
    REQUIRE(s.degree(b) == 3);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) CHECK(select_branch(s, rng).cell == a);
}

TEST_CASE("select_branch is uniform over symmetric cells and values", "[solver][branch]") {
    const int n = 5;
    DomainState s(n);
    Rng rng(2024);
    std::vector<int> cells(n * n, 0), values(n, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto b = select_branch(s, rng);
        ++cells[b.cell];
        ++values[b.value - 1];
    }
    auto chi2 = [](const std::vector<int>& counts, double expected) {
        double x = 0;
        for (int c : counts) x += (c - expected) * (c - expected) / expected;
        return x;
    };
    // 0.999 quantiles of chi-square with 24 and 4 degrees of freedom.
    CHECK(chi2(cells, draws / double(n * n)) < 51.18);
    CHECK(chi2(values, draws / double(n)) < 18.47);
    const double sigma = std::sqrt(draws * (1.0 / 25) * (24.0 / 25));
    for (int c : cells) CHECK(std::abs(c - draws / 25.0) < 4 * sigma);
}

// ---- solve -----------------------------------------------------------------------

TEST_CASE("solve on trivial inputs", "[solver]") {
    SolverConfig cfg;
    auto full = generate_complete(7, Seed{4});
    auto r = solve(full, cfg, Seed{1});
    CHECK(r.solved());
    CHECK(r.choice_points == 0);
    CHECK(*r.assignment == full);

    auto forced = solve(square({{1, 0}, {0, 0}}), cfg, Seed{1});
    CHECK(forced.solved());
    CHECK(forced.choice_points == 0);

    auto dead = solve(square({{1, 0}, {0, 2}}), cfg, Seed{1});
    CHECK(dead.outcome == Outcome::Exhausted);
    CHECK_FALSE(dead.assignment);

    CHECK_THROWS_AS(solve(square({{1, 1}, {0, 0}}), cfg, Seed{1}), StructuralError);
    SolverConfig bad;
    bad.cutoff = 0;
    CHECK_THROWS_AS(solve(full, bad, Seed{1}), StructuralError);
}

TEST_CASE("solve completes every small QWH instance", "[solver]") {
    std::map<int, std::set<oracle::Grid>> latin;
    for (int n = 1; n <= 4; ++n) {
        auto all = oracle::all_latin_squares(n);
        latin[n] = {all.begin(), all.end()};
    }
    for (auto level : {PropagationLevel::ForwardCheck, PropagationLevel::AlldiffRegin}) {
        SolverConfig cfg;
        cfg.propagation = level;
        for (std::uint64_t inst = 0; inst < 50; ++inst) {
            const int n = 2 + static_cast<int>(inst % 4);
            auto full = generate_complete(n, Seed{inst});
            auto q = inst % 2 ? poke_holes(full, HoleSpec::balanced(1 + static_cast<int>(inst % n)), Seed{inst})
                              : poke_holes(full, HoleSpec::unbalanced(static_cast<int>(inst % (n * n + 1))), Seed{inst});
            for (std::uint64_t s = 0; s < 20; ++s) {
                auto r = solve(q, cfg, Seed{s});
                REQUIRE(r.solved());
                REQUIRE(r.assignment->complete());
                REQUIRE(validate(*r.assignment).empty());
                REQUIRE(extends(*r.assignment, q));
                if (n <= 4) REQUIRE(latin[n].count(grid(*r.assignment)) == 1);
            }
        }
    }
}

TEST_CASE("cutoff stops a run exactly at the limit", "[solver]") {
    SolverConfig open;
    open.propagation = PropagationLevel::ForwardCheck;
    auto q = poke_holes(generate_complete(18, Seed{2}), HoleSpec::balanced(7), Seed{1002});
    std::uint64_t seed = 0;
    while (solve(q, open, Seed{seed}).choice_points <= 10) ++seed;
    SolverConfig capped = open;
    capped.cutoff = 10;
    auto r = solve(q, capped, Seed{seed});
    CHECK(r.outcome == Outcome::Cutoff);
    CHECK(r.choice_points == 10);
    CHECK_FALSE(r.assignment);
}

TEST_CASE("solve is deterministic and tracing leaves the search unchanged", "[solver]") {
    auto q = poke_holes(generate_complete(12, Seed{8}), HoleSpec::balanced(5), Seed{9});
    SolverConfig plain;
    plain.cutoff = 5000;
    SolverConfig traced = plain;
    traced.trace_enabled = true;
    traced.horizon = 50;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto a = solve(q, plain, Seed{s});
        auto b = solve(q, plain, Seed{s});
        auto c = solve(q, traced, Seed{s});
        REQUIRE(a.choice_points == b.choice_points);
        REQUIRE(a.outcome == c.outcome);
        REQUIRE(a.choice_points == c.choice_points);
        REQUIRE(a.assignment == c.assignment);
        REQUIRE(c.trace);
        REQUIRE(static_cast<long>(c.trace->size()) == std::min<long>(c.choice_points, 50));
        REQUIRE(a.post_propagation_size == c.post_propagation_size);
    }
}

TEST_CASE("choice points grow with retries and respect the cutoff", "[solver]") {
    auto q = poke_holes(generate_complete(15, Seed{21}), HoleSpec::balanced(6), Seed{22});
    SolverConfig cfg;
    cfg.propagation = PropagationLevel::ForwardCheck;
    cfg.cutoff = 300;
    cfg.trace_enabled = true;
    cfg.horizon = 300;
    const auto reg = FeatureRegistry::standard();
    const auto bt = *reg.column_index("Backtracks__final") / reg.statistics().size();
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto r = solve(q, cfg, Seed{s});
        REQUIRE(r.choice_points <= 300);
        if (r.trace->empty()) continue;
        // Cumulative counters never decrease along a trace.
        for (std::size_t i = 1; i < r.trace->size(); ++i) REQUIRE((*r.trace)[i][bt] >= (*r.trace)[i - 1][bt]);
    }
}

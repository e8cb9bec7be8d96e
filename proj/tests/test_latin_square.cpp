#include <catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "rtlab/errors.hpp"
#include "rtlab/latin_square.hpp"

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

}  // namespace

TEST_CASE("validate accepts the cyclic square and the empty grid", "[latin]") {
    CHECK(validate(square({{1, 2, 3}, {2, 3, 1}, {3, 1, 2}})).empty());
    CHECK(validate(PartialLatinSquare(5)).empty());
}

TEST_CASE("validate reports each duplicated row pair", "[latin]") {
    auto v = validate(square({{1, 1}, {2, 2}}));
    REQUIRE(v.size() == 2);
    for (const auto& x : v) CHECK(x.line == LatinViolation::Line::Row);
    CHECK(v[0].symbol == 1);
    CHECK(v[1].symbol == 2);
}

TEST_CASE("construction rejects malformed grids", "[latin]") {
    CHECK_THROWS_AS(PartialLatinSquare::from_rows({{1, 2}, {2}}), StructuralError);
    CHECK_THROWS_AS(PartialLatinSquare::from_rows({{1, 3}, {2, 1}}), StructuralError);
    CHECK_THROWS_AS(PartialLatinSquare::from_rows({{0, 1}, {1, 2}}), StructuralError);
    CHECK_THROWS_AS(PartialLatinSquare(0), StructuralError);
    CHECK_THROWS_AS(PartialLatinSquare(kMaxOrder + 1), StructuralError);
}

TEST_CASE("generate_complete gives valid full squares", "[latin]") {
    CHECK(generate_complete(1, Seed{9}) == square({{1}}));
    for (int n = 1; n <= 6; ++n) {
        for (std::uint64_t s = 0; s < 100; ++s) {
            auto sq = generate_complete(n, Seed{s});
            REQUIRE(sq.complete());
            REQUIRE(validate(sq).empty());
        }
    }
    auto five = generate_complete(5, Seed{42});
    CHECK(validate(five).empty());
    CHECK(five.hole_count() == 0);
}

TEST_CASE("order-3 generation reaches exactly the 12 Latin squares", "[latin]") {
    auto all = oracle::all_latin_squares(3);
    REQUIRE(all.size() == 12);
    std::set<oracle::Grid> known(all.begin(), all.end()), seen;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        auto g = grid(generate_complete(3, Seed{s}));
        REQUIRE(known.count(g) == 1);
        seen.insert(g);
    }
    CHECK(seen.size() == 12);
}

TEST_CASE("generation is deterministic per seed", "[latin]") {
    CHECK(generate_complete(9, Seed{5}) == generate_complete(9, Seed{5}));
    CHECK_FALSE(generate_complete(9, Seed{5}) == generate_complete(9, Seed{6}));
    auto full = generate_complete(9, Seed{5});
    CHECK(poke_holes(full, HoleSpec::balanced(4), Seed{1}) == poke_holes(full, HoleSpec::balanced(4), Seed{1}));
}

TEST_CASE("poke_holes edge cases", "[latin]") {
    auto full = generate_complete(6, Seed{3});
    CHECK(poke_holes(full, HoleSpec::unbalanced(0), Seed{1}) == full);
    CHECK(poke_holes(full, HoleSpec::balanced(6), Seed{1}) == PartialLatinSquare(6));
    CHECK(poke_holes(full, HoleSpec::unbalanced(17), Seed{1}).hole_count() == 17);
    CHECK_THROWS_AS(poke_holes(full, HoleSpec::balanced(7), Seed{1}), StructuralError);
    CHECK_THROWS_AS(poke_holes(full, HoleSpec::unbalanced(37), Seed{1}), StructuralError);
    auto holey = poke_holes(full, HoleSpec::unbalanced(3), Seed{1});
    CHECK_THROWS_AS(poke_holes(holey, HoleSpec::unbalanced(1), Seed{1}), StructuralError);
}

TEST_CASE("poke_holes keeps every surviving symbol", "[latin]") {
    auto full = generate_complete(8, Seed{11});
    auto holes = poke_holes(full, HoleSpec::unbalanced(30), Seed{2});
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            if (holes.at(r, c)) CHECK(holes.at(r, c) == full.at(r, c));
}

TEST_CASE("balanced holes are exact in every row and column", "[latin]") {
    for (int n : {4, 7, 12, 18, 25}) {
        for (int h = 0; h <= n; ++h) {
            for (std::uint64_t s = 0; s < 5; ++s) {
                auto q = poke_holes(generate_complete(n, Seed{s}), HoleSpec::balanced(h), Seed{s + 100});
                for (int i = 0; i < n; ++i) {
                    int row = 0, col = 0;
                    for (int j = 0; j < n; ++j) {
                        row += !q.at(i, j);
                        col += !q.at(j, i);
                    }
                    REQUIRE(row == h);
                    REQUIRE(col == h);
                }
            }
        }
    }
}

TEST_CASE("count_completions matches enumeration", "[latin]") {
    CHECK(count_completions(PartialLatinSquare(3), 100) == 12);
    CHECK(count_completions(PartialLatinSquare(3), 5) == 5);
    CHECK(count_completions(generate_complete(5, Seed{1}), 10) == 1);
    CHECK(count_completions(square({{1, 0}, {0, 0}}), 10) == 1);
    CHECK(count_completions(square({{1, 1}, {0, 0}}), 10) == 0);
    CHECK_THROWS(count_completions(PartialLatinSquare(3), 0));

    const auto all4 = oracle::all_latin_squares(4);
    REQUIRE(all4.size() == 576);
    CHECK(count_completions(PartialLatinSquare(4), 1000) == 576);
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto q = poke_holes(generate_complete(4, Seed{s}), HoleSpec::unbalanced(9), Seed{s});
        const auto g = grid(q);
        auto expected = std::count_if(all4.begin(), all4.end(), [&](const auto& sq) { return oracle::extends(sq, g); });
        REQUIRE(count_completions(q, 1000) == static_cast<std::uint64_t>(expected));
    }
}

TEST_CASE("QWH instances are satisfiable", "[latin]") {
    for (int n = 2; n <= 5; ++n) {
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto full = generate_complete(n, Seed{s});
            auto u = poke_holes(full, HoleSpec::unbalanced(n * n / 2), Seed{s});
            auto b = poke_holes(full, HoleSpec::balanced(n / 2 + 1), Seed{s});
            REQUIRE(count_completions(u, 1) == 1);
            REQUIRE(count_completions(b, 1) == 1);
        }
    }
}

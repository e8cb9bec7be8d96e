#include "rtlab/latin_square.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <string>

#include "rtlab/errors.hpp"
#include "rtlab/matching.hpp"

namespace rtlab {

namespace {

void check_order(int order) {
    if (order < 1 || order > kMaxOrder) {
        throw StructuralError("order must be in 1.." + std::to_string(kMaxOrder) + ", got " +
                              std::to_string(order));
    }
}

constexpr std::uint64_t full_mask(int order) {
    return order == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << order) - 1;
}

constexpr std::uint64_t bit(int symbol) { return std::uint64_t{1} << (symbol - 1); }

// k-th set bit (0-based) of mask.
int nth_bit(std::uint64_t mask, std::uint64_t k) {
    for (; k > 0; --k) mask &= mask - 1;
    return std::countr_zero(mask);
}

}  // namespace

PartialLatinSquare::PartialLatinSquare(int order) : order_(order) {
    check_order(order);
    cells_.assign(static_cast<std::size_t>(order) * order, kHole);
}

PartialLatinSquare PartialLatinSquare::from_rows(const std::vector<std::vector<Cell>>& rows) {
    const int n = static_cast<int>(rows.size());
    check_order(n);
    PartialLatinSquare sq(n);
    for (int r = 0; r < n; ++r) {
        if (static_cast<int>(rows[r].size()) != n) {
            throw StructuralError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                  " cells, expected " + std::to_string(n));
        }
        for (int c = 0; c < n; ++c) sq.set(r, c, rows[r][c]);
    }
    return sq;
}

std::size_t PartialLatinSquare::index(int row, int col) const {
    if (row < 0 || row >= order_ || col < 0 || col >= order_) {
        throw StructuralError("cell (" + std::to_string(row) + "," + std::to_string(col) + ") out of range");
    }
    return static_cast<std::size_t>(row) * order_ + col;
}

void PartialLatinSquare::set(int row, int col, Cell value) {
    if (value && (*value < 1 || *value > order_)) {
        throw StructuralError("symbol " + std::to_string(*value) + " outside 1.." + std::to_string(order_));
    }
    cells_[index(row, col)] = value;
}

int PartialLatinSquare::hole_count() const noexcept {
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), kHole));
}

std::vector<LatinViolation> validate(const PartialLatinSquare& square) {
    const int n = square.order();
    std::vector<LatinViolation> out;
    for (auto line : {LatinViolation::Line::Row, LatinViolation::Line::Column}) {
        for (int i = 0; i < n; ++i) {
            std::vector<int> seen(n + 1, 0);
            for (int j = 0; j < n; ++j) {
                const Cell& cell = line == LatinViolation::Line::Row ? square.at(i, j) : square.at(j, i);
                if (cell && ++seen[*cell] == 2) out.push_back({line, i, *cell});
            }
        }
    }
    return out;
}

PartialLatinSquare generate_complete(int order, Seed seed) {
    check_order(order);
    const int n = order;
    auto rng = make_rng(seed);
    PartialLatinSquare sq(n);
    std::vector<std::uint64_t> col_free(n, full_mask(n));
    std::vector<std::uint64_t> adjacency;
    std::vector<int> mate;

    for (int r = 0; r < n; ++r) {
        std::uint64_t row_free = full_mask(n);
        for (int c = 0; c < n; ++c) {
            std::uint64_t candidates = col_free[c] & row_free;
            for (;;) {
                // A Latin rectangle always extends, so some candidate is feasible.
                int v = nth_bit(candidates, uniform_index(rng, std::popcount(candidates))) + 1;
                std::uint64_t rest = row_free & ~bit(v);
                adjacency.clear();
                for (int c2 = c + 1; c2 < n; ++c2) adjacency.push_back(col_free[c2] & rest);
                mate.assign(adjacency.size(), -1);
                if (max_matching_dense(adjacency, mate) == static_cast<int>(adjacency.size())) {
                    sq.set(r, c, v);
                    row_free = rest;
                    col_free[c] &= ~bit(v);
                    break;
                }
                candidates &= ~bit(v);  // dead end one step ahead: backtrack and redraw
            }
        }
    }
    return sq;
}

namespace {

// One random permutation inside the allowed cells; allowed must be regular.
std::vector<int> random_permutation_within(const std::vector<std::uint64_t>& allowed, Rng& rng) {
    const int n = static_cast<int>(allowed.size());
    std::vector<int> perm(n, -1);
    std::uint64_t used_cols = 0;
    std::vector<std::uint64_t> adjacency;
    std::vector<int> mate;
    for (int r = 0; r < n; ++r) {
        std::uint64_t candidates = allowed[r] & ~used_cols;
        for (;;) {
            int c = nth_bit(candidates, uniform_index(rng, std::popcount(candidates)));
            std::uint64_t cols = used_cols | (std::uint64_t{1} << c);
            adjacency.clear();
            for (int r2 = r + 1; r2 < n; ++r2) adjacency.push_back(allowed[r2] & ~cols);
            mate.assign(adjacency.size(), -1);
            if (max_matching_dense(adjacency, mate) == static_cast<int>(adjacency.size())) {
                perm[r] = c;
                used_cols = cols;
                break;
            }
            candidates &= ~(std::uint64_t{1} << c);
        }
    }
    return perm;
}

}  // namespace

std::vector<bool> balanced_hole_mask(int order, int per_line, Rng& rng) {
    check_order(order);
    if (per_line < 0 || per_line > order) {
        throw StructuralError("balanced holes per line must be in 0.." + std::to_string(order));
    }
    const int n = order;
    // Compose disjoint permutation matrices; for dense patterns build the
    // complement (the kept cells) the same way and invert.
    const bool invert = per_line > n / 2;
    const int perms = invert ? n - per_line : per_line;
    std::vector<std::uint64_t> allowed(n, full_mask(n));
    for (int k = 0; k < perms; ++k) {
        auto perm = random_permutation_within(allowed, rng);
        for (int r = 0; r < n; ++r) allowed[r] &= ~(std::uint64_t{1} << perm[r]);
    }
    std::vector<bool> mask(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            bool marked = !(allowed[r] >> c & 1U);
            mask[static_cast<std::size_t>(r) * n + c] = invert ? !marked : marked;
        }
    }
    return mask;
}

PartialLatinSquare poke_holes(const PartialLatinSquare& square, HoleSpec spec, Seed seed) {
    const int n = square.order();
    if (!square.complete()) throw StructuralError("poke_holes needs a complete square");
    auto rng = make_rng(seed);
    PartialLatinSquare out = square;
    if (spec.mode == HoleSpec::Mode::Unbalanced) {
        if (spec.count < 0 || spec.count > n * n) {
            throw StructuralError("total holes must be in 0.." + std::to_string(n * n));
        }
        std::vector<int> cells(static_cast<std::size_t>(n) * n);
        std::iota(cells.begin(), cells.end(), 0);
        // Partial Fisher-Yates: the first count entries are a uniform sample.
        for (int i = 0; i < spec.count; ++i) {
            auto j = i + static_cast<int>(uniform_index(rng, cells.size() - i));
            std::swap(cells[i], cells[j]);
            out.set(cells[i] / n, cells[i] % n, kHole);
        }
        return out;
    }
    auto mask = balanced_hole_mask(n, spec.count, rng);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (mask[static_cast<std::size_t>(r) * n + c]) out.set(r, c, kHole);
        }
    }
    return out;
}

namespace {

struct CompletionCounter {
    int n;
    std::vector<int> holes;  // row-major cell indices
    std::vector<std::uint64_t> row_used, col_used;
    std::uint64_t cap;
    std::uint64_t found = 0;

    void search(std::size_t k) {
        if (found >= cap) return;
        if (k == holes.size()) {
            ++found;
            return;
        }
        int r = holes[k] / n, c = holes[k] % n;
        std::uint64_t options = full_mask(n) & ~row_used[r] & ~col_used[c];
        while (options && found < cap) {
            std::uint64_t b = options & -options;
            options &= options - 1;
            row_used[r] |= b;
            col_used[c] |= b;
            search(k + 1);
            row_used[r] &= ~b;
            col_used[c] &= ~b;
        }
    }
};

}  // namespace

std::uint64_t count_completions(const PartialLatinSquare& instance, std::uint64_t cap) {
    if (cap < 1) throw StructuralError("count_completions cap must be >= 1");
    if (!validate(instance).empty()) return 0;
    const int n = instance.order();
    CompletionCounter counter{n, {}, std::vector<std::uint64_t>(n), std::vector<std::uint64_t>(n), cap};
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (const Cell& cell = instance.at(r, c)) {
                counter.row_used[r] |= bit(*cell);
                counter.col_used[c] |= bit(*cell);
            } else {
                counter.holes.push_back(r * n + c);
            }
        }
    }
    counter.search(0);
    return counter.found;
}

}  // namespace rtlab

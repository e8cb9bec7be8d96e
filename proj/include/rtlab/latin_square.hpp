#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rtlab/random.hpp"

namespace rtlab {

/// Largest supported order; domains are stored as 64-bit masks.
inline constexpr int kMaxOrder = 64;

/// A cell holds a symbol in 1..n, or nothing (a hole).
using Cell = std::optional<int>;
inline constexpr std::nullopt_t kHole = std::nullopt;

/// n x n grid of symbols and holes. Construction checks shape and symbol
/// range; the Latin property itself is checked by validate().
class PartialLatinSquare {
public:
    /// All-hole grid of the given order.
    explicit PartialLatinSquare(int order);

    /// Throws StructuralError unless rows form an n x n grid with symbols in 1..n.
    static PartialLatinSquare from_rows(const std::vector<std::vector<Cell>>& rows);

    int order() const noexcept { return order_; }
    const Cell& at(int row, int col) const { return cells_[index(row, col)]; }
    void set(int row, int col, Cell value);

    std::span<const Cell> cells() const noexcept { return cells_; }
    int hole_count() const noexcept;
    bool complete() const noexcept { return hole_count() == 0; }

    friend bool operator==(const PartialLatinSquare&, const PartialLatinSquare&) = default;

private:
    std::size_t index(int row, int col) const;

    int order_;
    std::vector<Cell> cells_;
};

struct LatinViolation {
    enum class Line { Row, Column };
    Line line;
    int index;   // 0-based row or column
    int symbol;  // duplicated symbol

    friend bool operator==(const LatinViolation&, const LatinViolation&) = default;
};

/// Every (row, symbol) and (column, symbol) pair that occurs more than once
/// among filled cells. Empty iff the square is a valid partial Latin square.
std::vector<LatinViolation> validate(const PartialLatinSquare& square);

/// Random complete Latin square, filled row-major with a uniformly random
/// symbol among those that keep the current row completable.
PartialLatinSquare generate_complete(int order, Seed seed);

struct HoleSpec {
    enum class Mode { Unbalanced, Balanced };
    Mode mode = Mode::Unbalanced;
    int count = 0;  // total holes (Unbalanced) or holes per row and column (Balanced)

    static HoleSpec unbalanced(int total) { return {Mode::Unbalanced, total}; }
    static HoleSpec balanced(int per_line) { return {Mode::Balanced, per_line}; }
    int total_holes(int order) const { return mode == Mode::Balanced ? count * order : count; }
};

/// Erases cells of a complete square. Throws StructuralError if the square has
/// holes or the spec is out of range for the order.
PartialLatinSquare poke_holes(const PartialLatinSquare& square, HoleSpec spec, Seed seed);

/// Balanced hole mask (row-major): exactly per_line marks in every row and column.
std::vector<bool> balanced_hole_mask(int order, int per_line, Rng& rng);

/// Number of distinct completions, truncated at cap. Exhaustive, no heuristics.
std::uint64_t count_completions(const PartialLatinSquare& instance, std::uint64_t cap);

}  // namespace rtlab

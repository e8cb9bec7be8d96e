#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "rtlab/latin_square.hpp"

namespace rtlab {

using DomainMask = std::uint64_t;  // bit (v-1) set iff symbol v is possible

constexpr DomainMask symbol_bit(int symbol) noexcept { return DomainMask{1} << (symbol - 1); }

struct Line {
    enum class Kind { Row, Column };
    Kind kind;
    int index;
};

/// Search state of a Latin-square completion: one domain per cell plus
/// incrementally maintained counters. Assigned cells keep a singleton domain.
/// Assignments are queued until propagate() pushes them to their peers.
class DomainState {
public:
    /// Every cell unassigned with the full domain {1..n}.
    explicit DomainState(int order);

    /// Givens assigned (and queued); holes start with the full domain.
    static DomainState from_instance(const PartialLatinSquare& instance);

    int order() const noexcept { return n_; }
    int cell_count() const noexcept { return n_ * n_; }
    int cell(int row, int col) const noexcept { return row * n_ + col; }
    int row_of(int cell) const noexcept { return cell / n_; }
    int col_of(int cell) const noexcept { return cell % n_; }

    DomainMask domain(int cell) const noexcept { return domains_[cell]; }
    int domain_size(int cell) const noexcept { return std::popcount(domains_[cell]); }
    bool assigned(int cell) const noexcept { return values_[cell] != 0; }
    /// Symbol of an assigned cell (1..n).
    int value(int cell) const noexcept { return values_[cell]; }

    int unassigned() const noexcept { return unassigned_; }
    bool solved() const noexcept { return unassigned_ == 0; }
    int row_open(int row) const noexcept { return row_open_[row]; }
    int col_open(int col) const noexcept { return col_open_[col]; }
    /// Sum of domain sizes over unassigned cells.
    long total_domain() const noexcept { return total_domain_; }
    /// Smallest domain among unassigned cells (0 if none are unassigned).
    int min_domain() const noexcept;
    /// Unassigned cells sharing a row or column with the given cell.
    int degree(int cell) const noexcept;

    /// Replaces the domain of an unassigned cell (test and setup use).
    void set_domain(int cell, DomainMask mask);
    /// Assigns a symbol and queues it for propagation.
    void assign(int cell, int symbol);
    /// Removes symbols from an unassigned cell's domain; returns the new size.
    int remove(int cell, DomainMask symbols);

    PartialLatinSquare to_square() const;

    // Propagation bookkeeping.
    std::vector<int>& pending() noexcept { return pending_; }
    void mark_dirty(int cell) noexcept {
        dirty_rows_ |= std::uint64_t{1} << row_of(cell);
        dirty_cols_ |= std::uint64_t{1} << col_of(cell);
    }
    std::uint64_t& dirty_rows() noexcept { return dirty_rows_; }
    std::uint64_t& dirty_cols() noexcept { return dirty_cols_; }

private:
    int n_;
    std::vector<DomainMask> domains_;
    std::vector<std::uint8_t> values_;  // 0 while unassigned
    std::vector<int> row_open_;
    std::vector<int> col_open_;
    std::array<int, kMaxOrder + 1> size_hist_{};  // unassigned cells by domain size
    int unassigned_ = 0;
    long total_domain_ = 0;
    std::vector<int> pending_;
    std::uint64_t dirty_rows_ = 0;
    std::uint64_t dirty_cols_ = 0;
};

}  // namespace rtlab

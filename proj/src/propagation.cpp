#include "rtlab/propagation.hpp"

#include <array>

#include "rtlab/matching.hpp"

namespace rtlab {

namespace {

int line_cell(const DomainState& s, Line line, int k) {
    return line.kind == Line::Kind::Row ? s.cell(line.index, k) : s.cell(k, line.index);
}

}  // namespace

std::optional<int> propagate_alldiff(DomainState& state, Line line) {
    const int n = state.order();
    // Unassigned cells, plus assigned cells whose value still shows up in an
    // open domain (possible when forward checking has not run yet).
    std::array<int, kMaxOrder> cells;
    DomainMask open_values = 0;
    for (int k = 0; k < n; ++k) {
        int cell = line_cell(state, line, k);
        if (!state.assigned(cell)) open_values |= state.domain(cell);
    }
    int size = 0;
    for (int k = 0; k < n; ++k) {
        int cell = line_cell(state, line, k);
        if (!state.assigned(cell) || (state.domain(cell) & open_values)) cells[size++] = cell;
    }
    if (size == 0) return 0;

    std::array<DomainMask, kMaxOrder> adjacency;
    std::array<int, kMaxOrder> mate;
    for (int k = 0; k < size; ++k) {
        adjacency[k] = state.domain(cells[k]);
        mate[k] = -1;
    }
    std::span<const DomainMask> adj(adjacency.data(), size);
    if (max_matching_dense(adj, std::span<int>(mate.data(), size)) < size) return std::nullopt;
    const int m = size;

    // Cells holding each value, and the cell matched to each value.
    std::array<std::uint64_t, kMaxOrder> holders{};
    std::array<int, kMaxOrder> owner;
    owner.fill(-1);
    DomainMask matched_values = 0, all_values = 0;
    for (int k = 0; k < m; ++k) {
        for (DomainMask d = adjacency[k]; d; d &= d - 1) holders[std::countr_zero(d)] |= std::uint64_t{1} << k;
        owner[mate[k]] = k;
        matched_values |= DomainMask{1} << mate[k];
        all_values |= adjacency[k];
    }
    const DomainMask free_values = all_values & ~matched_values;

    // Cell graph: k -> j when j could take k's matched value. Two cells in one
    // strongly connected component can swap along an alternating cycle.
    std::array<std::uint64_t, kMaxOrder> reach;
    std::uint64_t seeds = 0;
    for (int k = 0; k < m; ++k) {
        reach[k] = holders[mate[k]] | (std::uint64_t{1} << k);
        if (adjacency[k] & free_values) seeds |= std::uint64_t{1} << k;
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (reach[i] >> j & 1U) reach[i] |= reach[j];
        }
    }
    // Values matched to cells reachable from a free value lie on an even
    // alternating path and stay supported everywhere.
    std::uint64_t from_free = 0;
    for (std::uint64_t s = seeds; s; s &= s - 1) from_free |= reach[std::countr_zero(s)];

    int pruned = 0;
    for (int x = 0; x < m; ++x) {
        int cell = cells[x];
        if (state.assigned(cell)) continue;
        DomainMask unsupported = 0;
        for (DomainMask d = adjacency[x] & matched_values; d; d &= d - 1) {
            int v = std::countr_zero(d);
            int c = owner[v];
            if (c == x || (from_free >> c & 1U) || (reach[x] >> c & 1U)) continue;
            unsupported |= DomainMask{1} << v;
        }
        if (unsupported) {
            pruned += std::popcount(unsupported);
            state.remove(cell, unsupported);
        }
    }
    return pruned;
}

namespace {

bool assign_singletons(DomainState& state, PropagationCounters& counters) {
    for (int i = 0; i < state.cell_count(); ++i) {
        if (state.assigned(i)) continue;
        int size = state.domain_size(i);
        if (size == 0) return false;
        if (size == 1) {
            state.assign(i, std::countr_zero(state.domain(i)) + 1);
            ++counters.forced_assignments;
        }
    }
    return true;
}

// Pushes queued assignments to their row and column peers.
bool forward_check(DomainState& state, PropagationCounters& counters) {
    const int n = state.order();
    auto& pending = state.pending();
    while (!pending.empty()) {
        int cell = pending.back();
        pending.pop_back();
        int v = state.value(cell);
        DomainMask bit = symbol_bit(v);
        int r = state.row_of(cell), c = state.col_of(cell);
        for (int k = 0; k < 2 * n; ++k) {
            int peer = k < n ? state.cell(r, k) : state.cell(k - n, c);
            if (peer == cell) continue;
            if (state.assigned(peer)) {
                if (state.value(peer) == v) return false;
                continue;
            }
            if (!(state.domain(peer) & bit)) continue;
            int size = state.remove(peer, bit);
            if (size == 0) return false;
            if (size == 1) {
                state.assign(peer, std::countr_zero(state.domain(peer)) + 1);
                ++counters.forced_assignments;
            }
        }
    }
    return true;
}

PropagationResult fail(DomainState& state) {
    state.pending().clear();
    state.dirty_rows() = 0;
    state.dirty_cols() = 0;
    return PropagationResult::Contradiction;
}

}  // namespace

PropagationResult propagate(DomainState& state, PropagationLevel level, PropagationCounters& counters) {
    if (state.unassigned() > 0 && state.min_domain() <= 1 && !assign_singletons(state, counters)) {
        return fail(state);
    }
    for (;;) {
        if (!forward_check(state, counters)) return fail(state);
        if (level == PropagationLevel::ForwardCheck) break;

        Line line{};
        if (state.dirty_rows()) {
            line = {Line::Kind::Row, std::countr_zero(state.dirty_rows())};
            state.dirty_rows() &= state.dirty_rows() - 1;
        } else if (state.dirty_cols()) {
            line = {Line::Kind::Column, std::countr_zero(state.dirty_cols())};
            state.dirty_cols() &= state.dirty_cols() - 1;
        } else {
            break;
        }
        auto pruned = propagate_alldiff(state, line);
        if (!pruned) return fail(state);
        if (*pruned == 0) continue;
        counters.alldiff_prunings += *pruned;
        for (int k = 0; k < state.order(); ++k) {
            int cell = line_cell(state, line, k);
            if (!state.assigned(cell) && state.domain_size(cell) == 1) {
                state.assign(cell, std::countr_zero(state.domain(cell)) + 1);
                ++counters.forced_assignments;
            }
        }
        // Filtering is idempotent on its own line; only peers need another pass.
        if (line.kind == Line::Kind::Row) state.dirty_rows() &= ~(std::uint64_t{1} << line.index);
        else state.dirty_cols() &= ~(std::uint64_t{1} << line.index);
    }
    state.dirty_rows() = 0;
    state.dirty_cols() = 0;
    return PropagationResult::Fixpoint;
}

}  // namespace rtlab

#include "rtlab/solver.hpp"

#include <limits>
#include <vector>

#include "rtlab/errors.hpp"

namespace rtlab {

namespace {

int nth_symbol(DomainMask mask, std::uint64_t k) {
    for (; k > 0; --k) mask &= mask - 1;
    return std::countr_zero(mask) + 1;
}

int random_symbol(DomainMask mask, Rng& rng) { return nth_symbol(mask, uniform_index(rng, std::popcount(mask))); }

}  // namespace

Branch select_branch(const DomainState& state, Rng& rng) {
    int best_size = std::numeric_limits<int>::max();
    int best_degree = -1;
    std::vector<int> ties;
    for (int i = 0; i < state.cell_count(); ++i) {
        if (state.assigned(i)) continue;
        int size = state.domain_size(i);
        if (size > best_size) continue;
        int degree = state.degree(i);
        if (size < best_size || degree > best_degree) {
            best_size = size;
            best_degree = degree;
            ties.clear();
        } else if (degree < best_degree) {
            continue;
        }
        ties.push_back(i);
    }
    if (ties.empty()) throw StructuralError("select_branch needs an unassigned cell");
    int cell = ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
    return {cell, random_symbol(state.domain(cell), rng)};
}

namespace {

class Search {
public:
    Search(const PartialLatinSquare& instance, const SolverConfig& config, Seed seed)
        : config_(config), rng_(make_rng(seed)), registry_(FeatureRegistry::standard(config.instrument)) {
        record_.seed = seed;
        states_.push_back(DomainState::from_instance(instance));
        if (config.trace_enabled) record_.trace.emplace();
    }

    RunRecord run() {
        auto& root = states_.front();
        bool alive = propagate(root, config_.propagation, counters_.propagation) == PropagationResult::Fixpoint;
        record_.post_propagation_size = root.unassigned();
        counters_.visit(0);
        if (!alive) {
            counters_.dead_end(0);
            return finish(Outcome::Exhausted, nullptr);
        }
        if (root.solved()) return finish(Outcome::Solved, &root);
        frames_.push_back({-1, 0});

        while (!frames_.empty()) {
            const int depth = static_cast<int>(frames_.size()) - 1;
            Frame& frame = frames_.back();
            DomainState& parent = states_[depth];
            int value;
            if (frame.cell < 0) {
                if (cutoff_reached()) return finish(Outcome::Cutoff, nullptr);
                Branch b = select_branch(parent, rng_);
                frame.cell = b.cell;
                frame.remaining = parent.domain(b.cell) & ~symbol_bit(b.value);
                value = b.value;
            } else if (frame.remaining) {
                if (cutoff_reached()) return finish(Outcome::Cutoff, nullptr);
                value = random_symbol(frame.remaining, rng_);
                frame.remaining &= ~symbol_bit(value);
            } else {
                // Every value at this cell failed.
                frames_.pop_back();
                ++counters_.backtracks;
                continue;
            }

            counters_.depth = depth;
            if (record_.trace && static_cast<int>(record_.trace->size()) < config_.horizon) {
                record_.trace->push_back(snapshot(parent, counters_, registry_));
            }
            ++record_.choice_points;

            if (static_cast<int>(states_.size()) <= depth + 1) states_.push_back(parent);
            else states_[depth + 1] = parent;
            // parent may dangle after push_back; index from here on.
            DomainState& child = states_[depth + 1];
            child.assign(frames_.back().cell, value);
            bool ok = propagate(child, config_.propagation, counters_.propagation) == PropagationResult::Fixpoint;
            counters_.visit(depth + 1);
            if (!ok) {
                counters_.dead_end(depth + 1);
                ++counters_.backtracks;
                continue;
            }
            if (child.solved()) return finish(Outcome::Solved, &child);
            frames_.push_back({-1, 0});
        }
        return finish(Outcome::Exhausted, nullptr);
    }

private:
    struct Frame {
        int cell;
        DomainMask remaining;  // values not yet tried at cell
    };

    bool cutoff_reached() const { return config_.cutoff && record_.choice_points >= *config_.cutoff; }

    RunRecord finish(Outcome outcome, const DomainState* solved) {
        record_.outcome = outcome;
        if (solved) record_.assignment = solved->to_square();
        return std::move(record_);
    }

    const SolverConfig& config_;
    Rng rng_;
    FeatureRegistry registry_;
    SearchCounters counters_;
    std::vector<DomainState> states_;  // states_[d]: propagated state at depth d
    std::vector<Frame> frames_;
    RunRecord record_;
};

}  // namespace

RunRecord solve(const PartialLatinSquare& instance, const SolverConfig& config, Seed seed) {
    if (!validate(instance).empty()) throw StructuralError("instance violates the Latin property");
    if (config.cutoff && *config.cutoff < 1) throw StructuralError("cutoff must be at least 1");
    if (config.horizon < 1) throw StructuralError("horizon must be at least 1");
    return Search(instance, config, seed).run();
}

}  // namespace rtlab

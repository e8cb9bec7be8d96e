#include "rtlab/experiment.hpp"

#include <algorithm>

#include "rtlab/errors.hpp"
#include "rtlab/parallel.hpp"
#include "rtlab/summary.hpp"

namespace rtlab {

namespace {

// Independent seed streams for instance construction and for runs.
constexpr std::uint64_t kSquareSalt = 0x51;
constexpr std::uint64_t kHoleSalt = 0x52;
constexpr std::uint64_t kRunSalt = 0x53;
constexpr std::uint64_t kPeakSalt = 0x54;

struct RunSlot {
    long choice_points = 0;
    bool solved = false;
    bool capped = false;
    std::optional<SummaryVector> summary;
};

RunSlot execute(const PartialLatinSquare& instance, const SolverConfig& config, Seed seed, ExperimentMode mode,
                const FeatureRegistry& registry) {
    auto rec = solve(instance, config, seed);
    if (rec.outcome == Outcome::Exhausted) throw DataError("instance has no completion");
    RunSlot slot;
    slot.choice_points = rec.choice_points;
    slot.solved = rec.solved();
    slot.capped = rec.outcome == Outcome::Cutoff;
    if (rec.choice_points >= config.horizon && rec.trace && rec.trace->size() >= 2) {
        auto s = summarize(*rec.trace, config.horizon, registry);
        if (mode == ExperimentMode::MultiInstance) s = normalize_for_multi(s, rec.post_propagation_size, registry);
        s.censored = slot.capped;
        slot.summary = std::move(s);
    }
    return slot;
}

LabeledDataset collect(const std::vector<RunSlot>& slots, std::size_t begin, std::size_t end,
                       const std::vector<std::string>& columns, const ExperimentSpec& spec, CensoringLog& log) {
    LabeledDataset data;
    data.columns = columns;
    data.mode = spec.mode;
    data.horizon = spec.solver.horizon;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& s = slots[i];
        ++log.launched;
        if (!s.summary) {
            ++log.under_horizon;
            continue;
        }
        if (s.capped) ++log.capped; else ++log.rows;
        data.rows.push_back({*s.summary, s.choice_points, RunLabel::Long});
    }
    return data;
}

}  // namespace

PartialLatinSquare experiment_instance(int order, HoleSpec holes, Seed master, std::uint64_t index) {
    auto full = generate_complete(order, derive_seed(master, index, kSquareSalt));
    return poke_holes(full, holes, derive_seed(master, index, kHoleSalt));
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.solver.horizon < 2) throw DataError("horizon must be at least 2");
    if (spec.solver.cutoff && *spec.solver.cutoff < spec.solver.horizon) {
        throw DataError("safety cutoff must not be below the horizon");
    }
    if (spec.train_runs == 0) throw DataError("experiment needs at least one training run");

    ExperimentResult result;
    if (spec.mode == ExperimentMode::SingleInstance) {
        result.instance = spec.instance ? *spec.instance : experiment_instance(spec.order, spec.holes, spec.seed, 0);
        if (!validate(*result.instance).empty()) throw StructuralError("instance violates the Latin property");
    }

    SolverConfig config = spec.solver;
    config.trace_enabled = true;
    const auto registry = FeatureRegistry::standard(config.instrument);
    const std::size_t total = spec.train_runs + spec.test_runs;
    std::vector<RunSlot> slots(total);
    parallel_for(total, spec.threads, [&](std::size_t i) {
        const Seed run_seed = derive_seed(spec.seed, i, kRunSalt);
        if (spec.mode == ExperimentMode::SingleInstance) {
            slots[i] = execute(*result.instance, config, run_seed, spec.mode, registry);
        } else {
            auto inst = experiment_instance(spec.order, spec.holes, spec.seed, i);
            slots[i] = execute(inst, config, run_seed, spec.mode, registry);
        }
    });

    const auto columns = registry.column_names();
    result.train = collect(slots, 0, spec.train_runs, columns, spec, result.train_log);
    result.test = collect(slots, spec.train_runs, total, columns, spec, result.test_log);
    if (result.train.rows.empty()) {
        throw DataError("no training run reached the horizon; nothing to learn from");
    }

    std::vector<long> runtimes;
    for (const auto& row : result.train.rows) runtimes.push_back(row.runtime);
    relabel(result.train, label_by_median(runtimes).median);
    relabel(result.test, result.train.median);

    std::vector<long> solved;
    std::size_t unsolved = 0;
    for (std::size_t i = 0; i < spec.train_runs; ++i) {
        if (slots[i].solved) solved.push_back(slots[i].choice_points); else ++unsolved;
    }
    result.rtd = EmpiricalRTD(std::move(solved), unsolved);
    return result;
}

PeakSearch search_heavy_tailed_instance(int order, HoleSpec holes, const SolverConfig& config, Seed seed,
                                        std::size_t probe_runs, double min_ratio, std::size_t max_candidates,
                                        int threads) {
    if (probe_runs == 0) throw DataError("peak search needs at least one probe run");
    SolverConfig cfg = config;
    cfg.trace_enabled = false;
    PeakSearch out;
    std::optional<PartialLatinSquare> heaviest;
    for (std::size_t k = 0; k < max_candidates; ++k) {
        auto inst = experiment_instance(order, holes, derive_seed(seed, k, kPeakSalt), 0);
        std::vector<RunRecord> runs(probe_runs);
        parallel_for(probe_runs, threads, [&](std::size_t i) {
            runs[i] = solve(inst, cfg, derive_seed(seed, k * probe_runs + i, kRunSalt));
        });
        std::vector<long> lengths;
        PeakCandidate cand{k};
        for (const auto& r : runs) {
            lengths.push_back(r.choice_points);
            if (r.solved()) ++cand.solved;
        }
        cand.median = label_by_median(lengths).median;
        cand.max = static_cast<double>(*std::max_element(lengths.begin(), lengths.end()));
        cand.tail_ratio = cand.max / std::max(cand.median, 1.0);
        if (out.candidates.empty() || cand.tail_ratio > out.candidates[out.heaviest].tail_ratio) {
            out.heaviest = k;
            heaviest = inst;
        }
        out.candidates.push_back(cand);
        if (cand.tail_ratio >= min_ratio) {
            out.chosen = k;
            out.instance = inst;
            return out;
        }
    }
    out.instance = heaviest;
    return out;
}

}  // namespace rtlab

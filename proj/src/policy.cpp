#include "rtlab/policy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "rtlab/errors.hpp"
#include "rtlab/parallel.hpp"

namespace rtlab {

EmpiricalRTD::EmpiricalRTD(std::vector<long> solved_lengths, std::size_t unsolved)
    : sorted_(std::move(solved_lengths)), unsolved_(unsolved) {
    for (long t : sorted_) {
        if (t < 0) throw DataError("run lengths must be non-negative");
    }
    std::sort(sorted_.begin(), sorted_.end());
    prefix_.assign(sorted_.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted_.size(); ++i) prefix_[i + 1] = prefix_[i] + static_cast<double>(sorted_[i]);
}

double EmpiricalRTD::cdf(long t) const {
    if (size() == 0) return 0.0;
    auto le = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
    return static_cast<double>(le) / static_cast<double>(size());
}

double EmpiricalRTD::truncated_mean(long c) const {
    if (size() == 0) return 0.0;
    auto le = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), c) - sorted_.begin());
    double above = static_cast<double>(size() - le);
    return (prefix_[le] + above * static_cast<double>(c)) / static_cast<double>(size());
}

std::optional<long> EmpiricalRTD::quantile(double q) const {
    if (size() == 0) throw DataError("quantile of an empty distribution");
    q = std::clamp(q, 0.0, 1.0);
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(size())));
    rank = std::max<std::size_t>(rank, 1);
    if (rank > sorted_.size()) return std::nullopt;
    return sorted_[rank - 1];
}

std::optional<long> EmpiricalRTD::sample(Rng& rng) const {
    auto i = uniform_index(rng, size());
    if (i < sorted_.size()) return sorted_[i];
    return std::nullopt;
}

long luby_term(long i) {
    if (i < 1) throw DataError("Luby index starts at 1");
    for (;;) {
        // smallest k with i <= 2^k - 1
        int k = 1;
        while (((1L << k) - 1) < i) ++k;
        if (i == (1L << k) - 1) return 1L << (k - 1);
        i -= (1L << (k - 1)) - 1;
    }
}

Expectation expected_time_fixed(const EmpiricalRTD& rtd, long c) {
    if (c < 1) throw DataError("fixed cutoff must be at least 1");
    double p = rtd.cdf(c);
    if (p <= 0.0) return Expectation::infinite();
    return Expectation::of(rtd.truncated_mean(c) / p);
}

FixedOptimum optimal_fixed_cutoff(const EmpiricalRTD& rtd) {
    if (rtd.size() == 0) throw DataError("optimal cutoff of an empty distribution");
    std::vector<long> candidates{1};
    for (long t : rtd.lengths()) {
        if (t > candidates.back()) candidates.push_back(t);
    }
    FixedOptimum best{candidates.front(), expected_time_fixed(rtd, candidates.front())};
    for (long c : candidates) {
        auto e = expected_time_fixed(rtd, c);
        if (e.unbounded) continue;
        if (best.expected.unbounded || e.value < best.expected.value) best = {c, e};
    }
    return best;
}

Expectation dynamic_expected_runs(double accuracy, double p_observe, double p_limit) {
    double denom = accuracy * (p_limit - p_observe) + p_observe;
    if (!(denom > 0.0)) return Expectation::infinite();
    return Expectation::of(1.0 / denom);
}

double dynamic_expected_run_length_ub(long observe, long limit, double accuracy, double p_limit) {
    double continue_prob = accuracy * p_limit + (1.0 - accuracy) * (1.0 - p_limit);
    return static_cast<double>(observe) + static_cast<double>(limit - observe) * continue_prob;
}

Expectation dynamic_expected_total_ub(long observe, long limit, double accuracy, double p_observe, double p_limit) {
    auto runs = dynamic_expected_runs(accuracy, p_observe, p_limit);
    if (runs.unbounded) return runs;
    return Expectation::of(runs.value * dynamic_expected_run_length_ub(observe, limit, accuracy, p_limit));
}

RestartPolicy RestartPolicy::fixed(long c) {
    if (c < 1) throw DataError("fixed cutoff must be at least 1");
    RestartPolicy p;
    p.kind = Kind::Fixed;
    p.cutoff = c;
    return p;
}

RestartPolicy RestartPolicy::luby(long scale) {
    if (scale < 1) throw DataError("Luby scale must be at least 1");
    RestartPolicy p;
    p.kind = Kind::Luby;
    p.scale = scale;
    return p;
}

RestartPolicy RestartPolicy::dynamic(long observe, std::optional<long> limit) {
    if (observe < 0) throw DataError("observation length must be non-negative");
    if (limit && *limit <= observe) throw DataError("dynamic policy needs O < L");
    RestartPolicy p;
    p.kind = Kind::Dynamic;
    p.observe = observe;
    p.limit = limit;
    return p;
}

namespace {

std::optional<long> within(std::optional<long> length, std::optional<long> limit) {
    if (length && limit && *length > *limit) return std::nullopt;
    return length;
}

}  // namespace

SampledRun RtdRunSource::draw(Rng& rng, std::optional<long> limit, bool) const {
    return {within(rtd_.sample(rng), limit), std::nullopt};
}

DatasetRunSource::DatasetRunSource(const EmpiricalRTD& rtd, const LabeledDataset& rows) : rows_(rows.rows) {
    if (rows_.empty()) throw DataError("dataset run source needs at least one row");
    for (long t : rtd.lengths()) {
        if (t < rows.horizon) early_.push_back(t);
    }
    early_fraction_ = rtd.size() ? static_cast<double>(early_.size()) / static_cast<double>(rtd.size()) : 0.0;
}

SampledRun DatasetRunSource::draw(Rng& rng, std::optional<long> limit, bool) const {
    if (!early_.empty() && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < early_fraction_) {
        return {within(early_[uniform_index(rng, early_.size())], limit), std::nullopt};
    }
    const auto& row = rows_[uniform_index(rng, rows_.size())];
    std::optional<long> length;
    if (!row.x.censored) length = row.runtime;
    return {within(length, limit), row.x};
}

SolverRunSource::SolverRunSource(PartialLatinSquare instance, SolverConfig config)
    : instance_(std::move(instance)), config_(config), registry_(FeatureRegistry::standard(config.instrument)) {}

SampledRun SolverRunSource::draw(Rng& rng, std::optional<long> limit, bool want_summary) const {
    SolverConfig cfg = config_;
    if (limit) cfg.cutoff = cfg.cutoff ? std::min(*cfg.cutoff, std::max(*limit, 1L)) : std::max(*limit, 1L);
    cfg.trace_enabled = want_summary;
    auto rec = solve(instance_, cfg, Seed{rng()});
    SampledRun out;
    if (rec.solved()) out.length = within(rec.choice_points, limit);
    if (want_summary && rec.trace && rec.trace->size() >= 2) {
        out.summary = summarize(*rec.trace, cfg.horizon, registry_);
    }
    return out;
}

SyntheticPredictor::SyntheticPredictor(double accuracy) : accuracy_(accuracy) {
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw DataError("accuracy must lie in [0, 1]");
}

bool SyntheticPredictor::continue_run(const SampledRun& run, std::optional<long> limit, Rng& rng) const {
    bool truth = run.length && (!limit || *run.length <= *limit);
    bool correct = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < accuracy_;
    return correct ? truth : !truth;
}

bool ModelPredictor::continue_run(const SampledRun& run, std::optional<long>, Rng&) const {
    if (!run.summary) throw DataError("model predictor needs the run's summary at the observation point");
    return predict(tree_, run.summary->values) > 0.5;
}

namespace {

struct TrialResult {
    double cost = 0;
    double runs = 0;
    bool exhausted = false;
};

TrialResult run_trial(const RunSource& source, const RestartPolicy& policy, const Predictor* predictor, Rng& rng,
                      std::uint64_t budget) {
    TrialResult out;
    const bool want_summary = predictor && predictor->needs_summary();
    for (std::uint64_t i = 1; i <= budget; ++i) {
        out.runs += 1;
        switch (policy.kind) {
            case RestartPolicy::Kind::Fixed:
            case RestartPolicy::Kind::Luby: {
                long c = policy.kind == RestartPolicy::Kind::Fixed ? policy.cutoff
                                                                    : policy.scale * luby_term(static_cast<long>(i));
                auto run = source.draw(rng, c, false);
                if (run.length) {
                    out.cost += static_cast<double>(*run.length);
                    return out;
                }
                out.cost += static_cast<double>(c);
                break;
            }
            case RestartPolicy::Kind::Dynamic: {
                auto run = source.draw(rng, policy.limit, want_summary);
                if (run.length && *run.length <= policy.observe) {
                    out.cost += static_cast<double>(*run.length);
                    return out;
                }
                if (!predictor->continue_run(run, policy.limit, rng)) {
                    out.cost += static_cast<double>(policy.observe);
                    break;
                }
                if (run.length) {
                    out.cost += static_cast<double>(*run.length);
                    return out;
                }
                if (!policy.limit) {  // continued forever
                    out.exhausted = true;
                    return out;
                }
                out.cost += static_cast<double>(*policy.limit);
                break;
            }
        }
    }
    out.exhausted = true;
    return out;
}

double nearest_rank(const std::vector<double>& sorted, double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

PolicyStats simulate_policy(const RunSource& source, const RestartPolicy& policy, const Predictor* predictor,
                            const SimulationOptions& options) {
    if (options.trials < 1) throw DataError("simulation needs at least one trial");
    if (policy.kind == RestartPolicy::Kind::Dynamic && !predictor) {
        throw DataError("dynamic policy simulation needs a predictor");
    }
    std::vector<TrialResult> results(options.trials);
    std::atomic<bool> exhausted{false};
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
        if (exhausted.load(std::memory_order_relaxed)) return;
        auto rng = make_rng(derive_seed(options.seed, t));
        results[t] = run_trial(source, policy, predictor, rng, options.run_budget);
        if (results[t].exhausted) exhausted = true;
    });

    PolicyStats stats;
    stats.trials = options.trials;
    if (exhausted) {
        stats.unbounded = true;
        return stats;
    }
    const double n = static_cast<double>(options.trials);
    double cost_sum = 0, cost_sq = 0, runs_sum = 0, runs_sq = 0;
    std::vector<double> costs;
    costs.reserve(options.trials);
    for (const auto& r : results) {
        cost_sum += r.cost;
        cost_sq += r.cost * r.cost;
        runs_sum += r.runs;
        runs_sq += r.runs * r.runs;
        costs.push_back(r.cost);
    }
    stats.mean_cost = cost_sum / n;
    stats.mean_runs = runs_sum / n;
    if (options.trials > 1) {
        double cost_var = std::max(0.0, (cost_sq - n * stats.mean_cost * stats.mean_cost) / (n - 1));
        double runs_var = std::max(0.0, (runs_sq - n * stats.mean_runs * stats.mean_runs) / (n - 1));
        stats.cost_se = std::sqrt(cost_var / n);
        stats.runs_se = std::sqrt(runs_var / n);
    }
    std::sort(costs.begin(), costs.end());
    stats.p50 = nearest_rank(costs, 0.50);
    stats.p90 = nearest_rank(costs, 0.90);
    stats.p99 = nearest_rank(costs, 0.99);
    return stats;
}

std::vector<DynamicLimitChoice> scan_dynamic_limits(const EmpiricalRTD& rtd, long observe, double accuracy,
                                                    int quantile_steps) {
    std::vector<long> limits;
    for (int k = 1; k <= quantile_steps; ++k) {
        auto q = rtd.quantile(static_cast<double>(k) / quantile_steps);
        if (q && *q > observe && std::find(limits.begin(), limits.end(), *q) == limits.end()) limits.push_back(*q);
    }
    std::vector<DynamicLimitChoice> out;
    const double p_observe = rtd.cdf(observe);
    for (long l : limits) {
        out.push_back({l, dynamic_expected_total_ub(observe, l, accuracy, p_observe, rtd.cdf(l))});
    }
    std::stable_sort(out.begin(), out.end(), [](const DynamicLimitChoice& a, const DynamicLimitChoice& b) {
        if (a.total_ub.unbounded != b.total_ub.unbounded) return !a.total_ub.unbounded;
        return a.total_ub.value < b.total_ub.value;
    });
    return out;
}

}  // namespace rtlab

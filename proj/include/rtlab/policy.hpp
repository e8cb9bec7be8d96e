#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rtlab/learn.hpp"
#include "rtlab/random.hpp"
#include "rtlab/solver.hpp"

namespace rtlab {

/// An expectation that may be infinite. Unbounded results are values, not
/// errors, so they can be tabulated.
struct Expectation {
    double value = 0;
    bool unbounded = false;

    static Expectation of(double v) { return {v, false}; }
    static Expectation infinite() { return {0, true}; }
};

/// Sample distribution of unrestarted run lengths (choice points). Runs that
/// never finished (hit a safety cap) count toward the total but never toward
/// P(T <= t).
class EmpiricalRTD {
public:
    explicit EmpiricalRTD(std::vector<long> solved_lengths, std::size_t unsolved = 0);

    std::span<const long> lengths() const noexcept { return sorted_; }
    std::size_t unsolved() const noexcept { return unsolved_; }
    std::size_t size() const noexcept { return sorted_.size() + unsolved_; }

    /// Fraction of runs with T <= t.
    double cdf(long t) const;
    /// E[min(T, c)] = sum over t = 1..c of (1 - P(t - 1)).
    double truncated_mean(long c) const;
    /// Empirical quantile among all runs; nullopt when it falls on an unsolved run.
    std::optional<long> quantile(double q) const;
    /// One run length drawn uniformly from the sample; nullopt for an unsolved run.
    std::optional<long> sample(Rng& rng) const;

private:
    std::vector<long> sorted_;
    std::vector<double> prefix_;  // prefix_[i] = sum of the i smallest lengths
    std::size_t unsolved_;
};

/// Luby et al. universal schedule: 1, 1, 2, 1, 1, 2, 4, 1, ...
long luby_term(long i);

/// Expected total steps under restarts with fixed cutoff c:
/// E[min(T, c)] / P(c). Unbounded when no run finishes by c.
Expectation expected_time_fixed(const EmpiricalRTD& rtd, long c);

struct FixedOptimum {
    long cutoff = 0;
    Expectation expected;
};

/// Minimizes expected_time_fixed over 1 and the distinct observed lengths
/// (the objective only drops at those points); smallest cutoff wins ties.
FixedOptimum optimal_fixed_cutoff(const EmpiricalRTD& rtd);

/// E(N) = 1 / (A (P_L - P_O) + P_O).
Expectation dynamic_expected_runs(double accuracy, double p_observe, double p_limit);

/// E_ub(R) = O + (L - O)(A P_L + (1 - A)(1 - P_L)).
double dynamic_expected_run_length_ub(long observe, long limit, double accuracy, double p_limit);

/// E(N) * E_ub(R).
Expectation dynamic_expected_total_ub(long observe, long limit, double accuracy, double p_observe, double p_limit);

struct RestartPolicy {
    enum class Kind { Fixed, Luby, Dynamic };
    Kind kind = Kind::Fixed;
    long cutoff = 1;                // Fixed
    long scale = 1;                 // Luby base unit
    long observe = 0;               // Dynamic O
    std::optional<long> limit;      // Dynamic L; nullopt = no limit

    static RestartPolicy fixed(long c);
    static RestartPolicy luby(long scale);
    static RestartPolicy dynamic(long observe, std::optional<long> limit);
};

/// Outcome of one unrestarted run as seen by a policy: its length if it
/// finished within the requested limit, plus the summary at the observation
/// point when one was asked for.
struct SampledRun {
    std::optional<long> length;
    std::optional<SummaryVector> summary;
};

/// Supplies independent runs. Implementations are safe for concurrent draw() calls.
class RunSource {
public:
    virtual ~RunSource() = default;
    /// A fresh run; length is reported only when it is <= limit (if any).
    virtual SampledRun draw(Rng& rng, std::optional<long> limit, bool want_summary) const = 0;
};

/// Resamples run lengths from an empirical distribution.
class RtdRunSource : public RunSource {
public:
    explicit RtdRunSource(EmpiricalRTD rtd) : rtd_(std::move(rtd)) {}
    SampledRun draw(Rng& rng, std::optional<long> limit, bool want_summary) const override;

private:
    EmpiricalRTD rtd_;
};

/// Resamples recorded runs: with the RTD's frequency of runs shorter than the
/// horizon it returns one of those, otherwise a dataset row (length and
/// summary). Dataset rows marked censored count as unfinished.
class DatasetRunSource : public RunSource {
public:
    DatasetRunSource(const EmpiricalRTD& rtd, const LabeledDataset& rows);
    SampledRun draw(Rng& rng, std::optional<long> limit, bool want_summary) const override;

private:
    std::vector<long> early_;
    double early_fraction_;
    std::vector<DatasetRow> rows_;
};

/// Live solver runs on one instance, each with a fresh seed from the rng.
class SolverRunSource : public RunSource {
public:
    SolverRunSource(PartialLatinSquare instance, SolverConfig config);
    SampledRun draw(Rng& rng, std::optional<long> limit, bool want_summary) const override;

private:
    PartialLatinSquare instance_;
    SolverConfig config_;
    FeatureRegistry registry_;
};

/// Decides at the observation point whether a run is worth continuing to L.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual bool needs_summary() const { return false; }
    virtual bool continue_run(const SampledRun& run, std::optional<long> limit, Rng& rng) const = 0;
};

/// Emits the true answer (finishes within L) with probability accuracy.
class SyntheticPredictor : public Predictor {
public:
    explicit SyntheticPredictor(double accuracy);
    bool continue_run(const SampledRun& run, std::optional<long> limit, Rng& rng) const override;

private:
    double accuracy_;
};

/// Continues iff the tree gives P(SHORT) > 0.5 for the run's summary.
class ModelPredictor : public Predictor {
public:
    explicit ModelPredictor(DecisionTreeModel tree) : tree_(std::move(tree)) {}
    bool needs_summary() const override { return true; }
    bool continue_run(const SampledRun& run, std::optional<long> limit, Rng& rng) const override;

private:
    DecisionTreeModel tree_;
};

struct PolicyStats {
    std::size_t trials = 0;
    bool unbounded = false;  // some trial exhausted the run budget
    double mean_cost = 0;
    double cost_se = 0;
    double mean_runs = 0;
    double runs_se = 0;
    double p50 = 0, p90 = 0, p99 = 0;  // of per-trial total cost
};

struct SimulationOptions {
    std::size_t trials = 10000;
    Seed seed{1};
    std::uint64_t run_budget = 1'000'000;  // runs per trial before declaring UNBOUNDED
    int threads = 1;
};

/// Monte Carlo execution of a policy until success, once per trial. Trial t
/// draws from its own stream derive_seed(seed, t). The predictor is required
/// for DYNAMIC policies only.
PolicyStats simulate_policy(const RunSource& source, const RestartPolicy& policy, const Predictor* predictor,
                            const SimulationOptions& options);

struct DynamicLimitChoice {
    long limit;
    Expectation total_ub;
};

/// Scans L over distinct RTD quantiles above O and returns the analytic
/// upper bound for each, best first.
std::vector<DynamicLimitChoice> scan_dynamic_limits(const EmpiricalRTD& rtd, long observe, double accuracy,
                                                    int quantile_steps = 20);

}  // namespace rtlab

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rtlab/errors.hpp"
#include "rtlab/policy.hpp"

using namespace rtlab;
using Catch::Approx;

namespace {

EmpiricalRTD two_point() {
    std::vector<long> t(50, 1);
    t.insert(t.end(), 50, 1'000'000);
    return EmpiricalRTD(t);
}

EmpiricalRTD lognormal(std::size_t count, double mu, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> d(mu, sigma);
    std::vector<long> t;
    for (std::size_t i = 0; i < count; ++i) t.push_back(std::max(1L, std::lround(d(rng))));
    return EmpiricalRTD(t);
}

SimulationOptions options(std::size_t trials, std::uint64_t seed = 1) {
    SimulationOptions o;
    o.trials = trials;
    o.seed = Seed{seed};
    return o;
}

}  // namespace

TEST_CASE("empirical RTD basics", "[policy]") {
    EmpiricalRTD r({5, 1, 3, 3}, 1);
    CHECK(r.size() == 5);
    CHECK(r.lengths()[0] == 1);
    CHECK(r.cdf(0) == 0);
    CHECK(r.cdf(3) == Approx(0.6));
    CHECK(r.cdf(1'000'000) == Approx(0.8));
    CHECK(r.truncated_mean(1) == Approx(1.0));
    CHECK(r.truncated_mean(4) == Approx((1 + 3 + 3 + 4 + 4) / 5.0));
    CHECK(r.quantile(0.5) == 3);
    CHECK_FALSE(r.quantile(1.0));
    EmpiricalRTD empty({}, 0);
    CHECK(empty.cdf(100) == 0);
    CHECK_THROWS_AS(optimal_fixed_cutoff(empty), DataError);
    CHECK_THROWS_AS(EmpiricalRTD({-1, 2}), DataError);
    CHECK_NOTHROW(EmpiricalRTD({}, 4));
}

TEST_CASE("truncated mean agrees with the survival-sum oracle", "[policy]") {
    auto r = lognormal(300, 4, 1.5, 2);
    std::vector<long> lengths(r.lengths().begin(), r.lengths().end());
    for (long c : {1L, 2L, 10L, 55L, 300L, 2000L}) {
        auto e = expected_time_fixed(r, c);
        REQUIRE_FALSE(e.unbounded);
        REQUIRE(e.value == Approx(oracle::fixed_cutoff_cost(lengths, 0, c)).epsilon(1e-12));
    }
    EmpiricalRTD capped({4, 9, 9, 20}, 3);
    std::vector<long> few{4, 9, 9, 20};
    for (long c = 4; c < 30; ++c) REQUIRE(expected_time_fixed(capped, c).value == Approx(oracle::fixed_cutoff_cost(few, 3, c)));
}

TEST_CASE("luby sequence", "[policy]") {
    std::vector<long> first;
    for (long i = 1; i <= 8; ++i) first.push_back(luby_term(i));
    CHECK(first == std::vector<long>{1, 1, 2, 1, 1, 2, 4, 1});
    CHECK(luby_term(15) == 8);
    for (int k = 1; k < 40; ++k) REQUIRE(luby_term((1L << k) - 1) == (1L << (k - 1)));
    auto oracle_terms = oracle::luby_prefix(5000);
    for (long i = 1; i <= 5000; ++i) REQUIRE(luby_term(i) == oracle_terms[i - 1]);
    CHECK_THROWS(luby_term(0));
}

TEST_CASE("expected_time_fixed examples", "[policy]") {
    EmpiricalRTD ones(std::vector<long>(10, 1));
    for (long c : {1L, 5L, 100L}) CHECK(expected_time_fixed(ones, c).value == 1.0);
    auto tp = two_point();
    CHECK(expected_time_fixed(tp, 1).value == Approx(2.0));
    CHECK(expected_time_fixed(tp, 1'000'000).value == Approx(500'000.5));
    EmpiricalRTD late({10, 20});
    CHECK(expected_time_fixed(late, 9).unbounded);
}

TEST_CASE("optimal fixed cutoff", "[policy]") {
    auto tp = optimal_fixed_cutoff(two_point());
    CHECK(tp.cutoff == 1);
    CHECK(tp.expected.value == Approx(2.0));

    auto flat = optimal_fixed_cutoff(EmpiricalRTD(std::vector<long>(7, 42)));
    CHECK(flat.cutoff == 42);
    CHECK(flat.expected.value == Approx(42.0));

    std::vector<long> uniform;
    for (long t = 1; t <= 100; ++t) uniform.push_back(t);
    EmpiricalRTD u(uniform);
    long best_c = 0;
    double best = INFINITY;
    for (long c = 1; c <= 100; ++c) {
        double v = oracle::fixed_cutoff_cost(uniform, 0, c);
        if (v < best - 1e-12) best = v, best_c = c;
    }
    auto scan = optimal_fixed_cutoff(u);
    CHECK(scan.cutoff == best_c);
    CHECK(scan.expected.value == Approx(best));

    for (std::uint64_t s = 0; s < 10; ++s) {
        auto r = lognormal(80, 2.5, 1.2, s);
        std::vector<long> lengths(r.lengths().begin(), r.lengths().end());
        double brute = INFINITY;
        for (long c = 1; c <= lengths.back(); ++c) brute = std::min(brute, oracle::fixed_cutoff_cost(lengths, 0, c));
        REQUIRE(optimal_fixed_cutoff(r).expected.value == Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("dynamic closed forms", "[policy]") {
    CHECK(dynamic_expected_runs(1, 0, 0.25).value == Approx(4));
    CHECK(dynamic_expected_runs(0, 0.2, 0.9).value == Approx(5));
    CHECK(dynamic_expected_runs(0.9, 0.1, 0.5).value == Approx(1 / 0.46));
    CHECK(dynamic_expected_runs(0.5, 0, 0).unbounded);

    CHECK(dynamic_expected_run_length_ub(1000, 5000, 1, 0) == Approx(1000));
    CHECK(dynamic_expected_run_length_ub(1000, 5000, 1, 1) == Approx(5000));
    CHECK(dynamic_expected_run_length_ub(1000, 5000, 0.9, 0.5) == Approx(3000));

    CHECK(dynamic_expected_total_ub(1000, 5000, 1, 0, 1).value == Approx(5000));
    CHECK(dynamic_expected_total_ub(1000, 5000, 0.9, 0.1, 0.5).value == Approx(6521.739).epsilon(1e-6));

    for (double po : {0.0, 0.1, 0.3})
        for (double pl : {0.35, 0.6, 1.0}) {
            CHECK(dynamic_expected_runs(0, po, pl).value == Approx(po > 0 ? 1 / po : 0).margin(po > 0 ? 0 : 1e300));
            CHECK(dynamic_expected_runs(1, po, pl).value == Approx(1 / pl));
            double previous = INFINITY;
            for (double a = 0.05; a <= 1.0; a += 0.05) {
                double v = dynamic_expected_runs(a, po, pl).value;
                REQUIRE(v <= previous + 1e-12);
                previous = v;
            }
        }
}

TEST_CASE("policy factories validate", "[policy]") {
    CHECK_THROWS_AS(RestartPolicy::fixed(0), DataError);
    CHECK_THROWS_AS(RestartPolicy::luby(0), DataError);
    CHECK_THROWS_AS(RestartPolicy::dynamic(-1, 10), DataError);
    CHECK_THROWS_AS(RestartPolicy::dynamic(10, 10), DataError);
    CHECK_NOTHROW(RestartPolicy::dynamic(10, std::nullopt));
    CHECK_THROWS_AS(SyntheticPredictor(1.5), DataError);
}

TEST_CASE("fixed policy simulation matches the closed form", "[policy]") {
    RtdRunSource src(two_point());
    auto s = simulate_policy(src, RestartPolicy::fixed(1), nullptr, options(100'000));
    CHECK(s.trials == 100'000);
    CHECK_FALSE(s.unbounded);
    CHECK(std::abs(s.mean_cost - 2.0) <= 3 * s.cost_se);
    CHECK(std::abs(s.mean_runs - 2.0) <= 3 * s.runs_se);
    CHECK(s.p50 <= s.p90);
    CHECK(s.p90 <= s.p99);
}

TEST_CASE("dynamic policy with a perfect predictor and no limit", "[policy]") {
    RtdRunSource src(lognormal(500, 6, 1, 3));
    SyntheticPredictor perfect(1.0);
    auto s = simulate_policy(src, RestartPolicy::dynamic(1000, std::nullopt), &perfect, options(20'000));
    CHECK(s.mean_runs == 1.0);
    CHECK_FALSE(s.unbounded);
}

TEST_CASE("dynamic simulation matches E(N) and respects the bound", "[policy]") {
    auto rtd = lognormal(2000, 6, 2, 4);
    RtdRunSource src(rtd);
    const long O = *rtd.quantile(0.2), L = *rtd.quantile(0.7);
    for (double a : {0.6, 0.8, 0.95}) {
        SyntheticPredictor p(a);
        auto s = simulate_policy(src, RestartPolicy::dynamic(O, L), &p, options(30'000, 7));
        auto runs = dynamic_expected_runs(a, rtd.cdf(O), rtd.cdf(L));
        auto ub = dynamic_expected_total_ub(O, L, a, rtd.cdf(O), rtd.cdf(L));
        CHECK(std::abs(s.mean_runs - runs.value) <= 3 * s.runs_se);
        CHECK(s.mean_cost <= ub.value + 3 * s.cost_se);
    }
}

TEST_CASE("luby stays within a factor of the optimal fixed cutoff", "[policy]") {
    auto tp = two_point();
    RtdRunSource src(tp);
    auto s = simulate_policy(src, RestartPolicy::luby(1), nullptr, options(20'000));
    CHECK_FALSE(s.unbounded);
    CHECK(s.mean_cost <= 10 * optimal_fixed_cutoff(tp).expected.value);
}

TEST_CASE("hopeless policies are reported unbounded", "[policy]") {
    RtdRunSource src(EmpiricalRTD({50, 60}));
    auto o = options(20);
    o.run_budget = 1000;
    auto s = simulate_policy(src, RestartPolicy::fixed(10), nullptr, o);
    CHECK(s.unbounded);

    RtdRunSource never(EmpiricalRTD({5}, 3));
    SyntheticPredictor p(0.0);
    // An always-wrong predictor continues exactly the runs that never end.
    auto d = simulate_policy(never, RestartPolicy::dynamic(2, std::nullopt), &p, o);
    CHECK(d.unbounded);
}

TEST_CASE("simulation is independent of the thread count", "[policy]") {
    auto rtd = lognormal(400, 5, 1.5, 8);
    RtdRunSource src(rtd);
    SyntheticPredictor p(0.85);
    auto one = options(5000, 3);
    auto many = one;
    many.threads = 4;
    for (const auto& policy : {RestartPolicy::fixed(200), RestartPolicy::luby(16), RestartPolicy::dynamic(100, 900)}) {
        auto a = simulate_policy(src, policy, &p, one);
        auto b = simulate_policy(src, policy, &p, many);
        CHECK(a.mean_cost == b.mean_cost);
        CHECK(a.mean_runs == b.mean_runs);
        CHECK(a.p99 == b.p99);
    }
}

TEST_CASE("dynamic limit scan is sorted best first", "[policy]") {
    auto rtd = lognormal(1000, 5, 2, 9);
    const long O = *rtd.quantile(0.1);
    auto scan = scan_dynamic_limits(rtd, O, 0.9);
    REQUIRE_FALSE(scan.empty());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        REQUIRE(scan[i].limit > O);
        auto direct = dynamic_expected_total_ub(O, scan[i].limit, 0.9, rtd.cdf(O), rtd.cdf(scan[i].limit));
        REQUIRE(scan[i].total_ub.value == Approx(direct.value));
        if (i > 0) REQUIRE(scan[i - 1].total_ub.value <= scan[i].total_ub.value);
    }
}

#include "rtlab/summary.hpp"

#include <algorithm>
#include <string>

#include "rtlab/errors.hpp"

namespace rtlab {

namespace {

struct Moments {
    double avg = 0, min = 0, max = 0;
};

Moments moments(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    Moments m{0, xs.front(), xs.front()};
    for (double x : xs) {
        m.avg += x;
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
    }
    m.avg /= static_cast<double>(xs.size());
    // Rounding can push the mean a hair outside [min, max] on constant runs.
    m.avg = std::clamp(m.avg, m.min, m.max);
    return m;
}

std::vector<double> differences(const std::vector<double>& xs) {
    std::vector<double> d;
    for (std::size_t i = 1; i < xs.size(); ++i) d.push_back(xs[i] - xs[i - 1]);
    return d;
}

// Adjacent pairs with strictly opposite signs; a zero breaks the pair.
int sign_changes(const std::vector<double>& d) {
    int count = 0;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if ((d[i - 1] > 0 && d[i] < 0) || (d[i - 1] < 0 && d[i] > 0)) ++count;
    }
    return count;
}

}  // namespace

SummaryVector summarize(const FeatureTrace& trace, int horizon, const FeatureRegistry& registry) {
    if (horizon < 2) throw DataError("observation horizon must be at least 2");
    const std::size_t len = std::min(trace.size(), static_cast<std::size_t>(horizon));
    if (len < 2) throw DataError("trace has " + std::to_string(len) + " entries; at least 2 are needed");

    const auto features = registry.features();
    SummaryVector out;
    out.values.reserve(registry.dimension());
    std::vector<double> series(len);
    for (std::size_t f = 0; f < features.size(); ++f) {
        for (std::size_t i = 0; i < len; ++i) series[i] = trace[i].at(f);
        const auto m = moments(series);
        const auto d = differences(series);
        const auto dm = moments(d);
        const auto d2 = differences(d);
        const auto d2m = moments(d2);
        for (auto s : registry.statistics()) {
            double v = 0;
            switch (s) {
                case Statistic::Init: v = series.front(); break;
                case Statistic::Final: v = series.back(); break;
                case Statistic::Avg: v = m.avg; break;
                case Statistic::Min: v = m.min; break;
                case Statistic::Max: v = m.max; break;
                case Statistic::DAvg: v = dm.avg; break;
                case Statistic::DMin: v = dm.min; break;
                case Statistic::DMax: v = dm.max; break;
                case Statistic::DSignChanges: v = sign_changes(d); break;
                case Statistic::D2Avg: v = d2m.avg; break;
                case Statistic::D2Min: v = d2m.min; break;
                case Statistic::D2Max: v = d2m.max; break;
            }
            out.values.push_back(v);
        }
    }
    return out;
}

SummaryVector normalize_for_multi(const SummaryVector& summary, long post_propagation_size,
                                  const FeatureRegistry& registry) {
    if (post_propagation_size < 1) throw DataError("normalization divisor must be at least 1");
    if (summary.values.size() != registry.dimension()) throw DataError("summary does not match the feature registry");
    SummaryVector out = summary;
    const double divisor = static_cast<double>(post_propagation_size);
    const auto stats = registry.statistics();
    std::size_t col = 0;
    for (const auto& f : registry.features()) {
        for (auto s : stats) {
            if (f.size_scale && s != Statistic::DSignChanges) out.values[col] /= divisor;
            ++col;
        }
    }
    out.divisor = divisor;
    return out;
}

}  // namespace rtlab

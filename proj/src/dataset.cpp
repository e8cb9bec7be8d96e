#include "rtlab/dataset.hpp"

#include <algorithm>

#include "rtlab/errors.hpp"

namespace rtlab {

long LabeledDataset::short_count() const {
    return std::count_if(rows.begin(), rows.end(), [](const DatasetRow& r) { return r.label == RunLabel::Short; });
}

MedianSplit label_by_median(std::span<const long> runtimes) {
    if (runtimes.empty()) throw DataError("cannot take the median of an empty run list");
    std::vector<long> sorted(runtimes.begin(), runtimes.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    double median = n % 2 ? static_cast<double>(sorted[n / 2])
                          : (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
    MedianSplit out{median, {}};
    out.labels.reserve(n);
    for (long t : runtimes) out.labels.push_back(static_cast<double>(t) < median ? RunLabel::Short : RunLabel::Long);
    return out;
}

void relabel(LabeledDataset& data, double median) {
    data.median = median;
    for (auto& row : data.rows) {
        row.label = static_cast<double>(row.runtime) < median ? RunLabel::Short : RunLabel::Long;
    }
}

namespace {

LabeledDataset filter_longer(const LabeledDataset& data, long threshold) {
    LabeledDataset out;
    out.columns = data.columns;
    out.mode = data.mode;
    out.horizon = data.horizon;
    for (const auto& row : data.rows) {
        if (row.runtime > threshold) out.rows.push_back(row);
    }
    return out;
}

}  // namespace

std::vector<CascadeLevel> cascade_datasets(const LabeledDataset& train, const LabeledDataset* test,
                                           std::span<const long> thresholds, std::size_t min_size) {
    if (thresholds.empty()) throw DataError("cascade needs at least one threshold");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < train.horizon) throw DataError("cascade thresholds must not be below the horizon");
        if (i > 0 && thresholds[i] <= thresholds[i - 1]) throw DataError("cascade thresholds must be ascending");
    }
    std::vector<CascadeLevel> levels;
    for (long t : thresholds) {
        CascadeLevel level{t, {}, {}, 0, 0};
        auto sub = filter_longer(train, t);
        level.train_size = sub.rows.size();
        std::optional<LabeledDataset> sub_test;
        if (test) {
            sub_test = filter_longer(*test, t);
            level.test_size = sub_test->rows.size();
        }
        if (sub.rows.size() >= min_size) {
            std::vector<long> runtimes;
            for (const auto& row : sub.rows) runtimes.push_back(row.runtime);
            double median = label_by_median(runtimes).median;
            relabel(sub, median);
            if (sub_test) relabel(*sub_test, median);
            level.train = std::move(sub);
            level.test = std::move(sub_test);
        }
        levels.push_back(std::move(level));
    }
    return levels;
}

}  // namespace rtlab

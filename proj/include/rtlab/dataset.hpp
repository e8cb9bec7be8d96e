#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtlab/summary.hpp"

namespace rtlab {

enum class RunLabel { Short, Long };

struct DatasetRow {
    SummaryVector x;
    long runtime = 0;  // choice points (the safety cap for capped runs)
    RunLabel label = RunLabel::Long;
};

enum class ExperimentMode { SingleInstance, MultiInstance };

struct LabeledDataset {
    std::vector<std::string> columns;  // summary column names
    std::vector<DatasetRow> rows;
    double median = 0;                 // training median that defines SHORT
    ExperimentMode mode = ExperimentMode::SingleInstance;
    int horizon = 0;

    long short_count() const;
};

struct MedianSplit {
    double median;
    std::vector<RunLabel> labels;
};

/// Median (mean of the middle pair for even counts); SHORT iff T < median.
/// Throws DataError on an empty list.
MedianSplit label_by_median(std::span<const long> runtimes);

/// Reassigns every label against an externally fixed median.
void relabel(LabeledDataset& data, double median);

struct CascadeLevel {
    long threshold;
    std::optional<LabeledDataset> train;  // nullopt when skipped for size
    std::optional<LabeledDataset> test;
    std::size_t train_size = 0;           // rows with T > threshold, before the size check
    std::size_t test_size = 0;
};

/// For each threshold, the rows with T > threshold relabeled by that
/// subset's own training median; the test subset is filtered the same way and
/// labeled by the same median. Levels whose training subset has fewer than
/// min_size rows are returned with empty datasets. Throws DataError for an
/// empty or non-ascending threshold list or a threshold below the horizon.
std::vector<CascadeLevel> cascade_datasets(const LabeledDataset& train, const LabeledDataset* test,
                                           std::span<const long> thresholds, std::size_t min_size = 50);

}  // namespace rtlab

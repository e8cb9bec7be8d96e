#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rtlab/dataset.hpp"
#include "rtlab/random.hpp"

namespace rtlab {

/// Structure-prior parameter: p(model) = kappa^(number of leaves), 0 < kappa <= 1.
class Kappa {
public:
    explicit Kappa(double value);
    double value() const noexcept { return value_; }
    double log() const noexcept;

private:
    double value_;
};

struct TreeNode {
    int feature = -1;       // summary column; -1 for a leaf
    double threshold = 0;   // rows with value <= threshold go left
    int left = -1;
    int right = -1;
    long n_short = 0;       // training rows reaching this node
    long n_long = 0;

    bool is_leaf() const noexcept { return feature < 0; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary threshold tree over summary columns; nodes_[0] is the root.
class DecisionTreeModel {
public:
    /// Single leaf with the given counts.
    DecisionTreeModel(long n_short = 0, long n_long = 0);
    explicit DecisionTreeModel(std::vector<TreeNode> nodes);

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    int leaf_count() const noexcept;
    int depth() const noexcept;
    /// Largest column index the tree reads, or -1 for a single leaf.
    int max_feature() const noexcept;

    /// Index of the leaf a row reaches. Throws DataError if x lacks a column the tree reads.
    int route(std::span<const double> x) const;
    /// Index of the new left child; the right child follows it.
    int split(int leaf, int feature, double threshold);
    void set_counts(int node, long n_short, long n_long);

    friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;

private:
    std::vector<TreeNode> nodes_;
};

/// ln of the uniform-prior marginal likelihood n_s! n_l! / (n_s + n_l + 1)!.
double leaf_log_marginal(long n_short, long n_long);

/// Sum of leaf marginals over the data routed through the tree, plus leaves * ln kappa.
double bayesian_score(const DecisionTreeModel& tree, std::span<const DatasetRow> data, Kappa kappa);

/// Greedy growth: repeatedly applies the split with the largest positive
/// score gain over all leaves, until no split improves the score.
DecisionTreeModel grow_tree(std::span<const DatasetRow> data, Kappa kappa);

/// Posterior-mean probability of SHORT at the row's leaf: (s + 1) / (s + l + 2).
double predict(const DecisionTreeModel& tree, std::span<const double> x);

/// The single-leaf tree over all training counts.
DecisionTreeModel marginal_model(std::span<const DatasetRow> data);

struct EvaluationReport {
    double accuracy = 0;
    double average_log_score = 0;  // mean ln P(true label)
    std::size_t size = 0;
    long short_as_short = 0;
    long short_as_long = 0;
    long long_as_short = 0;
    long long_as_long = 0;
};

/// Argmax classification (P(SHORT) > 0.5 means SHORT) and average log
/// score. Throws DataError on an empty test set.
EvaluationReport evaluate(const DecisionTreeModel& model, std::span<const DatasetRow> test);

struct KappaTrial {
    double kappa;
    double holdout_log_score;
    double holdout_accuracy;
    int leaves;
};

struct KappaTuning {
    double kappa;                     // selected value
    std::vector<KappaTrial> trials;   // one per grid entry, in grid order
    std::size_t fit_rows = 0;
    std::size_t holdout_rows = 0;
    std::uint64_t split_attempts = 0; // seeds consumed to get both classes into the fit part
    DecisionTreeModel model;          // regrown on all rows at the selected kappa
};

/// Seeded 70/30 split; picks the kappa with the best holdout average log
/// score (first in grid order on ties), then regrows on the full data.
KappaTuning tune_kappa(std::span<const DatasetRow> data, std::span<const double> kappa_grid, Seed seed);

/// 1e-1 .. 1e-8
std::vector<double> default_kappa_grid();

}  // namespace rtlab

#include "rtlab/learn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rtlab/errors.hpp"

namespace rtlab {

Kappa::Kappa(double value) : value_(value) {
    if (!(value > 0.0 && value <= 1.0)) throw DataError("kappa must lie in (0, 1], got " + std::to_string(value));
}

double Kappa::log() const noexcept { return std::log(value_); }

DecisionTreeModel::DecisionTreeModel(long n_short, long n_long) {
    TreeNode root;
    root.n_short = n_short;
    root.n_long = n_long;
    nodes_.push_back(root);
}

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DataError("a tree needs at least one node");
    const int count = static_cast<int>(nodes_.size());
    for (const auto& node : nodes_) {
        if (node.is_leaf()) continue;
        if (node.left <= 0 || node.left >= count || node.right <= 0 || node.right >= count) {
            throw DataError("tree node has a child index out of range");
        }
    }
}

int DecisionTreeModel::leaf_count() const noexcept {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTreeModel::depth() const noexcept {
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) continue;
        d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
        deepest = std::max(deepest, d[i] + 1);
    }
    return deepest;
}

int DecisionTreeModel::max_feature() const noexcept {
    int m = -1;
    for (const auto& n : nodes_) m = std::max(m, n.feature);
    return m;
}

int DecisionTreeModel::route(std::span<const double> x) const {
    int i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& node = nodes_[i];
        if (node.feature >= static_cast<int>(x.size())) {
            throw DataError("row has no column " + std::to_string(node.feature) + " needed by the tree");
        }
        i = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return i;
}

int DecisionTreeModel::split(int leaf, int feature, double threshold) {
    int left = static_cast<int>(nodes_.size());
    nodes_[leaf].feature = feature;
    nodes_[leaf].threshold = threshold;
    nodes_[leaf].left = left;
    nodes_[leaf].right = left + 1;
    nodes_.emplace_back();
    nodes_.emplace_back();
    return left;
}

void DecisionTreeModel::set_counts(int node, long n_short, long n_long) {
    nodes_[node].n_short = n_short;
    nodes_[node].n_long = n_long;
}

double leaf_log_marginal(long n_short, long n_long) {
    return std::lgamma(n_short + 1.0) + std::lgamma(n_long + 1.0) - std::lgamma(n_short + n_long + 2.0);
}

double bayesian_score(const DecisionTreeModel& tree, std::span<const DatasetRow> data, Kappa kappa) {
    const auto nodes = tree.nodes();
    std::vector<long> shorts(nodes.size(), 0), longs(nodes.size(), 0);
    for (const auto& row : data) {
        int leaf = tree.route(row.x.values);
        ++(row.label == RunLabel::Short ? shorts : longs)[leaf];
    }
    double score = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf()) score += leaf_log_marginal(shorts[i], longs[i]) + kappa.log();
    }
    return score;
}

namespace {

constexpr std::size_t kMaxCandidates = 64;

struct SplitChoice {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0;

    bool valid() const { return feature >= 0; }
};

// Midpoint strictly below b, so that a goes left and b goes right.
double midpoint(double a, double b) {
    double m = a + (b - a) / 2;
    return m < b ? m : a;
}

class TreeGrower {
public:
    TreeGrower(std::span<const DatasetRow> data, Kappa kappa) : data_(data), log_kappa_(kappa.log()) {
        if (!data.empty()) columns_ = data.front().x.values.size();
        for (const auto& row : data) {
            if (row.x.values.size() != columns_) throw DataError("rows have differing column counts");
        }
    }

    DecisionTreeModel grow() {
        std::vector<int> all(data_.size());
        std::iota(all.begin(), all.end(), 0);
        DecisionTreeModel tree;
        members_.push_back(std::move(all));
        tally(tree, 0);
        best_.push_back(best_split(members_[0]));

        for (;;) {
            int chosen = -1;
            for (int leaf = 0; leaf < static_cast<int>(best_.size()); ++leaf) {
                const auto& b = best_[leaf];
                if (!tree.nodes()[leaf].is_leaf() || !b.valid() || !(b.gain > 0)) continue;
                if (chosen < 0 || better(b, best_[chosen])) chosen = leaf;
            }
            if (chosen < 0) break;
            const SplitChoice choice = best_[chosen];
            assert(choice.gain > 0);  // every accepted split strictly raises the score
            int left = tree.split(chosen, choice.feature, choice.threshold);
            std::vector<int> lhs, rhs;
            for (int r : members_[chosen]) {
                (data_[r].x.values[choice.feature] <= choice.threshold ? lhs : rhs).push_back(r);
            }
            members_.resize(left + 2);
            best_.resize(left + 2);
            members_[left] = std::move(lhs);
            members_[left + 1] = std::move(rhs);
            members_[chosen].clear();
            for (int child : {left, left + 1}) {
                tally(tree, child);
                best_[child] = best_split(members_[child]);
            }
        }
        return tree;
    }

private:
    // Larger gain wins; exact ties go to the lower column, then the lower threshold.
    static bool better(const SplitChoice& a, const SplitChoice& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        if (a.feature != b.feature) return a.feature < b.feature;
        return a.threshold < b.threshold;
    }

    void tally(DecisionTreeModel& tree, int node) {
        long s = 0;
        for (int r : members_[node]) s += data_[r].label == RunLabel::Short;
        tree.set_counts(node, s, static_cast<long>(members_[node].size()) - s);
    }

    SplitChoice best_split(const std::vector<int>& rows) const {
        SplitChoice best;
        const long total = static_cast<long>(rows.size());
        if (total < 2) return best;
        long total_short = 0;
        for (int r : rows) total_short += data_[r].label == RunLabel::Short;
        if (total_short == 0 || total_short == total) return best;  // a pure leaf cannot gain
        const double parent = leaf_log_marginal(total_short, total - total_short);

        std::vector<std::pair<double, bool>> column(rows.size());
        struct Boundary {
            long left;
            long left_short;
            double threshold;
        };
        std::vector<Boundary> boundaries;
        for (std::size_t f = 0; f < columns_; ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& row = data_[rows[i]];
                column[i] = {row.x.values[f], row.label == RunLabel::Short};
            }
            std::sort(column.begin(), column.end());
            boundaries.clear();
            long left_short = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_short += column[i].second;
                if (column[i].first < column[i + 1].first) {
                    boundaries.push_back({static_cast<long>(i + 1), left_short,
                                          midpoint(column[i].first, column[i + 1].first)});
                }
            }
            for (const auto& b : thin(boundaries, total)) {
                double gain = leaf_log_marginal(b.left_short, b.left - b.left_short) +
                              leaf_log_marginal(total_short - b.left_short, (total - b.left) - (total_short - b.left_short)) -
                              parent + log_kappa_;
                SplitChoice c{gain, static_cast<int>(f), b.threshold};
                if (!best.valid() || better(c, best)) best = c;
            }
        }
        return best;
    }

    // At most kMaxCandidates boundaries, spaced by row quantile.
    template <typename B>
    static std::vector<B> thin(const std::vector<B>& boundaries, long total) {
        if (boundaries.size() <= kMaxCandidates) return boundaries;
        std::vector<B> out;
        std::size_t i = 0;
        for (std::size_t q = 1; q <= kMaxCandidates; ++q) {
            const double target = static_cast<double>(q) * total / (kMaxCandidates + 1);
            while (i < boundaries.size() && boundaries[i].left < target) ++i;
            if (i == boundaries.size()) break;
            if (out.empty() || out.back().left != boundaries[i].left) out.push_back(boundaries[i]);
        }
        return out;
    }

    std::span<const DatasetRow> data_;
    double log_kappa_;
    std::size_t columns_ = 0;
    std::vector<std::vector<int>> members_;  // training rows per node (leaves only)
    std::vector<SplitChoice> best_;
};

}  // namespace

DecisionTreeModel grow_tree(std::span<const DatasetRow> data, Kappa kappa) {
    return TreeGrower(data, kappa).grow();
}

double predict(const DecisionTreeModel& tree, std::span<const double> x) {
    const auto& leaf = tree.nodes()[tree.route(x)];
    return (leaf.n_short + 1.0) / (leaf.n_short + leaf.n_long + 2.0);
}

DecisionTreeModel marginal_model(std::span<const DatasetRow> data) {
    long s = std::count_if(data.begin(), data.end(), [](const DatasetRow& r) { return r.label == RunLabel::Short; });
    return DecisionTreeModel(s, static_cast<long>(data.size()) - s);
}

EvaluationReport evaluate(const DecisionTreeModel& model, std::span<const DatasetRow> test) {
    if (test.empty()) throw DataError("cannot evaluate on an empty test set");
    EvaluationReport rep;
    rep.size = test.size();
    double log_sum = 0;
    for (const auto& row : test) {
        double p_short = predict(model, row.x.values);
        bool says_short = p_short > 0.5;
        bool is_short = row.label == RunLabel::Short;
        log_sum += std::log(is_short ? p_short : 1.0 - p_short);
        if (is_short) ++(says_short ? rep.short_as_short : rep.short_as_long);
        else ++(says_short ? rep.long_as_short : rep.long_as_long);
    }
    rep.accuracy = static_cast<double>(rep.short_as_short + rep.long_as_long) / static_cast<double>(rep.size);
    rep.average_log_score = log_sum / static_cast<double>(rep.size);
    return rep;
}

std::vector<double> default_kappa_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}; }

KappaTuning tune_kappa(std::span<const DatasetRow> data, std::span<const double> kappa_grid, Seed seed) {
    if (kappa_grid.empty()) throw DataError("kappa grid is empty");
    if (data.size() < 2) throw DataError("kappa tuning needs at least two rows");
    std::vector<Kappa> grid;
    for (double k : kappa_grid) grid.emplace_back(k);

    const std::size_t fit_size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(data.size()))), 1, data.size() - 1);
    std::vector<std::size_t> order(data.size());
    std::vector<DatasetRow> fit, holdout;
    constexpr std::uint64_t kMaxAttempts = 100;
    std::uint64_t attempt = 0;
    for (; attempt < kMaxAttempts; ++attempt) {
        std::iota(order.begin(), order.end(), 0);
        auto rng = make_rng(derive_seed(seed, attempt));
        std::shuffle(order.begin(), order.end(), rng);
        fit.clear();
        holdout.clear();
        for (std::size_t i = 0; i < order.size(); ++i) (i < fit_size ? fit : holdout).push_back(data[order[i]]);
        long s = std::count_if(fit.begin(), fit.end(), [](const DatasetRow& r) { return r.label == RunLabel::Short; });
        if (s > 0 && s < static_cast<long>(fit.size())) break;
    }

    KappaTuning out;
    out.fit_rows = fit.size();
    out.holdout_rows = holdout.size();
    out.split_attempts = std::min(attempt + 1, kMaxAttempts);
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto tree = grow_tree(fit, grid[i]);
        auto rep = evaluate(tree, holdout);
        out.trials.push_back({grid[i].value(), rep.average_log_score, rep.accuracy, tree.leaf_count()});
        if (rep.average_log_score > out.trials[best].holdout_log_score) best = i;
    }
    out.kappa = grid[best].value();
    out.model = grow_tree(data, grid[best]);
    return out;
}

}  // namespace rtlab

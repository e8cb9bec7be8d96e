#include "rtlab/matching.hpp"

#include <array>
#include <bit>
#include <limits>
#include <queue>

namespace rtlab {

std::vector<Edge> Matching::edges() const {
    std::vector<Edge> out;
    for (int l = 0; l < static_cast<int>(mate_left.size()); ++l) {
        if (mate_left[l] >= 0) out.emplace_back(l, mate_left[l]);
    }
    return out;
}

namespace {

class HopcroftKarp {
public:
    HopcroftKarp(int left_count, int right_count, std::span<const Edge> edges)
        : adj_(left_count), dist_(left_count) {
        m_.mate_left.assign(left_count, -1);
        m_.mate_right.assign(right_count, -1);
        for (auto [l, r] : edges) adj_[l].push_back(r);
    }

    Matching run() {
        while (layer()) {
            for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
                if (m_.mate_left[l] < 0 && augment(l)) ++m_.size;
            }
        }
        return std::move(m_);
    }

private:
    static constexpr int kInf = std::numeric_limits<int>::max();

    bool layer() {
        std::queue<int> q;
        for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
            if (m_.mate_left[l] < 0) {
                dist_[l] = 0;
                q.push(l);
            } else {
                dist_[l] = kInf;
            }
        }
        bool found = false;
        while (!q.empty()) {
            int l = q.front();
            q.pop();
            for (int r : adj_[l]) {
                int next = m_.mate_right[r];
                if (next < 0) {
                    found = true;
                } else if (dist_[next] == kInf) {
                    dist_[next] = dist_[l] + 1;
                    q.push(next);
                }
            }
        }
        return found;
    }

    bool augment(int l) {
        for (int r : adj_[l]) {
            int next = m_.mate_right[r];
            if (next < 0 || (dist_[next] == dist_[l] + 1 && augment(next))) {
                m_.mate_left[l] = r;
                m_.mate_right[r] = l;
                return true;
            }
        }
        dist_[l] = kInf;
        return false;
    }

    std::vector<std::vector<int>> adj_;
    std::vector<int> dist_;
    Matching m_;
};

}  // namespace

Matching max_matching(int left_count, int right_count, std::span<const Edge> edges) {
    return HopcroftKarp(left_count, right_count, edges).run();
}

namespace {

bool dense_augment(int l, std::span<const std::uint64_t> adjacency, std::array<int, 64>& mate_right,
                   std::span<int> mate_left, std::uint64_t& visited) {
    std::uint64_t candidates = adjacency[l] & ~visited;
    while (candidates) {
        int r = std::countr_zero(candidates);
        candidates &= candidates - 1;
        visited |= std::uint64_t{1} << r;
        if (mate_right[r] < 0 || dense_augment(mate_right[r], adjacency, mate_right, mate_left, visited)) {
            mate_left[l] = r;
            mate_right[r] = l;
            return true;
        }
    }
    return false;
}

}  // namespace

int max_matching_dense(std::span<const std::uint64_t> adjacency, std::span<int> mate_left) {
    std::array<int, 64> mate_right;
    mate_right.fill(-1);
    int size = 0;
    for (std::size_t l = 0; l < adjacency.size(); ++l) {
        int r = mate_left[l];
        if (r >= 0 && (adjacency[l] >> r & 1U) && mate_right[r] < 0) {
            mate_right[r] = static_cast<int>(l);
            ++size;
        } else {
            mate_left[l] = -1;
        }
    }
    for (std::size_t l = 0; l < adjacency.size(); ++l) {
        if (mate_left[l] >= 0) continue;
        std::uint64_t visited = 0;
        if (dense_augment(static_cast<int>(l), adjacency, mate_right, mate_left, visited)) ++size;
    }
    return size;
}

}  // namespace rtlab

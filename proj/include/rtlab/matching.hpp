#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rtlab {

using Edge = std::pair<int, int>;  // (left vertex, right vertex)

struct Matching {
    std::vector<int> mate_left;   // right vertex matched to each left vertex, or -1
    std::vector<int> mate_right;  // left vertex matched to each right vertex, or -1
    int size = 0;

    std::vector<Edge> edges() const;
};

/// Maximum-cardinality matching (Hopcroft-Karp). Vertices are 0-based;
/// duplicate edges are tolerated.
Matching max_matching(int left_count, int right_count, std::span<const Edge> edges);

/// Maximum matching on a dense graph of at most 64 right vertices, where
/// adjacency[l] is the bit set of right neighbours of left vertex l.
/// mate_left must have adjacency.size() entries; entries that are >= 0 and
/// still valid edges are kept as a warm start. Returns the matching size.
int max_matching_dense(std::span<const std::uint64_t> adjacency, std::span<int> mate_left);

}  // namespace rtlab

#pragma once

#include <cstdint>
#include <vector>

#include "stragglar/schedule.hpp"

namespace stragglar {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  std::int64_t weight = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Undirected graph over dense vertex ids [0, num_vertices).
struct WeightedGraph {
  int num_vertices = 0;
  std::vector<WeightedEdge> edges;
};

struct MatchingSolution {
  std::vector<WeightedEdge> edges;  // vertex-disjoint, each with u < v, sorted by u
  std::int64_t total_weight = 0;
};

// Exact maximum-weight matching on a general graph (Edmonds' blossom method,
// primal-dual, O(V^3)). Integer weights keep every dual variable integral.
// Non-positive edges never enter the matching. Deterministic for a fixed edge
// order.
MatchingSolution max_weight_matching(const WeightedGraph& graph);

// Edge weights used when building need graphs between ranks.
inline constexpr std::int64_t kOneWayNeed = 1;
inline constexpr std::int64_t kMutualNeed = 2;

// Vertices are ranks; an edge of weight 2 joins ranks that each hold a chunk
// the other lacks, weight 1 when only one side can help the other.
struct NeedGraph {
  std::vector<Rank> vertices;  // ascending
  std::vector<WeightedEdge> edges;  // endpoints are Rank values, u < v

  // Re-indexes to dense ids, solves, maps back to ranks.
  MatchingSolution solve() const;
};

}  // namespace stragglar

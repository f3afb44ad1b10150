#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hytegrid/indexing.hpp"
#include "hytegrid/mesh.hpp"

namespace hytegrid {

using Assignment = std::map<PrimitiveID, int>;

/// Macro-primitive graph with per-node work weights; graph edges mirror the
/// communication paths (adjacent-dimension pairs only).
struct WeightedGraph {
    std::map<PrimitiveID, double> node_weight;
    std::vector<std::pair<PrimitiveID, PrimitiveID>> edges;
};

/// Default weights: number of owned unknowns of `kind` at `level`.
WeightedGraph weighted_graph(const SetupGraph& setup, FunctionKind kind, int level);

/// Baseline: cycles ranks independently within each kind block, so per-kind
/// counts differ by at most one across ranks.
Assignment partition_round_robin(const SetupGraph& setup, int ranks);

struct PartitionReport {
    double total_weight = 0.0;
    double balance_bound = 0.0;  // (1 + eps) * total / ranks, eps = 0.10
    double max_rank_weight = 0.0;
    bool bound_relaxed = false;  // a single node outweighed the bound
};

/// Greedy BFS growth over the face-adjacency graph with an adaptive
/// per-rank face-weight target (remaining weight / remaining ranks); edges
/// and vertices are then co-located with their lowest-ID neighboring face.
Assignment partition_greedy_edgecut(const SetupGraph& setup, const WeightedGraph& wg, int ranks,
                                    PartitionReport* report = nullptr);

/// Number of macro-primitive graph edges whose endpoints live on different
/// ranks.
std::size_t edge_cut(const WeightedGraph& wg, const Assignment& assignment);

/// Text lines `primitiveID rank`, ID-ascending.
std::string export_assignment(const Assignment& assignment);

} // namespace hytegrid

#include "hytegrid/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hytegrid {

WeightedGraph weighted_graph(const SetupGraph& setup, FunctionKind kind, int level) {
    WeightedGraph wg;
    for (const auto& p : setup.primitives)
        wg.node_weight[p.id] = static_cast<double>(owned_count(kind, static_cast<int>(p.kind), level));
    wg.edges = setup.graph_edges;
    return wg;
}

Assignment partition_round_robin(const SetupGraph& setup, int ranks) {
    if (ranks < 1)
        throw std::invalid_argument("partition_round_robin: need at least one rank");
    Assignment a;
    for (std::size_t i = 0; i < setup.num_vertices; ++i)
        a[setup.vertex_id(i)] = static_cast<int>(i % static_cast<std::size_t>(ranks));
    for (std::size_t i = 0; i < setup.num_edges; ++i)
        a[setup.edge_id(i)] = static_cast<int>(i % static_cast<std::size_t>(ranks));
    for (std::size_t i = 0; i < setup.num_faces; ++i)
        a[setup.face_id(i)] = static_cast<int>(i % static_cast<std::size_t>(ranks));
    return a;
}

Assignment partition_greedy_edgecut(const SetupGraph& setup, const WeightedGraph& wg, int ranks,
                                    PartitionReport* report) {
    if (ranks < 1)
        throw std::invalid_argument("partition_greedy_edgecut: need at least one rank");

    // Face adjacency via shared macro-edges.
    std::map<PrimitiveID, std::vector<PrimitiveID>> face_adj;
    for (std::size_t ei = 0; ei < setup.num_edges; ++ei) {
        const auto& e = setup.at(setup.edge_id(ei)).edge();
        if (e.faces.size() == 2) {
            face_adj[e.faces[0].id].push_back(e.faces[1].id);
            face_adj[e.faces[1].id].push_back(e.faces[0].id);
        }
    }

    // Effective face weight: own weight plus the weight of every edge/vertex
    // this face will receive by the lowest-ID co-location rule below. Growth
    // then balances the true per-rank totals.
    std::map<PrimitiveID, double> eff;
    for (std::size_t fi = 0; fi < setup.num_faces; ++fi)
        eff[setup.face_id(fi)] = wg.node_weight.at(setup.face_id(fi));
    for (std::size_t ei = 0; ei < setup.num_edges; ++ei) {
        const auto& e = setup.at(setup.edge_id(ei)).edge();
        eff[e.faces.front().id] += wg.node_weight.at(setup.edge_id(ei));
    }
    for (std::size_t vi = 0; vi < setup.num_vertices; ++vi) {
        const auto& v = setup.at(setup.vertex_id(vi)).vertex();
        if (!v.faces.empty())
            eff[v.faces.front().id] += wg.node_weight.at(setup.vertex_id(vi));
    }

    double remaining = 0.0;
    std::set<PrimitiveID> unassigned;
    for (std::size_t fi = 0; fi < setup.num_faces; ++fi) {
        unassigned.insert(setup.face_id(fi));
        remaining += eff.at(setup.face_id(fi));
    }

    Assignment a;
    for (int r = 0; r + 1 < ranks && !unassigned.empty(); ++r) {
        const double target = remaining / static_cast<double>(ranks - r);
        double grabbed = 0.0;
        std::set<PrimitiveID> frontier;
        while (!unassigned.empty()) {
            // Candidate: the frontier face whose addition lands closest to
            // the target (ties to the lowest ID); with an empty frontier the
            // lowest unassigned face seeds a new region.
            PrimitiveID pick{0};
            bool found = false;
            double best = 0.0;
            for (const auto& f : frontier) {
                const double dist = std::abs(grabbed + eff.at(f) - target);
                if (!found || dist < best) {
                    pick = f;
                    best = dist;
                    found = true;
                }
            }
            if (!found) {
                pick = *unassigned.begin();
                best = std::abs(grabbed + eff.at(pick) - target);
            }
            // Accept only moves toward the target (the first face always).
            if (grabbed > 0.0 && best >= std::abs(grabbed - target))
                break;
            a[pick] = r;
            grabbed += eff.at(pick);
            remaining -= eff.at(pick);
            unassigned.erase(pick);
            frontier.erase(pick);
            for (const auto& nb : face_adj[pick])
                if (unassigned.count(nb))
                    frontier.insert(nb);
        }
    }
    for (const auto& f : unassigned)
        a[f] = ranks - 1;

    // Co-locate lower-dimensional primitives with their lowest-ID incident
    // face (neighbor lists are ID-sorted by construction).
    for (std::size_t ei = 0; ei < setup.num_edges; ++ei) {
        const auto& e = setup.at(setup.edge_id(ei)).edge();
        a[setup.edge_id(ei)] = a.at(e.faces.front().id);
    }
    for (std::size_t vi = 0; vi < setup.num_vertices; ++vi) {
        const auto& v = setup.at(setup.vertex_id(vi)).vertex();
        a[setup.vertex_id(vi)] = v.faces.empty() ? 0 : a.at(v.faces.front().id);
    }

    if (report) {
        constexpr double eps = 0.10;
        double total = 0.0;
        for (const auto& [id, w] : wg.node_weight)
            total += w;
        std::vector<double> rank_weight(static_cast<std::size_t>(ranks), 0.0);
        for (const auto& [id, r] : a)
            rank_weight[static_cast<std::size_t>(r)] += wg.node_weight.at(id);
        report->total_weight = total;
        report->balance_bound = (1.0 + eps) * total / static_cast<double>(ranks);
        report->max_rank_weight = *std::max_element(rank_weight.begin(), rank_weight.end());
        // Co-location makes a face plus its satellites the indivisible unit;
        // when no split meets the bound the achieved maximum stands in.
        report->bound_relaxed = report->max_rank_weight > report->balance_bound;
    }
    return a;
}

std::size_t edge_cut(const WeightedGraph& wg, const Assignment& assignment) {
    std::size_t cut = 0;
    for (const auto& [a, b] : wg.edges)
        if (assignment.at(a) != assignment.at(b))
            ++cut;
    return cut;
}

std::string export_assignment(const Assignment& assignment) {
    std::ostringstream os;
    for (const auto& [id, rank] : assignment)
        os << id.value << " " << rank << "\n";
    return os.str();
}

} // namespace hytegrid

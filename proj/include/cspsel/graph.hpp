#pragma once

#include "cspsel/instance.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cspsel {

/// Primal graph of an instance: one vertex per variable, an edge between two
/// variables iff some constraint scope contains both. Adjacency lists are
/// sorted and free of self-loops and duplicates.
class PrimalGraph {
public:
    PrimalGraph() = default;
    explicit PrimalGraph(std::size_t n) : adj_(n) {}

    /// Builds from an explicit edge list; duplicates and self-loops are dropped.
    static PrimalGraph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

    std::size_t vertex_count() const noexcept { return adj_.size(); }
    std::size_t edge_count() const noexcept { return edges_; }
    std::size_t degree(std::size_t v) const { return adj_[v].size(); }
    const std::vector<std::size_t>& neighbours(std::size_t v) const { return adj_[v]; }
    bool adjacent(std::size_t u, std::size_t v) const;

private:
    friend PrimalGraph build_primal_graph(const Instance& inst);
    void finalize();

    std::vector<std::vector<std::size_t>> adj_;
    std::size_t edges_ = 0;
};

PrimalGraph build_primal_graph(const Instance& inst);

/// Number of distinct primal edges, without building adjacency lists.
std::size_t primal_edge_count(const Instance& inst);

double edge_density(const PrimalGraph& g);
double edge_density(std::size_t vertices, std::size_t edges);
double clustering_coefficient(const PrimalGraph& g);

struct DegreeStats {
    double min = 0;
    double max = 0;
    double mean = 0;
    double median = 0;
    double sd = 0;
};

/// Degree statistics, each normalised by the vertex count.
DegreeStats degree_stats(const PrimalGraph& g);

/// Largest number of earlier neighbours over all vertices, un-normalised.
std::size_t ordering_width(const PrimalGraph& g, std::span<const std::size_t> ordering);

/// Graph width (degeneracy) by min-degree elimination, un-normalised.
/// `elimination`, if given, receives the removal order (ties: lowest index).
std::size_t graph_width(const PrimalGraph& g, std::vector<std::size_t>* elimination = nullptr);

/// ordering_width / n. Throws Error if `ordering` is not a permutation.
double width_of_ordering(const PrimalGraph& g, std::span<const std::size_t> ordering);

/// graph_width / n.
double width_of_graph(const PrimalGraph& g);

} // namespace cspsel

#include "cspsel/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cspsel {

void PrimalGraph::finalize() {
    edges_ = 0;
    for (std::size_t v = 0; v < adj_.size(); ++v) {
        auto& a = adj_[v];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        edges_ += a.size();
    }
    edges_ /= 2;
}

PrimalGraph PrimalGraph::from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
    PrimalGraph g(n);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) {
            throw Error("edge endpoint out of range");
        }
        if (u != v) {
            g.adj_[u].push_back(v);
            g.adj_[v].push_back(u);
        }
    }
    g.finalize();
    return g;
}

bool PrimalGraph::adjacent(std::size_t u, std::size_t v) const {
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
}

PrimalGraph build_primal_graph(const Instance& inst) {
    PrimalGraph g(inst.variables.size());
    for (const auto& c : inst.constraints) {
        for (std::size_t i = 0; i < c.scope.size(); ++i) {
            for (std::size_t j = i + 1; j < c.scope.size(); ++j) {
                g.adj_[c.scope[i]].push_back(c.scope[j]);
                g.adj_[c.scope[j]].push_back(c.scope[i]);
            }
        }
    }
    g.finalize();
    return g;
}

std::size_t primal_edge_count(const Instance& inst) {
    const std::size_t n = inst.variables.size();
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
        for (std::size_t v : inst.constraints[ci].scope) {
            if (v >= n) {
                throw Error("constraint scope refers to an unknown variable");
            }
            incident[v].push_back(ci);
        }
    }
    // Count each edge once, from its lower endpoint.
    std::vector<std::size_t> stamp(n, n);
    std::size_t edges = 0;
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t ci : incident[v]) {
            for (std::size_t u : inst.constraints[ci].scope) {
                if (u > v && stamp[u] != v) {
                    stamp[u] = v;
                    ++edges;
                }
            }
        }
    }
    return edges;
}

double edge_density(std::size_t vertices, std::size_t edges) {
    const double n = static_cast<double>(vertices);
    if (n < 2) {
        return 0.0;
    }
    return static_cast<double>(edges) / (n * (n - 1) / 2);
}

double edge_density(const PrimalGraph& g) { return edge_density(g.vertex_count(), g.edge_count()); }

double clustering_coefficient(const PrimalGraph& g) {
    const std::size_t n = g.vertex_count();
    if (n == 0) {
        return 0.0;
    }
    // For each v, count edges inside n(v) by marking n(v) and scanning the
    // neighbour lists of its members. Each inner edge is seen twice.
    std::vector<char> mark(n, 0);
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto& nv = g.neighbours(v);
        const std::size_t d = nv.size();
        if (d < 2) {
            continue;
        }
        for (std::size_t u : nv) mark[u] = 1;
        std::size_t twice = 0;
        for (std::size_t u : nv) {
            for (std::size_t w : g.neighbours(u)) {
                twice += static_cast<std::size_t>(mark[w]);
            }
        }
        for (std::size_t u : nv) mark[u] = 0;
        const double pairs = static_cast<double>(d) * static_cast<double>(d - 1) / 2;
        total += static_cast<double>(twice / 2) / pairs;
    }
    return total / static_cast<double>(n);
}

DegreeStats degree_stats(const PrimalGraph& g) {
    const std::size_t n = g.vertex_count();
    DegreeStats s;
    if (n == 0) {
        return s;
    }
    std::vector<double> deg(n);
    for (std::size_t v = 0; v < n; ++v) {
        deg[v] = static_cast<double>(g.degree(v));
    }
    std::sort(deg.begin(), deg.end());
    const double nn = static_cast<double>(n);
    double sum = 0;
    for (double d : deg) sum += d;
    const double mean = sum / nn;
    double sq = 0;
    for (double d : deg) sq += (d - mean) * (d - mean);

    s.min = deg.front() / nn;
    s.max = deg.back() / nn;
    s.mean = mean / nn;
    s.median = (n % 2 == 1 ? deg[n / 2] : (deg[n / 2 - 1] + deg[n / 2]) / 2) / nn;
    s.sd = std::sqrt(sq / nn) / nn;
    return s;
}

std::size_t ordering_width(const PrimalGraph& g, std::span<const std::size_t> ordering) {
    const std::size_t n = g.vertex_count();
    if (ordering.size() != n) {
        throw Error("ordering is not a permutation of the vertices");
    }
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pos(n, unset);
    for (std::size_t i = 0; i < n; ++i) {
        if (ordering[i] >= n || pos[ordering[i]] != unset) {
            throw Error("ordering is not a permutation of the vertices");
        }
        pos[ordering[i]] = i;
    }
    std::size_t width = 0;
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t parents = 0;
        for (std::size_t u : g.neighbours(v)) {
            parents += pos[u] < pos[v] ? 1 : 0;
        }
        width = std::max(width, parents);
    }
    return width;
}

std::size_t graph_width(const PrimalGraph& g, std::vector<std::size_t>* elimination) {
    const std::size_t n = g.vertex_count();
    std::vector<std::size_t> deg(n);
    std::set<std::pair<std::size_t, std::size_t>> queue;
    for (std::size_t v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        queue.emplace(deg[v], v);
    }
    std::vector<char> removed(n, 0);
    if (elimination) {
        elimination->clear();
    }
    std::size_t width = 0;
    while (!queue.empty()) {
        const auto [d, v] = *queue.begin();
        queue.erase(queue.begin());
        removed[v] = 1;
        width = std::max(width, d);
        if (elimination) {
            elimination->push_back(v);
        }
        for (std::size_t u : g.neighbours(v)) {
            if (!removed[u]) {
                queue.erase({deg[u], u});
                --deg[u];
                queue.emplace(deg[u], u);
            }
        }
    }
    return width;
}

double width_of_ordering(const PrimalGraph& g, std::span<const std::size_t> ordering) {
    const std::size_t w = ordering_width(g, ordering);
    return g.vertex_count() == 0 ? 0.0 : static_cast<double>(w) / static_cast<double>(g.vertex_count());
}

double width_of_graph(const PrimalGraph& g) {
    const std::size_t w = graph_width(g);
    return g.vertex_count() == 0 ? 0.0 : static_cast<double>(w) / static_cast<double>(g.vertex_count());
}

} // namespace cspsel

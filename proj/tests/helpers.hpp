#pragma once

#include "cspsel/graph.hpp"
#include "cspsel/instance.hpp"
#include "cspsel/perf_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace testing {

using namespace cspsel;

inline Variable var(std::string name, std::vector<Value> domain, bool aux = false) {
    return Variable{std::move(name), std::move(domain), aux};
}

inline std::vector<Value> range(Value lo, Value hi) {
    std::vector<Value> d;
    for (Value v = lo; v <= hi; ++v) d.push_back(v);
    return d;
}

inline Instance make_instance(std::vector<Variable> vars, std::vector<Constraint> cons) {
    Instance inst;
    inst.name = "t";
    inst.variables = std::move(vars);
    inst.constraints = std::move(cons);
    inst.ordering.resize(inst.variables.size());
    std::iota(inst.ordering.begin(), inst.ordering.end(), 0);
    return inst;
}

inline PrimalGraph graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
    return PrimalGraph::from_edges(n, edges);
}

// Minimum ordering width over all n! orderings.
inline std::size_t brute_force_width(const PrimalGraph& g) {
    std::vector<std::size_t> order(g.vertex_count());
    std::iota(order.begin(), order.end(), 0);
    std::size_t best = g.vertex_count();
    do {
        best = std::min(best, ordering_width(g, order));
    } while (std::next_permutation(order.begin(), order.end()));
    return g.vertex_count() == 0 ? 0 : best;
}

inline bool connected(const PrimalGraph& g) {
    const std::size_t n = g.vertex_count();
    if (n == 0) return true;
    std::vector<bool> seen(n);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto u : g.neighbours(v)) {
            if (!seen[u]) {
                seen[u] = true;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == n;
}

// Graph whose edges are the set bits of `mask` over the n(n-1)/2 pairs.
inline PrimalGraph graph_from_mask(std::size_t n, std::uint64_t mask) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t bit = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v, ++bit) {
            if (mask >> bit & 1) edges.emplace_back(u, v);
        }
    }
    return PrimalGraph::from_edges(n, edges);
}

inline RunRecord solved(double cpu, double nodes = 1000) {
    return RunRecord{cpu, nodes, RunStatus::solved};
}

inline RunRecord timed_out(double timeout = kDefaultTimeoutSeconds, double nodes = 1000) {
    return RunRecord{timeout, nodes, RunStatus::timeout};
}

inline SolverSet solver_set(std::vector<std::string> names, std::size_t naive = 0, std::size_t def = 1) {
    SolverSet s;
    s.names = std::move(names);
    s.naive = naive;
    s.default_solver = def;
    return s;
}

// Random complete matrix: each cell solved with probability 0.8, else timeout.
inline RuntimeMatrix random_matrix(Rng& rng, std::size_t solvers, std::size_t instances) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < solvers; ++s) names.push_back("s" + std::to_string(s));
    SolverSet set = solver_set(names, 0, 1);
    std::vector<std::string> inst;
    std::vector<std::vector<RunRecord>> rows;
    for (std::size_t i = 0; i < instances; ++i) {
        inst.push_back("i" + std::to_string(i));
        std::vector<RunRecord> row;
        for (std::size_t s = 0; s < solvers; ++s) {
            if (uniform_unit(rng) < 0.8) {
                row.push_back(solved(uniform_unit(rng) * 3000, std::floor(uniform_unit(rng) * 1e6)));
            } else {
                row.push_back(timed_out(set.timeout_seconds));
            }
        }
        rows.push_back(std::move(row));
    }
    return RuntimeMatrix(set, inst, rows);
}

} // namespace testing

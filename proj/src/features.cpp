#include "cspsel/features.hpp"

#include "cspsel/graph.hpp"
#include "csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace cspsel {

FeatureSet parse_feature_set(std::string_view text) {
    if (text == "full") return FeatureSet::full;
    if (text == "cheap") return FeatureSet::cheap;
    throw Error("unknown feature set '" + std::string(text) + "' (want full or cheap)");
}

std::string_view to_string(FeatureSet set) noexcept {
    return set == FeatureSet::full ? "full" : "cheap";
}

namespace {

constexpr std::array<std::string_view, 29> cheap_names() {
    std::array<std::string_view, 29> out{};
    std::size_t k = 0;
    for (auto name : kFullFeatureNames) {
        bool excluded = false;
        for (auto x : kCheapExcluded) excluded = excluded || x == name;
        if (!excluded) out[k++] = name;
    }
    return out;
}

constexpr std::array<std::string_view, 29> kCheapFeatureNames = cheap_names();
static_assert(kFullFeatureNames.size() - kCheapExcluded.size() == kCheapFeatureNames.size());

} // namespace

std::span<const std::string_view> feature_names(FeatureSet set) {
    if (set == FeatureSet::full) return kFullFeatureNames;
    return kCheapFeatureNames;
}

bool is_unit_interval_feature(std::string_view name) {
    if (name.substr(0, 4) == "dom_" || name.substr(0, 6) == "arity_" || name.substr(0, 3) == "ad_") {
        return false;
    }
    return name != "aux_ratio";
}

double FeatureVector::at(std::string_view name) const {
    const auto ns = names();
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] == name) return values.at(i);
    }
    throw Error("feature '" + std::string(name) + "' not in the " + std::string(to_string(set)) + " set");
}

Summary6 summary6(std::span<const double> values) {
    Summary6 s;
    if (values.empty()) {
        s.degenerate = true;
        return s;
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    auto quantile = [&](double p) {
        const double h = p * static_cast<double>(k - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = static_cast<std::size_t>(std::ceil(h));
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.min = v.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = v.back();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(k);
    return s;
}

Summary6 domain_features(const Instance& inst) {
    std::vector<double> sizes;
    sizes.reserve(inst.variables.size());
    for (const auto& v : inst.variables) {
        sizes.push_back(static_cast<double>(v.domain.size()));
    }
    return summary6(sizes);
}

Summary6 arity_features(const Instance& inst) {
    const double m = static_cast<double>(inst.constraints.size());
    std::vector<double> a;
    a.reserve(inst.constraints.size());
    for (const auto& c : inst.constraints) {
        a.push_back(static_cast<double>(c.arity()) / m);
    }
    return summary6(a);
}

double multiple_shared_variables(const Instance& inst) {
    const std::size_t m = inst.constraints.size();
    if (m < 2) {
        return 0.0;
    }
    std::vector<std::vector<std::size_t>> incidence(inst.variables.size());
    for (std::size_t ci = 0; ci < m; ++ci) {
        for (std::size_t v : inst.constraints[ci].scope) {
            incidence[v].push_back(ci);
        }
    }
    // shared[cj] counts variables constraint ci has in common with each later cj.
    std::vector<std::uint32_t> shared(m, 0);
    std::vector<std::size_t> touched;
    std::uint64_t pairs = 0;
    for (std::size_t ci = 0; ci < m; ++ci) {
        for (std::size_t v : inst.constraints[ci].scope) {
            for (std::size_t cj : incidence[v]) {
                if (cj <= ci) continue;
                if (shared[cj]++ == 0) touched.push_back(cj);
            }
        }
        for (std::size_t cj : touched) {
            pairs += shared[cj] >= 2 ? 1 : 0;
            shared[cj] = 0;
        }
        touched.clear();
    }
    const double md = static_cast<double>(m);
    return static_cast<double>(pairs) / (md * (md - 1) / 2);
}

double mean_constraints_per_variable(const Instance& inst) {
    const std::size_t m = inst.constraints.size();
    if (m == 0 || inst.variables.empty()) {
        return 0.0;
    }
    std::size_t memberships = 0;
    for (const auto& c : inst.constraints) {
        memberships += c.arity();
    }
    const double mean = static_cast<double>(memberships) / static_cast<double>(inst.variables.size());
    return mean / static_cast<double>(m);
}

double aux_ratio(const Instance& inst, std::vector<std::string>* diagnostics) {
    std::size_t aux = 0;
    for (const auto& v : inst.variables) {
        aux += v.aux ? 1 : 0;
    }
    const std::size_t plain = inst.variables.size() - aux;
    if (plain == 0) {
        if (diagnostics && aux > 0) {
            diagnostics->push_back("aux_ratio: no non-auxiliary variables, reported as 0");
        }
        return 0.0;
    }
    return static_cast<double>(aux) / static_cast<double>(plain);
}

std::uint64_t scope_domain_product(const Instance& inst, const Constraint& c) {
    std::uint64_t p = 1;
    for (std::size_t v : c.scope) {
        const std::uint64_t d = inst.variables[v].domain.size();
        if (p > std::numeric_limits<std::uint64_t>::max() / d) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        p *= d;
    }
    return p;
}

double exact_tightness(const Instance& inst, const Constraint& c) {
    const std::size_t a = c.arity();
    std::vector<std::size_t> idx(a, 0);
    Tuple t(a);
    for (std::size_t i = 0; i < a; ++i) {
        t[i] = inst.variables[c.scope[i]].domain[0];
    }
    std::uint64_t total = 0;
    std::uint64_t violated = 0;
    for (;;) {
        ++total;
        violated += satisfies(c, t) ? 0 : 1;
        // Odometer increment, last position fastest.
        std::size_t pos = a;
        while (pos > 0) {
            --pos;
            const auto& dom = inst.variables[c.scope[pos]].domain;
            if (++idx[pos] < dom.size()) {
                t[pos] = dom[idx[pos]];
                break;
            }
            idx[pos] = 0;
            t[pos] = dom[0];
            if (pos == 0) {
                return static_cast<double>(violated) / static_cast<double>(total);
            }
        }
        if (a == 0) {
            return static_cast<double>(violated) / static_cast<double>(total);
        }
    }
}

double sampled_tightness(const Instance& inst, const Constraint& c, Rng& rng, std::size_t samples) {
    if (samples == 0) {
        throw Error("tightness needs at least one sample");
    }
    std::vector<const std::vector<Value>*> doms;
    for (std::size_t v : c.scope) doms.push_back(&inst.variables[v].domain);
    std::size_t violated = 0;
    if (c.kind == ConstraintKind::alldifferent) {
        // Draw positions in order and stop at the first repeated value; the
        // rest of the tuple cannot change the outcome.
        std::vector<Value> values;
        for (const auto* d : doms) values.insert(values.end(), d->begin(), d->end());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::vector<std::vector<std::uint32_t>> ids(doms.size());
        for (std::size_t i = 0; i < doms.size(); ++i) {
            for (Value x : *doms[i]) {
                ids[i].push_back(static_cast<std::uint32_t>(
                    std::lower_bound(values.begin(), values.end(), x) - values.begin()));
            }
        }
        std::vector<std::size_t> stamp(values.size(), 0);
        for (std::size_t s = 1; s <= samples; ++s) {
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const std::uint32_t id = ids[i][uniform_index(rng, ids[i].size())];
                if (stamp[id] == s) {
                    ++violated;
                    break;
                }
                stamp[id] = s;
            }
        }
    } else {
        // Same draws as sample_valid_tuple, without a fresh tuple per sample.
        Tuple t(c.arity());
        for (std::size_t s = 0; s < samples; ++s) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                t[i] = (*doms[i])[uniform_index(rng, doms[i]->size())];
            }
            violated += satisfies(c, t) ? 0 : 1;
        }
    }
    return static_cast<double>(violated) / static_cast<double>(samples);
}

namespace {

// Content hash that ignores variable indices and names, so renaming or
// reordering declarations keeps each constraint's sample stream.
std::uint64_t constraint_hash(const Instance& inst, const Constraint& c) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(c.kind) * 31 + (c.allowed ? 1 : 0));
    auto mix = [&h](std::uint64_t x) { h = splitmix64(h ^ x); };
    mix(static_cast<std::uint64_t>(c.op));
    mix(static_cast<std::uint64_t>(c.offset));
    for (std::size_t v : c.scope) {
        const auto& dom = inst.variables[v].domain;
        mix(dom.size());
        for (Value x : dom) mix(static_cast<std::uint64_t>(x));
    }
    for (const auto& t : c.tuples) {
        for (Value x : t) mix(static_cast<std::uint64_t>(x));
    }
    return h;
}

} // namespace

double constraint_tightness(const Instance& inst, const Constraint& c, std::uint64_t seed, std::size_t samples) {
    if (samples == 0) {
        throw Error("tightness needs at least one sample");
    }
    if (scope_domain_product(inst, c) <= samples) {
        return exact_tightness(inst, c);
    }
    Rng rng(splitmix64(seed ^ constraint_hash(inst, c)));
    return sampled_tightness(inst, c, rng, samples);
}

Summary6 tightness_features(const Instance& inst, std::uint64_t seed, std::size_t samples) {
    std::vector<double> t;
    t.reserve(inst.constraints.size());
    for (const auto& c : inst.constraints) {
        t.push_back(constraint_tightness(inst, c, seed, samples));
    }
    return summary6(t);
}

namespace {

struct IncidenceEdge {
    std::size_t label;
    std::size_t neighbour;
};

// Initial colour key and per-position edge labels for one constraint vertex.
// Positions that the constraint cannot tell apart share a label, and
// equivalent spellings of the same relation get the same key.
struct ConstraintSignature {
    std::vector<std::int64_t> key;
    std::vector<std::size_t> scope;  // possibly reordered to the canonical orientation
    std::vector<std::size_t> labels; // one per scope position
};

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

constexpr std::size_t kMaxSymmetricArity = 4;

std::vector<Tuple> permute_tuples(const std::vector<Tuple>& tuples, const std::vector<std::size_t>& perm) {
    std::vector<Tuple> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) {
        Tuple u(perm.size());
        for (std::size_t j = 0; j < perm.size(); ++j) u[j] = t[perm[j]];
        out.push_back(std::move(u));
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConstraintSignature signature(const Constraint& c) {
    ConstraintSignature s;
    const std::size_t a = c.arity();
    switch (c.kind) {
    case ConstraintKind::alldifferent:
        s.key = {1, 0, static_cast<std::int64_t>(a)};
        s.scope = c.scope;
        s.labels.assign(a, 0);
        break;
    case ConstraintKind::relation: {
        // Rewrite to one of  x < y + k,  x = y + k (k >= 0),  x != y + k (k >= 0).
        std::size_t x = c.scope[0];
        std::size_t y = c.scope[1];
        Value k = c.offset;
        RelOp op = c.op;
        if (op == RelOp::gt || op == RelOp::ge) {
            std::swap(x, y);
            k = -k;
            op = op == RelOp::gt ? RelOp::lt : RelOp::le;
        }
        if (op == RelOp::le) {
            op = RelOp::lt;
            k += 1;
        }
        if ((op == RelOp::eq || op == RelOp::ne) && k < 0) {
            std::swap(x, y);
            k = -k;
        }
        s.key = {1, 1, static_cast<std::int64_t>(op), k};
        s.scope = {x, y};
        const bool symmetric = (op == RelOp::eq || op == RelOp::ne) && k == 0;
        s.labels = {0, symmetric ? 0u : 1u};
        break;
    }
    case ConstraintKind::extension: {
        s.key = {1, 2, c.allowed ? 1 : 0, static_cast<std::int64_t>(a)};
        std::vector<std::size_t> best_perm(a);
        std::iota(best_perm.begin(), best_perm.end(), 0);
        std::vector<Tuple> best = c.tuples;
        if (a <= kMaxSymmetricArity) {
            // Canonical orientation: the position permutation giving the
            // lexicographically smallest sorted tuple list.
            std::vector<std::size_t> perm = best_perm;
            while (std::next_permutation(perm.begin(), perm.end())) {
                auto candidate = permute_tuples(c.tuples, perm);
                if (candidate < best) {
                    best = std::move(candidate);
                    best_perm = perm;
                }
            }
            // Orbits of the positions under the tuple set's symmetry group.
            UnionFind orbits(a);
            std::vector<std::size_t> sigma(a);
            std::iota(sigma.begin(), sigma.end(), 0);
            while (std::next_permutation(sigma.begin(), sigma.end())) {
                if (permute_tuples(best, sigma) == best) {
                    for (std::size_t j = 0; j < a; ++j) orbits.unite(j, sigma[j]);
                }
            }
            for (std::size_t j = 0; j < a; ++j) s.labels.push_back(orbits.find(j));
        } else {
            for (std::size_t j = 0; j < a; ++j) s.labels.push_back(j);
        }
        for (std::size_t j = 0; j < a; ++j) s.scope.push_back(c.scope[best_perm[j]]);
        s.key.push_back(static_cast<std::int64_t>(best.size()));
        for (const auto& t : best) s.key.insert(s.key.end(), t.begin(), t.end());
        break;
    }
    }
    return s;
}

} // namespace

std::vector<std::size_t> symmetry_classes(const Instance& inst) {
    const std::size_t n = inst.variables.size();
    const std::size_t m = inst.constraints.size();
    std::vector<std::vector<IncidenceEdge>> adj(n + m);

    std::map<std::vector<std::int64_t>, std::size_t> initial;
    std::vector<std::vector<std::int64_t>> keys(n + m);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& var = inst.variables[v];
        keys[v] = {0, var.aux ? 1 : 0, static_cast<std::int64_t>(var.domain.size())};
        keys[v].insert(keys[v].end(), var.domain.begin(), var.domain.end());
    }
    for (std::size_t ci = 0; ci < m; ++ci) {
        ConstraintSignature sig = signature(inst.constraints[ci]);
        keys[n + ci] = std::move(sig.key);
        for (std::size_t j = 0; j < sig.scope.size(); ++j) {
            adj[n + ci].push_back({sig.labels[j], sig.scope[j]});
            adj[sig.scope[j]].push_back({sig.labels[j], n + ci});
        }
    }
    for (const auto& k : keys) initial.emplace(k, 0);
    std::size_t next = 0;
    for (auto& [k, id] : initial) id = next++;

    std::vector<std::size_t> colour(n + m);
    for (std::size_t v = 0; v < n + m; ++v) colour[v] = initial.at(keys[v]);
    std::size_t classes = initial.size();

    for (;;) {
        std::vector<std::vector<std::size_t>> sigs(n + m);
        for (std::size_t v = 0; v < n + m; ++v) {
            std::vector<std::pair<std::size_t, std::size_t>> around;
            around.reserve(adj[v].size());
            for (const auto& e : adj[v]) around.emplace_back(e.label, colour[e.neighbour]);
            std::sort(around.begin(), around.end());
            auto& s = sigs[v];
            s.reserve(1 + 2 * around.size());
            s.push_back(colour[v]);
            for (auto [l, c] : around) {
                s.push_back(l);
                s.push_back(c);
            }
        }
        std::map<std::vector<std::size_t>, std::size_t> ids;
        for (const auto& s : sigs) ids.emplace(s, 0);
        next = 0;
        for (auto& [s, id] : ids) id = next++;
        for (std::size_t v = 0; v < n + m; ++v) colour[v] = ids.at(sigs[v]);
        if (ids.size() == classes) break;
        classes = ids.size();
    }
    return {colour.begin(), colour.begin() + static_cast<std::ptrdiff_t>(n)};
}

double symmetry_proportion(const Instance& inst) {
    const std::size_t n = inst.variables.size();
    if (n < 2) {
        return 0.0;
    }
    std::map<std::size_t, std::size_t> parts;
    for (std::size_t c : symmetry_classes(inst)) ++parts[c];
    double same = 0;
    for (auto [c, size] : parts) {
        same += static_cast<double>(size) * static_cast<double>(size - 1) / 2;
    }
    const double nn = static_cast<double>(n);
    return same / (nn * (nn - 1) / 2);
}

Summary6 alldiff_features(const Instance& inst) {
    std::vector<double> ratios;
    std::vector<Value> pool;
    for (const auto& c : inst.constraints) {
        if (c.kind != ConstraintKind::alldifferent) continue;
        pool.clear();
        for (std::size_t v : c.scope) {
            const auto& d = inst.variables[v].domain;
            pool.insert(pool.end(), d.begin(), d.end());
        }
        std::sort(pool.begin(), pool.end());
        const auto distinct = static_cast<double>(std::unique(pool.begin(), pool.end()) - pool.begin());
        ratios.push_back(distinct / static_cast<double>(c.arity()));
    }
    return summary6(ratios);
}

namespace {

void push_summary(std::vector<double>& out, const Summary6& s) {
    out.insert(out.end(), {s.min, s.q1, s.median, s.q3, s.max, s.mean});
}

} // namespace

FeatureVector extract(const Instance& inst, FeatureSet set, std::uint64_t seed, std::size_t samples) {
    FeatureVector fv;
    fv.instance = inst.name;
    fv.set = set;
    auto& out = fv.values;
    out.reserve(feature_names(set).size());

    const auto start = std::chrono::steady_clock::now();

    if (set == FeatureSet::cheap) {
        out.push_back(edge_density(inst.variables.size(), primal_edge_count(inst)));
    } else {
        const PrimalGraph g = build_primal_graph(inst);
        out.push_back(edge_density(g));
        out.push_back(clustering_coefficient(g));
        const DegreeStats d = degree_stats(g);
        out.insert(out.end(), {d.min, d.max, d.mean, d.median, d.sd});
        out.push_back(width_of_ordering(g, inst.ordering));
        out.push_back(width_of_graph(g));
    }

    const Summary6 dom = domain_features(inst);
    if (dom.degenerate) fv.diagnostics.push_back("domains: no variables, reported as 0");
    push_summary(out, dom);

    const Summary6 ar = arity_features(inst);
    if (ar.degenerate) fv.diagnostics.push_back("arity: no constraints, reported as 0");
    push_summary(out, ar);

    out.push_back(multiple_shared_variables(inst));
    out.push_back(mean_constraints_per_variable(inst));
    out.push_back(aux_ratio(inst, &fv.diagnostics));

    const Summary6 tight = tightness_features(inst, seed, samples);
    if (tight.degenerate) fv.diagnostics.push_back("tightness: no constraints, reported as 0");
    push_summary(out, tight);

    out.push_back(symmetry_proportion(inst));

    const Summary6 ad = alldiff_features(inst);
    if (ad.degenerate) fv.diagnostics.push_back("alldifferent: no alldifferent constraints, reported as 0");
    push_summary(out, ad);

    fv.extract_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (out.size() != feature_names(set).size()) {
        throw Error("internal: feature vector length mismatch");
    }
    for (double x : out) {
        if (!std::isfinite(x)) {
            throw Error("internal: non-finite feature value");
        }
    }
    return fv;
}

std::string write_features_csv(std::span<const FeatureVector> vectors) {
    std::ostringstream out;
    const FeatureSet set = vectors.empty() ? FeatureSet::full : vectors.front().set;
    out << "instance";
    for (auto name : feature_names(set)) out << ',' << name;
    out << ",extract_seconds\n";
    for (const auto& fv : vectors) {
        if (fv.set != set) {
            throw Error("cannot mix full and cheap vectors in one features file");
        }
        out << fv.instance;
        for (double x : fv.values) out << ',' << format_double(x);
        out << ',' << format_double(fv.extract_seconds) << '\n';
    }
    return out.str();
}

std::vector<FeatureVector> parse_features_csv(std::string_view text) {
    const auto rows = csv::read(text);
    if (rows.empty()) {
        throw ParseError("features file is empty", 1, 1);
    }
    const auto& header = rows.front();
    FeatureSet set = FeatureSet::full;
    if (header.fields.size() == kCheapFeatureNames.size() + 2) {
        set = FeatureSet::cheap;
    }
    std::vector<std::string> expected{"instance"};
    for (auto name : feature_names(set)) expected.emplace_back(name);
    expected.emplace_back("extract_seconds");
    csv::expect_header(header, expected);

    std::vector<FeatureVector> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != expected.size()) {
            throw ParseError("expected " + std::to_string(expected.size()) + " fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line, 1);
        }
        FeatureVector fv;
        fv.instance = row.fields[0];
        fv.set = set;
        try {
            for (std::size_t i = 1; i + 1 < row.fields.size(); ++i) {
                fv.values.push_back(parse_double(row.fields[i]));
            }
            fv.extract_seconds = parse_double(row.fields.back());
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), row.line, 1);
        }
        out.push_back(std::move(fv));
    }
    return out;
}

} // namespace cspsel

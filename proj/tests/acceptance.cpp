// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "cspsel/evaluation.hpp"
#include "cspsel/features.hpp"
#include "cspsel/graph.hpp"
#include "cspsel/instance.hpp"
#include "cspsel/perf_data.hpp"
#include "cspsel/pipeline.hpp"
#include "cspsel/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

using namespace cspsel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, double limit_seconds, const std::function<Outcome()>& check) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double took = seconds_since(start);
    if (limit_seconds > 0 && took > limit_seconds) {
        o.pass = false;
        o.detail += "; over the time limit";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s (%s; %.3f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), took);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// -- shared fixtures ---------------------------------------------------------

Instance plain_instance(std::vector<Variable> vars, std::vector<Constraint> cons) {
    Instance inst;
    inst.name = "a";
    inst.variables = std::move(vars);
    inst.constraints = std::move(cons);
    inst.ordering.resize(inst.variables.size());
    std::iota(inst.ordering.begin(), inst.ordering.end(), 0);
    return inst;
}

std::vector<Value> range(Value lo, Value hi) {
    std::vector<Value> d;
    for (Value v = lo; v <= hi; ++v) d.push_back(v);
    return d;
}

RuntimeMatrix random_matrix(Rng& rng, std::size_t solvers, std::size_t instances) {
    SolverSet set;
    for (std::size_t s = 0; s < solvers; ++s) set.names.push_back("s" + std::to_string(s));
    set.naive = 0;
    set.default_solver = 1;
    std::vector<std::string> names;
    std::vector<std::vector<RunRecord>> rows;
    for (std::size_t i = 0; i < instances; ++i) {
        names.push_back("i" + std::to_string(i));
        std::vector<RunRecord> row;
        for (std::size_t s = 0; s < solvers; ++s) {
            if (uniform_unit(rng) < 0.8) {
                row.push_back({uniform_unit(rng) * set.timeout_seconds, std::floor(uniform_unit(rng) * 1e6),
                               RunStatus::solved});
            } else {
                row.push_back({set.timeout_seconds, 0, RunStatus::timeout});
            }
        }
        rows.push_back(std::move(row));
    }
    return RuntimeMatrix(set, names, rows);
}

PrimalGraph graph_from_mask(std::size_t n, std::uint64_t mask) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t bit = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v, ++bit)
            if (mask >> bit & 1) edges.emplace_back(u, v);
    return PrimalGraph::from_edges(n, edges);
}

bool connected(const PrimalGraph& g) {
    std::vector<bool> seen(g.vertex_count());
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto u : g.neighbours(v))
            if (!seen[u]) {
                seen[u] = true;
                ++count;
                stack.push_back(u);
            }
    }
    return count == g.vertex_count();
}

double brute_force_width(const PrimalGraph& g) {
    std::vector<std::size_t> order(g.vertex_count());
    std::iota(order.begin(), order.end(), 0);
    double best = 2;
    do {
        best = std::min(best, width_of_ordering(g, order));
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

struct Split {
    std::vector<FeatureVector> features;
    std::vector<LabeledInstance> labels;
    RuntimeMatrix runtimes;
};

Split prepare(const SynthSpec& spec, FeatureSet set) {
    const SynthData data = synth_generate(spec);
    Split s;
    for (const auto& si : data.instances) s.features.push_back(extract(si.instance, set, spec.seed));
    s.labels = label_all(data.runtimes);
    s.runtimes = data.runtimes;
    return s;
}

std::vector<std::string> schema(FeatureSet set) {
    std::vector<std::string> names;
    for (auto n : feature_names(set)) names.emplace_back(n);
    return names;
}

double meta_penalty(const Split& train, const Split& test, bool cost_model, std::uint64_t seed) {
    MetaOptions opt;
    opt.cost_model = cost_model;
    opt.seed = seed;
    const auto rows = join_rows(train.features, train.labels);
    const Ensemble e = train_meta(rows, schema(train.features.front().set), train.runtimes.solvers(),
                                  default_learner_bank(), opt);
    return evaluate("meta", ensemble_chooser(e), test.features, test.runtimes).total_penalty_seconds;
}

// -- criteria ----------------------------------------------------------------

Outcome duplication_formula() {
    const auto start = Clock::now();
    const std::size_t a = duplication_copies(3600);
    const std::size_t b = duplication_copies(1);
    const std::size_t c = duplication_copies(0);
    const std::size_t d = duplication_copies(0.25);
    const std::size_t e = duplication_copies(10);
    const double took = seconds_since(start);
    const bool ok = a == 13 && b == 1 && c == 1 && d == 1 && e == 5 && took < 1e-3;
    return {ok, "3600->" + std::to_string(a) + ", 1->" + std::to_string(b) + ", 0->" + std::to_string(c) +
                    ", 0.25->" + std::to_string(d) + ", 10->" + std::to_string(e) + fmt(", %.1f us", took * 1e6)};
}

Outcome oracle_bounds() {
    std::size_t violations = 0;
    std::size_t choosers = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        const RuntimeMatrix m = random_matrix(rng, 10, 100);
        if (evaluate("o", baseline(BaselineKind::oracle, m), m).total_penalty_seconds != 0) ++violations;
        const double anti = evaluate("x", baseline(BaselineKind::anti_oracle, m), m).total_penalty_seconds;
        std::vector<Chooser> others{baseline(BaselineKind::default_decision, m),
                                    baseline(BaselineKind::random_decision, m, seed)};
        const std::size_t fixed = uniform_index(rng, 10);
        others.push_back([fixed](std::string_view, std::span<const double>) { return fixed; });
        for (const auto& c : others) {
            const double t = evaluate("c", c, m).total_penalty_seconds;
            ++choosers;
            if (t < 0 || t > anti) ++violations;
        }
    }
    return {violations == 0, std::to_string(choosers) + " chooser totals checked, " + std::to_string(violations) +
                                 " violations"};
}

Outcome graph_width_oracle() {
    std::size_t checked = 0, mismatches = 0;
    for (std::size_t n = 1; n <= 5; ++n) {
        const std::uint64_t masks = std::uint64_t{1} << (n * (n - 1) / 2);
        for (std::uint64_t m = 0; m < masks; ++m) {
            const PrimalGraph g = graph_from_mask(n, m);
            if (!connected(g)) continue;
            ++checked;
            if (width_of_graph(g) != brute_force_width(g)) ++mismatches;
        }
    }
    Rng rng(2718);
    std::size_t sampled = 0;
    while (sampled < 500) {
        const std::size_t n = 6 + uniform_index(rng, 2);
        const PrimalGraph g = graph_from_mask(n, rng());
        if (!connected(g)) continue;
        ++sampled;
        ++checked;
        if (width_of_graph(g) != brute_force_width(g)) ++mismatches;
    }
    return {mismatches == 0, std::to_string(checked) + " connected graphs, " + std::to_string(mismatches) +
                                 " mismatches"};
}

Outcome tightness_sampling() {
    Rng gen(1618);
    std::size_t runs = 0, within = 0;
    for (int c = 0; c < 50; ++c) {
        // Binary or ternary constraint whose domain product exceeds 1000, so
        // the 1000-sample budget cannot enumerate it.
        const std::size_t kind = uniform_index(gen, 3);
        const std::size_t arity = kind == 1 ? 2 : 2 + uniform_index(gen, 2);
        std::vector<Variable> vars;
        std::vector<std::size_t> scope;
        const Value size = arity == 2 ? 35 + Value(uniform_index(gen, 30)) : 11 + Value(uniform_index(gen, 8));
        for (std::size_t i = 0; i < arity; ++i) {
            vars.push_back({"v" + std::to_string(i), range(0, size - 1), false});
            scope.push_back(i);
        }
        Constraint con;
        switch (kind) {
        case 0: con = Constraint::alldifferent(scope); break;
        case 1:
            con = Constraint::relation(0, static_cast<RelOp>(uniform_index(gen, 6)), 1,
                                       Value(uniform_index(gen, 9)) - 4);
            break;
        default: {
            std::vector<Tuple> tuples;
            Tuple t(arity, 0);
            std::function<void(std::size_t)> rec = [&](std::size_t pos) {
                if (pos == arity) {
                    if (uniform_unit(gen) < 0.3) tuples.push_back(t);
                    return;
                }
                for (Value v = 0; v < size; ++v) {
                    t[pos] = v;
                    rec(pos + 1);
                }
            };
            rec(0);
            con = Constraint::extension(scope, uniform_unit(gen) < 0.5, tuples);
        }
        }
        const Instance inst = plain_instance(vars, {con});
        if (scope_domain_product(inst, con) <= kDefaultTightnessSamples) {
            return {false, "fixture constraint is small enough to enumerate"};
        }
        const double exact = exact_tightness(inst, con);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(seed * 7919 + c);
            ++runs;
            if (std::abs(sampled_tightness(inst, con, rng, kDefaultTightnessSamples) - exact) <= 0.05) ++within;
        }
    }
    const double frac = double(within) / double(runs);
    return {frac >= 0.95, std::to_string(within) + "/" + std::to_string(runs) + fmt(" runs within 0.05 (%.3f)", frac)};
}

Outcome symmetry_example() {
    std::vector<Tuple> tuples;
    for (Value a = 0; a <= 3; ++a)
        for (Value b = 0; b <= 3; ++b)
            if (a * b <= 3) tuples.push_back({a, b, a * b});
    std::vector<Variable> vars;
    for (int i = 1; i <= 6; ++i) vars.push_back({"x" + std::to_string(i), range(0, 3), false});
    const Instance inst = plain_instance(vars, {Constraint::extension({0, 1, 2}, true, tuples),
                                                Constraint::extension({3, 4, 5}, true, tuples)});
    const auto cls = symmetry_classes(inst);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> ids = cls;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto id : ids) sizes.push_back(std::count(cls.begin(), cls.end(), id));
    std::sort(sizes.begin(), sizes.end());
    const bool same_parts = cls[0] == cls[1] && cls[0] == cls[3] && cls[0] == cls[4] && cls[2] == cls[5];
    const double p = symmetry_proportion(inst);
    const bool ok = sizes == std::vector<std::size_t>{2, 4} && same_parts && std::abs(p - 7.0 / 15) < 1e-12;
    return {ok, "parts " + std::to_string(sizes.size() > 1 ? sizes[1] : 0) + "+" +
                    std::to_string(sizes.empty() ? 0 : sizes[0]) + fmt(", proportion %.6f (7/15 = %.6f)", p, 7.0 / 15)};
}

Outcome feature_ranges() {
    SynthSpec spec;
    spec.count = 200;
    spec.seed = 31;
    const SynthData data = synth_generate(spec);
    std::size_t bad = 0;
    for (const auto& si : data.instances) {
        for (auto set : {FeatureSet::full, FeatureSet::cheap}) {
            const FeatureVector fv = extract(si.instance, set, 5);
            const std::size_t want = set == FeatureSet::full ? 37 : 29;
            if (fv.values.size() != want) ++bad;
            for (std::size_t i = 0; i < fv.values.size(); ++i) {
                const double v = fv.values[i];
                if (!std::isfinite(v)) ++bad;
                if (is_unit_interval_feature(fv.names()[i]) && (v < 0 || v > 1)) ++bad;
            }
            if (extract(si.instance, set, 5).values != fv.values) ++bad;
        }
    }
    return {bad == 0, "400 vectors, " + std::to_string(bad) + " problems"};
}

Outcome stratified_folds() {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng gen(seed);
        const std::size_t n = 20 + uniform_index(gen, 500);
        const std::size_t nc = 2 + uniform_index(gen, 8);
        const std::size_t k = 2 + uniform_index(gen, 9);
        std::vector<std::size_t> classes;
        for (std::size_t i = 0; i < n; ++i) classes.push_back(uniform_index(gen, nc));
        Rng rng(seed + 1000);
        const auto fold = stratified_kfold(classes, k, rng);
        std::vector<double> total(nc, 0);
        std::vector<std::vector<double>> per(k, std::vector<double>(nc, 0));
        for (std::size_t i = 0; i < n; ++i) {
            total[classes[i]] += 1;
            per[fold[i]][classes[i]] += 1;
        }
        for (std::size_t f = 0; f < k; ++f)
            for (std::size_t c = 0; c < nc; ++c) worst = std::max(worst, std::abs(per[f][c] - total[c] / double(k)));
    }
    return {worst < 1.0, fmt("largest deviation %.4f", worst)};
}

Outcome labeling_rule() {
    SolverSet s;
    s.names = {"naive", "A", "B"};
    s.naive = 0;
    s.default_solver = 1;
    const auto a = label_instance(std::vector<RunRecord>{{10, 100, RunStatus::solved},
                                                         {12, 100, RunStatus::solved},
                                                         {15, 100, RunStatus::solved}},
                                  s);
    const auto b = label_instance(std::vector<RunRecord>{{20, 100, RunStatus::solved},
                                                         {10, 1000, RunStatus::solved},
                                                         {12, 1800, RunStatus::solved}},
                                  s);
    const auto c = label_instance(std::vector<RunRecord>{{3600, 1, RunStatus::timeout},
                                                         {3600, 1, RunStatus::timeout},
                                                         {3600, 1, RunStatus::timeout}},
                                  s);
    auto name = [&](const Label& l) { return l.dont_know() ? std::string(kDontKnow) : s.names[*l.solver]; };
    const bool ok = a.solver == std::optional<std::size_t>{0} && b.solver == std::optional<std::size_t>{2} &&
                    c.dont_know();
    return {ok, "(a) " + name(a) + ", (b) " + name(b) + ", (c) " + name(c)};
}

Outcome planted_end_to_end() {
    SynthSpec train_spec;
    train_spec.count = 300;
    train_spec.seed = 101;
    train_spec.margin_seconds = 10;
    train_spec.prefix = "train";
    SynthSpec test_spec = train_spec;
    test_spec.seed = 202;
    test_spec.prefix = "test";
    const Split train = prepare(train_spec, FeatureSet::full);
    const Split test = prepare(test_spec, FeatureSet::full);
    const double meta = meta_penalty(train, test, true, 1);
    const double def =
        evaluate("default", baseline(BaselineKind::default_decision, test.runtimes), test.runtimes).total_penalty_seconds;
    const double orc =
        evaluate("oracle", baseline(BaselineKind::oracle, test.runtimes), test.runtimes).total_penalty_seconds;
    const bool ok = meta < 0.5 * def && meta >= orc && orc == 0;
    return {ok, fmt("meta %.1f s vs default %.1f s", meta, def) + fmt(" (ratio %.3f), oracle %.1f s", meta / def, orc)};
}

Outcome cost_model_effect() {
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthSpec spec;
        spec.count = 300;
        spec.seed = 1000 + seed;
        spec.margin_seconds = 10;
        spec.noise = 0.1;
        // Hard gac_b-band cases only gac_d solves; without costs the band's
        // majority wins and every hard case times out.
        spec.rescue_fraction = 0.4;
        spec.prefix = "train";
        SynthSpec held = spec;
        held.seed = 5000 + seed;
        held.prefix = "test";
        const Split train = prepare(spec, FeatureSet::full);
        const Split test = prepare(held, FeatureSet::full);
        const double with = meta_penalty(train, test, true, seed);
        const double without = meta_penalty(train, test, false, seed);
        if (with <= without) ++wins;
        detail += fmt(" %.0f/%.0f", with, without);
    }
    return {wins >= 8, std::to_string(wins) + "/10 seeds with duplication <= without; with/without:" + detail};
}

Outcome persistence() {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthSpec spec;
        spec.count = 60;
        spec.seed = 70 + seed;
        const Split s = prepare(spec, FeatureSet::full);
        MetaOptions opt;
        opt.seed = seed;
        const auto rows = join_rows(s.features, s.labels);
        const Ensemble e = train_meta(rows, schema(FeatureSet::full), s.runtimes.solvers(), default_learner_bank(), opt);
        const Ensemble back = load_ensemble(save_ensemble(e));
        Rng rng(seed);
        for (int q = 0; q < 1000; ++q) {
            // Perturbed copies of real rows, so queries land on every branch.
            std::vector<double> x = rows[uniform_index(rng, rows.size())].features;
            for (auto& v : x) v *= 0.5 + uniform_unit(rng);
            if (predict_meta(e, x) != predict_meta(back, x)) ++mismatches;
        }
    }
    return {mismatches == 0, "10000 predictions, " + std::to_string(mismatches) + " mismatches"};
}

Instance large_instance() {
    Rng rng(12);
    const std::size_t n = 2000;
    std::vector<Variable> vars;
    for (std::size_t v = 0; v < n; ++v) vars.push_back({"v" + std::to_string(v), range(0, 9), v % 10 == 0});
    std::vector<Constraint> cons;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int c = 0; c < 40; ++c) {
        for (std::size_t i = 0; i < 100; ++i) std::swap(all[i], all[i + uniform_index(rng, n - i)]);
        cons.push_back(Constraint::alldifferent({all.begin(), all.begin() + 100}));
    }
    for (int c = 0; c < 2000; ++c) {
        const std::size_t a = uniform_index(rng, n);
        std::size_t b = uniform_index(rng, n - 1);
        if (b >= a) ++b;
        cons.push_back(Constraint::relation(a, RelOp::lt, b));
    }
    Instance inst = plain_instance(vars, cons);
    std::reverse(inst.ordering.begin(), inst.ordering.end());
    return inst;
}

Outcome cheap_relative_cost() {
    const Instance inst = large_instance();
    auto median3 = [&](FeatureSet set) {
        std::vector<double> t;
        for (int i = 0; i < 3; ++i) t.push_back(extract(inst, set, 1).extract_seconds);
        std::sort(t.begin(), t.end());
        return t[1];
    };
    const double full = median3(FeatureSet::full);
    const double cheap = median3(FeatureSet::cheap);
    return {cheap < 0.25 * full,
            std::to_string(inst.variables.size()) + " variables; " + fmt("cheap %.4f s, full %.4f s", cheap, full) +
                fmt(" (ratio %.3f)", cheap / full)};
}

} // namespace

int main() {
    report(1, "duplication formula", 0, duplication_formula);
    report(2, "oracle and anti-oracle bound every chooser", 10, oracle_bounds);
    report(3, "greedy graph width equals brute force", 60, graph_width_oracle);
    report(4, "tightness sampling accuracy", 30, tightness_sampling);
    report(5, "symmetry worked example", 0, symmetry_example);
    report(6, "feature count, ranges and determinism", 120, feature_ranges);
    report(7, "stratified fold proportions", 0, stratified_folds);
    report(8, "labeling rule", 0, labeling_rule);
    report(9, "planted-rule experiment beats the default decision", 300, planted_end_to_end);
    report(10, "cost model does not hurt on high-cost data", 600, cost_model_effect);
    report(11, "ensemble persistence round trip", 0, persistence);
    report(12, "cheap features cost under a quarter of full", 0, cheap_relative_cost);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

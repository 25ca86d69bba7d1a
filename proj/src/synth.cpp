#include "cspsel/synth.hpp"

#include "cspsel/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace cspsel {

SolverSet synth_solvers() {
    SolverSet s;
    s.names = {"naive", "gac_a", "gac_b", "gac_c", "gac_d"};
    s.naive = 0;
    s.default_solver = 1;
    s.timeout_seconds = kDefaultTimeoutSeconds;
    return s;
}

std::size_t planted_best(const Instance& inst, const SolverSet& solvers) {
    const double union_ratio = alldiff_features(inst).mean;
    if (union_ratio >= 1.5) {
        return solvers.index_of("naive");
    }
    const double dom = domain_features(inst).mean;
    if (dom < 4.5) return solvers.index_of("gac_a");
    if (dom < 7.5) return solvers.index_of("gac_b");
    return solvers.index_of("gac_c");
}

namespace {

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform_index(rng, hi - lo + 1));
}

std::vector<std::size_t> pick_distinct(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(all[i], all[i + uniform_index(rng, n - i)]);
    }
    all.resize(k);
    return all;
}

Instance random_instance(Rng& rng, const std::string& name) {
    Instance inst;
    inst.name = name;
    const std::size_t n = between(rng, 6, 16);
    const std::size_t base = between(rng, 2, 10);
    for (std::size_t v = 0; v < n; ++v) {
        Variable var;
        var.name = "x" + std::to_string(v);
        const std::size_t size = std::max<std::size_t>(1, base + between(rng, 0, 2) - 1);
        const Value start = static_cast<Value>(between(rng, 0, 1));
        for (std::size_t k = 0; k < size; ++k) var.domain.push_back(start + static_cast<Value>(k));
        var.aux = uniform_unit(rng) < 0.2;
        inst.variables.push_back(std::move(var));
    }

    const std::size_t alldiffs = between(rng, 1, 3);
    for (std::size_t a = 0; a < alldiffs; ++a) {
        const std::size_t arity = between(rng, 2, n);
        inst.constraints.push_back(Constraint::alldifferent(pick_distinct(rng, n, arity)));
    }
    const std::size_t rels = between(rng, 0, 4);
    for (std::size_t r = 0; r < rels; ++r) {
        const auto pair = pick_distinct(rng, n, 2);
        const auto op = static_cast<RelOp>(uniform_index(rng, 6));
        const Value offset = static_cast<Value>(between(rng, 0, 2)) - 1;
        inst.constraints.push_back(Constraint::relation(pair[0], op, pair[1], offset));
    }
    const std::size_t exts = between(rng, 0, 2);
    for (std::size_t e = 0; e < exts; ++e) {
        const auto scope = pick_distinct(rng, n, 2);
        std::vector<Tuple> tuples;
        for (Value x : inst.variables[scope[0]].domain) {
            for (Value y : inst.variables[scope[1]].domain) {
                if (uniform_unit(rng) < 0.4) tuples.push_back({x, y});
            }
        }
        inst.constraints.push_back(Constraint::extension(scope, uniform_unit(rng) < 0.5, std::move(tuples)));
    }

    inst.ordering.resize(n);
    std::iota(inst.ordering.begin(), inst.ordering.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(inst.ordering[i - 1], inst.ordering[uniform_index(rng, i)]);
    }
    validate(inst);
    return inst;
}

} // namespace

SynthData synth_generate(const SynthSpec& spec) {
    if (spec.count == 0) {
        throw Error("synth: count must be at least 1");
    }
    if (!(spec.margin_seconds > 0) || spec.noise < 0 || spec.noise > 1 || spec.high_cost_fraction < 0 ||
        spec.high_cost_fraction > 1 || spec.rescue_fraction < 0 || spec.rescue_fraction > 1) {
        throw Error("synth: margin must be positive and probabilities in [0, 1]");
    }
    SynthData data;
    data.solvers = synth_solvers();
    const auto& solvers = data.solvers;
    const double timeout = solvers.timeout_seconds;
    Rng rng(spec.seed);

    std::vector<std::string> names;
    std::vector<std::vector<RunRecord>> rows;
    const int width = std::max(4, static_cast<int>(std::to_string(spec.count - 1).size()));
    for (std::size_t i = 0; i < spec.count; ++i) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "%0*zu", width, i);
        SynthInstance si;
        si.instance = random_instance(rng, spec.prefix + "_" + suffix);
        si.rule_best = planted_best(si.instance, solvers);
        si.best = si.rule_best;
        if (uniform_unit(rng) < spec.noise) {
            si.best = static_cast<std::size_t>(uniform_index(rng, solvers.size()));
        }
        si.high_cost = uniform_unit(rng) < spec.high_cost_fraction;
        if (spec.rescue_fraction > 0 && si.rule_best == solvers.index_of("gac_b") &&
            uniform_unit(rng) < spec.rescue_fraction) {
            si.best = solvers.index_of("gac_d");
            si.high_cost = true;
        }

        // Base time log-uniform in [0.5, 200] s; the propagating versions all
        // search the same tree, so nodes/second ranks them like CPU time.
        const double base = 0.5 * std::exp(uniform_unit(rng) * std::log(400.0));
        const double rate = 1e3 * std::exp(uniform_unit(rng) * std::log(100.0));
        const double nodes = std::round(base * rate);
        const double naive_nodes = std::round(nodes * (1.0 + 2.0 * uniform_unit(rng)));

        std::vector<RunRecord> row(solvers.size());
        for (std::size_t s = 0; s < solvers.size(); ++s) {
            double cpu = base;
            if (s != si.best) {
                cpu = base + spec.margin_seconds;
                if (s != solvers.default_solver) cpu += 3 * spec.margin_seconds * uniform_unit(rng);
            }
            RunRecord& rec = row[s];
            const double explored = s == solvers.naive ? naive_nodes : nodes;
            if (cpu >= timeout || (si.high_cost && s != si.best)) {
                rec.status = RunStatus::timeout;
                rec.cpu_seconds = timeout;
                rec.nodes = std::round(explored * timeout / cpu);
            } else {
                rec.status = RunStatus::solved;
                rec.cpu_seconds = cpu;
                rec.nodes = explored;
            }
        }
        names.push_back(si.instance.name);
        rows.push_back(std::move(row));
        data.instances.push_back(std::move(si));
    }
    data.runtimes = RuntimeMatrix(solvers, std::move(names), std::move(rows));
    return data;
}

std::string write_planted_csv(const SynthData& data) {
    std::ostringstream out;
    out << "instance,rule_best,best,high_cost,default_gap_seconds\n";
    const auto& s = data.solvers;
    for (const auto& si : data.instances) {
        const auto row = data.runtimes.row(*data.runtimes.find(si.instance.name));
        out << si.instance.name << ',' << s.names[si.rule_best] << ',' << s.names[si.best] << ','
            << (si.high_cost ? 1 : 0) << ',' << format_double(misclassification_penalty(row, s.default_solver, s))
            << '\n';
    }
    return out.str();
}

} // namespace cspsel

#pragma once

#include "cspsel/instance.hpp"
#include "cspsel/perf_data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cspsel {

/// Knobs for the synthetic benchmark generator.
struct SynthSpec {
    std::size_t count = 50;
    std::uint64_t seed = 1;
    double margin_seconds = 10;     // default solver's gap behind the planted best
    double noise = 0;               // probability that the planted best is replaced at random
    double high_cost_fraction = 0;  // probability that every non-best solver times out
    // Probability that an instance the rule assigns to gac_b is instead a hard
    // case only gac_d solves. Features cannot tell these apart, so only a
    // cost-aware learner has a reason to pick gac_d in that band.
    double rescue_fraction = 0;
    std::string prefix = "inst";
};

struct SynthInstance {
    Instance instance;
    std::size_t rule_best = 0; // what the planted rule says
    std::size_t best = 0;      // what the runtimes make fastest (differs only under noise)
    bool high_cost = false;
};

struct SynthData {
    SolverSet solvers;
    std::vector<SynthInstance> instances;
    RuntimeMatrix runtimes;
};

/// naive (naive), gac_a (default), gac_b, gac_c, gac_d; timeout 3600 s.
/// gac_d never wins under the planted rule; it wins only on rescue cases.
SolverSet synth_solvers();

/// The planted rule. Loose alldifferent constraints (mean domain-union to
/// arity ratio >= 1.5) favour the naive decomposition; otherwise the mean
/// domain size picks gac_a (< 4.5), gac_b (< 7.5) or gac_c.
std::size_t planted_best(const Instance& inst, const SolverSet& solvers);

/// Deterministic in `spec`: equal specs give byte-identical output.
SynthData synth_generate(const SynthSpec& spec);

/// `instance,rule_best,best,high_cost,default_gap_seconds`
std::string write_planted_csv(const SynthData& data);

} // namespace cspsel

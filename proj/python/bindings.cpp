// Python surface of the selector. Text in, text out, matching the CLI's file
// formats so the two can be mixed.

#include "cspsel/evaluation.hpp"
#include "cspsel/features.hpp"
#include "cspsel/instance.hpp"
#include "cspsel/learners.hpp"
#include "cspsel/perf_data.hpp"
#include "cspsel/pipeline.hpp"
#include "cspsel/synth.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace cspsel;

namespace {

std::vector<std::string> names_of(FeatureSet set) {
    std::vector<std::string> out;
    for (auto n : feature_names(set)) out.emplace_back(n);
    return out;
}

void check_schema(const Ensemble& e, const std::vector<FeatureVector>& fvs) {
    if (!fvs.empty() && names_of(fvs.front().set) != e.feature_names) {
        throw Error("schema mismatch: the features do not use the ensemble's " +
                    std::to_string(e.feature_names.size()) + "-attribute schema");
    }
}

std::string extract_csv(const std::map<std::string, std::string>& instances, const std::string& feature_set,
                        std::uint64_t seed, std::size_t samples) {
    const FeatureSet set = parse_feature_set(feature_set);
    std::vector<FeatureVector> fvs;
    {
        py::gil_scoped_release release;
        for (const auto& [name, text] : instances) {
            Instance inst = parse_instance(text);
            if (inst.name.empty()) inst.name = name;
            fvs.push_back(extract(inst, set, seed, samples));
        }
    }
    return write_features_csv(fvs);
}

py::dict extract_one(const std::string& text, const std::string& feature_set, std::uint64_t seed,
                     std::size_t samples) {
    const FeatureVector fv = extract(parse_instance(text), parse_feature_set(feature_set), seed, samples);
    py::dict d;
    d["instance"] = fv.instance;
    d["names"] = names_of(fv.set);
    d["values"] = fv.values;
    d["extract_seconds"] = fv.extract_seconds;
    d["diagnostics"] = fv.diagnostics;
    return d;
}

std::string label_csv(const std::string& runtimes, const std::string& solvers_text) {
    const SolverSet solvers = parse_solvers_file(solvers_text);
    return write_labels_csv(label_all(parse_runtime_csv(runtimes, solvers)), solvers);
}

std::string train_text(const std::string& features, const std::string& labels, const std::string& solvers_text,
                       std::size_t folds, const std::string& learners, std::uint64_t seed, bool cost_model,
                       bool strict_folds) {
    const SolverSet solvers = parse_solvers_file(solvers_text);
    const auto fvs = parse_features_csv(features);
    if (fvs.empty()) throw Error("no feature rows to train on");
    const auto rows = join_rows(fvs, parse_labels_csv(labels, solvers));
    MetaOptions opt;
    opt.folds = folds;
    opt.cost_model = cost_model;
    opt.strict_folds = strict_folds;
    opt.seed = seed;
    const auto bank = parse_learner_bank(learners);
    py::gil_scoped_release release;
    return save_ensemble(train_meta(rows, names_of(fvs.front().set), solvers, bank, opt));
}

std::vector<py::tuple> predict_rows(const std::string& ensemble, const std::string& features) {
    const Ensemble e = load_ensemble(ensemble);
    const auto fvs = parse_features_csv(features);
    check_schema(e, fvs);
    std::vector<py::tuple> out;
    for (const auto& fv : fvs) {
        const auto votes = meta_votes(e, fv.values);
        const std::size_t pick = plurality(votes, e.tie_order());
        out.push_back(py::make_tuple(fv.instance, e.solvers.names[pick], votes[pick]));
    }
    return out;
}

std::vector<py::dict> evaluate_all(const std::string& features, const std::string& runtimes,
                                   const std::string& solvers_text, const std::optional<std::string>& ensemble,
                                   std::uint64_t seed) {
    const SolverSet solvers = parse_solvers_file(solvers_text);
    const RuntimeMatrix m = parse_runtime_csv(runtimes, solvers);
    const auto fvs = parse_features_csv(features);
    std::vector<EvaluationReport> reports;
    for (auto kind : {BaselineKind::oracle, BaselineKind::anti_oracle, BaselineKind::default_decision,
                      BaselineKind::random_decision}) {
        reports.push_back(evaluate(std::string(to_string(kind)), baseline(kind, m, seed), fvs, m));
    }
    if (ensemble) {
        const Ensemble e = load_ensemble(*ensemble);
        check_schema(e, fvs);
        if (e.solvers != solvers) throw Error("schema mismatch: the ensemble was trained for a different solver set");
        reports.push_back(evaluate("meta", ensemble_chooser(e), fvs, m));
    }
    std::vector<py::dict> out;
    for (const auto& r : reports) {
        py::dict d;
        d["classifier"] = r.classifier;
        d["feature_set"] = r.feature_set;
        d["total_penalty_seconds"] = r.total_penalty_seconds;
        d["instances"] = r.outcomes.size();
        d["dont_know"] = r.dont_know;
        d["overhead_seconds"] = r.overhead_seconds();
        out.push_back(std::move(d));
    }
    return out;
}

py::dict synth_data(std::size_t count, std::uint64_t seed, double margin, double noise, double high_cost_fraction,
                    double rescue_fraction, const std::string& prefix) {
    SynthSpec spec;
    spec.count = count;
    spec.seed = seed;
    spec.margin_seconds = margin;
    spec.noise = noise;
    spec.high_cost_fraction = high_cost_fraction;
    spec.rescue_fraction = rescue_fraction;
    spec.prefix = prefix;
    const SynthData data = synth_generate(spec);
    std::map<std::string, std::string> instances;
    for (const auto& si : data.instances) instances[si.instance.name] = render_instance(si.instance);
    py::dict d;
    d["instances"] = instances;
    d["runtimes"] = write_runtime_csv(data.runtimes);
    d["solvers"] = write_solvers_file(data.solvers);
    d["planted"] = write_planted_csv(data);
    return d;
}

} // namespace

PYBIND11_MODULE(_cspsel, m) {
    m.doc() = "Per-instance choice of an alldifferent implementation";
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    m.def("feature_names", [](const std::string& set) { return names_of(parse_feature_set(set)); },
          py::arg("feature_set") = "full");
    m.def("extract", &extract_csv, "Features CSV for a {name: instance text} mapping", py::arg("instances"),
          py::arg("feature_set") = "full", py::arg("seed") = 1, py::arg("samples") = kDefaultTightnessSamples);
    m.def("extract_one", &extract_one, "Feature vector of one instance text", py::arg("text"),
          py::arg("feature_set") = "full", py::arg("seed") = 1, py::arg("samples") = kDefaultTightnessSamples);
    m.def("label", &label_csv, "Labels CSV from runtime CSV and solvers file text", py::arg("runtimes"),
          py::arg("solvers"));
    m.def("duplication_copies", &duplication_copies, py::arg("cost_seconds"));
    m.def("train", &train_text, "Saved ensemble text", py::arg("features"), py::arg("labels"), py::arg("solvers"),
          py::arg("folds") = 3, py::arg("learners") = "zeror,oner,nbayes,knn,tree", py::arg("seed") = 1,
          py::arg("cost_model") = true, py::arg("strict_folds") = false);
    m.def("predict", &predict_rows, "(instance, solver, votes) per feature row", py::arg("ensemble"),
          py::arg("features"));
    m.def("evaluate", &evaluate_all, "Baseline and meta penalty summaries", py::arg("features"), py::arg("runtimes"),
          py::arg("solvers"), py::arg("ensemble") = std::nullopt, py::arg("seed") = 0);
    m.def("synth", &synth_data, "Planted-rule benchmark", py::arg("count") = 50, py::arg("seed") = 1,
          py::arg("margin") = 10.0, py::arg("noise") = 0.0, py::arg("high_cost_fraction") = 0.0,
          py::arg("rescue_fraction") = 0.0, py::arg("prefix") = "inst");
}

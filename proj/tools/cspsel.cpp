// cspsel: pick an alldifferent implementation per constraint problem.

#include "cspsel/evaluation.hpp"
#include "cspsel/features.hpp"
#include "cspsel/instance.hpp"
#include "cspsel/perf_data.hpp"
#include "cspsel/pipeline.hpp"
#include "cspsel/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cspsel;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
        throw Error("cannot write file '" + path.string() + "'");
    }
}

// Prefixes parse errors with the file they came from.
template <typename F>
auto with_file(const fs::path& path, F&& parse) {
    try {
        return parse(read_file(path));
    } catch (const ParseError& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::vector<FeatureVector> load_features(const fs::path& path) {
    return with_file(path, [](const std::string& text) { return parse_features_csv(text); });
}

SolverSet load_solvers(const fs::path& path) {
    return with_file(path, [](const std::string& text) { return parse_solvers_file(text); });
}

RuntimeMatrix load_runtimes(const fs::path& path, const SolverSet& solvers) {
    return with_file(path, [&](const std::string& text) { return parse_runtime_csv(text, solvers); });
}

std::vector<std::string> schema_of(const std::vector<FeatureVector>& fvs) {
    const FeatureSet set = fvs.empty() ? FeatureSet::full : fvs.front().set;
    std::vector<std::string> names;
    for (auto n : feature_names(set)) names.emplace_back(n);
    return names;
}

void check_schema(const Ensemble& e, const std::vector<FeatureVector>& fvs) {
    if (!fvs.empty() && schema_of(fvs) != e.feature_names) {
        throw Error("schema mismatch: the features file does not use the ensemble's " +
                    std::to_string(e.feature_names.size()) + "-attribute schema");
    }
}

struct ExtractArgs {
    std::string instances;
    std::string out;
    std::string feature_set = "full";
    std::uint64_t seed = 1;
    std::size_t samples = kDefaultTightnessSamples;
};

int run_extract(const ExtractArgs& a) {
    const FeatureSet set = parse_feature_set(a.feature_set);
    if (!fs::is_directory(a.instances)) {
        throw Error("instance directory '" + a.instances + "' does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.instances)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<FeatureVector> out;
    std::vector<std::string> seen;
    for (const auto& f : files) {
        Instance inst = with_file(f, [](const std::string& text) { return parse_instance(text); });
        if (inst.name.empty()) inst.name = f.stem().string();
        if (std::find(seen.begin(), seen.end(), inst.name) != seen.end()) {
            throw Error("duplicate instance name '" + inst.name + "' in " + f.string());
        }
        seen.push_back(inst.name);
        out.push_back(extract(inst, set, a.seed, a.samples));
    }
    write_file(a.out, write_features_csv(out));
    std::cerr << "extracted " << out.size() << " " << to_string(set) << " feature vectors\n";
    return 0;
}

struct LabelArgs {
    std::string runtimes;
    std::string solvers;
    std::string out;
};

int run_label(const LabelArgs& a) {
    const SolverSet solvers = load_solvers(a.solvers);
    const RuntimeMatrix m = load_runtimes(a.runtimes, solvers);
    const auto labels = label_all(m);
    write_file(a.out, write_labels_csv(labels, solvers));
    const auto dk = std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.label.dont_know(); });
    std::cerr << "labeled " << labels.size() << " instances (" << dk << " dont_know)\n";
    return 0;
}

struct TrainArgs {
    std::string features;
    std::string labels;
    std::string solvers;
    std::string out;
    std::size_t folds = 3;
    std::string learners = "zeror,oner,nbayes,knn,tree";
    std::uint64_t seed = 1;
    bool strict_folds = false;
    bool no_cost_model = false;
};

int run_train(const TrainArgs& a) {
    const SolverSet solvers = load_solvers(a.solvers);
    const auto fvs = load_features(a.features);
    const auto labels = with_file(a.labels, [&](const std::string& t) { return parse_labels_csv(t, solvers); });
    const auto rows = join_rows(fvs, labels);
    MetaOptions opt;
    opt.folds = a.folds;
    opt.cost_model = !a.no_cost_model;
    opt.strict_folds = a.strict_folds;
    opt.seed = a.seed;
    const auto bank = parse_learner_bank(a.learners);
    const Ensemble e = train_meta(rows, schema_of(fvs), solvers, bank, opt);
    write_file(a.out, save_ensemble(e));
    std::cerr << "trained " << e.members.size() << " members (" << bank.size() << " learners x " << e.folds
              << " folds)\n";
    return 0;
}

struct PredictArgs {
    std::string ensemble;
    std::string features;
    std::string out;
};

int run_predict(const PredictArgs& a) {
    const Ensemble e = load_ensemble(read_file(a.ensemble));
    const auto fvs = load_features(a.features);
    check_schema(e, fvs);
    std::ostringstream out;
    out << "instance,solver,votes\n";
    for (const auto& fv : fvs) {
        const auto votes = meta_votes(e, fv.values);
        const std::size_t pick = plurality(votes, e.tie_order());
        out << fv.instance << ',' << e.solvers.names[pick] << ',' << votes[pick] << '\n';
    }
    write_file(a.out, out.str());
    return 0;
}

struct EvaluateArgs {
    std::string features;
    std::string runtimes;
    std::string solvers;
    std::string ensemble;
    std::string out;
    std::string outcomes;
    std::uint64_t seed = 1;
    bool members = false;
};

int run_evaluate(const EvaluateArgs& a) {
    const SolverSet solvers = load_solvers(a.solvers);
    const RuntimeMatrix m = load_runtimes(a.runtimes, solvers);
    const auto fvs = load_features(a.features);

    std::vector<EvaluationReport> reports;
    for (auto kind : {BaselineKind::oracle, BaselineKind::anti_oracle, BaselineKind::default_decision,
                      BaselineKind::random_decision}) {
        reports.push_back(evaluate(std::string(to_string(kind)), baseline(kind, m, a.seed), fvs, m));
    }
    std::optional<Ensemble> e;
    if (!a.ensemble.empty()) {
        e = load_ensemble(read_file(a.ensemble));
        check_schema(*e, fvs);
        if (e->solvers != solvers) {
            throw Error("schema mismatch: the ensemble was trained for a different solver set");
        }
        if (a.members) {
            for (std::size_t i = 0; i < e->members.size(); ++i) {
                const auto& mem = e->members[i];
                const std::string name =
                    std::string(to_string(e->bank[mem.learner].kind)) + "#fold" + std::to_string(mem.fold);
                reports.push_back(evaluate(name, member_chooser(*e, i), fvs, m));
            }
        }
        reports.push_back(evaluate("meta", ensemble_chooser(*e), fvs, m));
    }
    write_file(a.out, write_summary_csv(reports));
    if (!a.outcomes.empty()) {
        write_file(a.outcomes, write_outcomes_csv(reports.back(), solvers));
    }

    PenaltyTable table;
    for (const auto& r : reports) table.add(r.classifier, "penalty_s", r.total_penalty_seconds);
    for (const auto& r : reports) table.add(r.classifier, "overhead_s", r.overhead_seconds());
    std::cout << table.to_text();
    std::cout << reports.front().dont_know << " dont_know instances excluded\n";
    return 0;
}

struct SynthArgs {
    std::size_t count = 50;
    std::uint64_t seed = 1;
    std::string out;
    double margin = 10;
    double noise = 0;
    double high_cost_fraction = 0;
    double rescue_fraction = 0;
    std::string prefix = "inst";
};

int run_synth(const SynthArgs& a) {
    SynthSpec spec;
    spec.count = a.count;
    spec.seed = a.seed;
    spec.margin_seconds = a.margin;
    spec.noise = a.noise;
    spec.high_cost_fraction = a.high_cost_fraction;
    spec.rescue_fraction = a.rescue_fraction;
    spec.prefix = a.prefix;
    const SynthData data = synth_generate(spec);
    const fs::path root(a.out);
    for (const auto& si : data.instances) {
        write_file(root / "instances" / (si.instance.name + ".csp"), render_instance(si.instance));
    }
    write_file(root / "runtimes.csv", write_runtime_csv(data.runtimes));
    write_file(root / "solvers.txt", write_solvers_file(data.solvers));
    write_file(root / "planted.csv", write_planted_csv(data));
    std::cerr << "generated " << data.instances.size() << " instances in " << root.string() << '\n';
    return 0;
}

struct ReportArgs {
    std::vector<std::string> inputs; // condition=path
    std::string out;
};

int run_report(const ReportArgs& a) {
    if (a.inputs.empty()) {
        throw Error("report needs at least one --input condition=summary.csv");
    }
    PenaltyTable table;
    for (const auto& item : a.inputs) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error("--input expects condition=path, got '" + item + "'");
        }
        const std::string condition = item.substr(0, eq);
        const auto entries =
            with_file(item.substr(eq + 1), [](const std::string& t) { return parse_summary_csv(t); });
        for (const auto& en : entries) table.add(en.classifier, condition, en.total_penalty_seconds);
    }
    const std::string csv = table.to_csv();
    if (!a.out.empty()) write_file(a.out, csv);
    std::cout << table.to_text();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cspsel: choose an alldifferent implementation per constraint problem instance"};
    app.require_subcommand(1);

    ExtractArgs ex;
    auto* extract_cmd = app.add_subcommand("extract", "Compute instance attributes for every file in a directory");
    extract_cmd->add_option("--instances", ex.instances, "Directory of instance files")->required();
    extract_cmd->add_option("--out", ex.out, "Features CSV to write")->required();
    extract_cmd->add_option("--feature-set", ex.feature_set, "full or cheap")
        ->check(CLI::IsMember({"full", "cheap"}));
    extract_cmd->add_option("--seed", ex.seed, "Seed for tightness sampling");
    extract_cmd->add_option("--samples", ex.samples, "Tuples sampled per constraint")->check(CLI::PositiveNumber);

    LabelArgs la;
    auto* label_cmd = app.add_subcommand("label", "Label instances with their best implementation and cost");
    label_cmd->add_option("--runtimes", la.runtimes, "Runtime CSV")->required();
    label_cmd->add_option("--solvers", la.solvers, "Solvers file")->required();
    label_cmd->add_option("--out", la.out, "Labels CSV to write")->required();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train the cross-validated majority-vote ensemble");
    train_cmd->add_option("--features", tr.features, "Features CSV")->required();
    train_cmd->add_option("--labels", tr.labels, "Labels CSV")->required();
    train_cmd->add_option("--solvers", tr.solvers, "Solvers file")->required();
    train_cmd->add_option("--out", tr.out, "Ensemble file to write")->required();
    train_cmd->add_option("--folds", tr.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    train_cmd->add_option("--learners", tr.learners, "Comma list from zeror,oner,nbayes,knn,tree");
    train_cmd->add_option("--seed", tr.seed, "Seed for fold assignment");
    train_cmd->add_flag("--strict-folds", tr.strict_folds, "Keep duplicated copies of an instance in one fold");
    train_cmd->add_flag("--no-cost-model", tr.no_cost_model, "Train on each instance once, ignoring costs");

    PredictArgs pr;
    auto* predict_cmd = app.add_subcommand("predict", "Pick a solver for each feature vector");
    predict_cmd->add_option("--ensemble", pr.ensemble, "Ensemble file")->required();
    predict_cmd->add_option("--features", pr.features, "Features CSV")->required();
    predict_cmd->add_option("--out", pr.out, "Predictions CSV to write")->required();

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Misclassification penalty of baselines and an ensemble");
    evaluate_cmd->add_option("--features", ev.features, "Features CSV")->required();
    evaluate_cmd->add_option("--runtimes", ev.runtimes, "Runtime CSV")->required();
    evaluate_cmd->add_option("--solvers", ev.solvers, "Solvers file")->required();
    evaluate_cmd->add_option("--ensemble", ev.ensemble, "Ensemble file (optional)");
    evaluate_cmd->add_option("--out", ev.out, "Summary CSV to write")->required();
    evaluate_cmd->add_option("--outcomes", ev.outcomes, "Per-instance CSV of the last classifier");
    evaluate_cmd->add_option("--seed", ev.seed, "Seed for the random baseline");
    evaluate_cmd->add_flag("--members", ev.members, "Also evaluate every ensemble member on its own");

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", "Generate instances and runtimes with a planted best solver");
    synth_cmd->add_option("--count", sy.count, "Number of instances")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", sy.seed, "Generator seed");
    synth_cmd->add_option("--out", sy.out, "Output directory")->required();
    synth_cmd->add_option("--margin", sy.margin, "Default solver's gap behind the best, seconds");
    synth_cmd->add_option("--noise", sy.noise, "Probability of a random best solver")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--high-cost-fraction", sy.high_cost_fraction, "Probability that non-best solvers time out")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--rescue-fraction", sy.rescue_fraction,
                          "Probability that a gac_b instance is a hard case only gac_d solves")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--prefix", sy.prefix, "Instance name prefix");

    ReportArgs re;
    auto* report_cmd = app.add_subcommand("report", "Combine evaluation summaries into a classifier x condition table");
    report_cmd->add_option("--input", re.inputs, "condition=summary.csv (repeatable)")->required();
    report_cmd->add_option("--out", re.out, "Table CSV to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*extract_cmd) return run_extract(ex);
        if (*label_cmd) return run_label(la);
        if (*train_cmd) return run_train(tr);
        if (*predict_cmd) return run_predict(pr);
        if (*evaluate_cmd) return run_evaluate(ev);
        if (*synth_cmd) return run_synth(sy);
        if (*report_cmd) return run_report(re);
    } catch (const std::exception& e) {
        std::cerr << "cspsel: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

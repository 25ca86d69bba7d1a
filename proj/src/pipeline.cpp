#include "cspsel/pipeline.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>

namespace cspsel {

using nlohmann::json;

std::vector<LabeledRow> join_rows(std::span<const FeatureVector> features, std::span<const LabeledInstance> labels) {
    std::unordered_map<std::string, const FeatureVector*> by_name;
    for (const auto& f : features) {
        if (!by_name.emplace(f.instance, &f).second) {
            throw Error("duplicate features for instance '" + f.instance + "'");
        }
    }
    std::vector<LabeledRow> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = by_name.find(l.instance);
        if (it == by_name.end()) {
            throw Error("no features for instance '" + l.instance + "'");
        }
        out.push_back({l.instance, it->second->values, l.label});
    }
    if (features.size() != out.size()) {
        throw Error("features and labels cover different instance sets");
    }
    return out;
}

std::size_t duplication_copies(double cost_seconds) {
    if (!(cost_seconds >= 0)) {
        throw Error("negative cost");
    }
    const double c = std::max(cost_seconds, 1.0);
    return std::max<std::size_t>(1, 1 + static_cast<std::size_t>(std::ceil(std::log2(c))));
}

std::vector<std::size_t> duplicate_by_cost(std::span<const LabeledRow> rows) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t copies = duplication_copies(rows[i].label.cost_seconds);
        if (rows[i].label.dont_know()) continue;
        out.insert(out.end(), copies, i);
    }
    return out;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

// Deals `units` (grouped by class, classes in ascending order) round-robin.
std::vector<std::size_t> deal(std::map<std::size_t, std::vector<std::size_t>>& by_class, std::size_t units,
                              std::size_t k, Rng& rng) {
    std::vector<std::size_t> fold_of(units, 0);
    std::size_t next = 0;
    for (auto& [cls, members] : by_class) {
        shuffle(members, rng);
        for (std::size_t u : members) {
            fold_of[u] = next;
            next = (next + 1) % k;
        }
    }
    return fold_of;
}

} // namespace

std::vector<std::size_t> stratified_kfold(std::span<const std::size_t> classes, std::size_t k, Rng& rng) {
    if (k < 2) {
        throw Error("cross-validation needs k >= 2");
    }
    if (k > classes.size()) {
        throw Error("cannot split " + std::to_string(classes.size()) + " rows into " + std::to_string(k) + " folds");
    }
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < classes.size(); ++i) by_class[classes[i]].push_back(i);
    return deal(by_class, classes.size(), k, rng);
}

std::vector<std::size_t> stratified_group_kfold(std::span<const std::size_t> classes,
                                                std::span<const std::size_t> groups, std::size_t k, Rng& rng) {
    if (classes.size() != groups.size()) {
        throw Error("stratified_group_kfold: classes and groups differ in length");
    }
    if (k < 2) {
        throw Error("cross-validation needs k >= 2");
    }
    std::map<std::size_t, std::size_t> group_index;
    std::vector<std::size_t> group_class;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (group_index.emplace(groups[i], group_class.size()).second) {
            group_class.push_back(classes[i]);
        }
    }
    if (k > group_class.size()) {
        throw Error("cannot split " + std::to_string(group_class.size()) + " groups into " + std::to_string(k) +
                    " folds");
    }
    // Groups are numbered in order of first appearance, so the deal does not
    // depend on the numeric values of the group ids.
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t g = 0; g < group_class.size(); ++g) by_class[group_class[g]].push_back(g);
    const auto group_fold = deal(by_class, group_class.size(), k, rng);
    std::vector<std::size_t> out(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) out[i] = group_fold[group_index.at(groups[i])];
    return out;
}

namespace {

std::size_t default_variant(const SolverSet& solvers, const std::vector<std::size_t>& variants) {
    for (std::size_t c = 0; c < variants.size(); ++c) {
        if (variants[c] == solvers.default_solver) return c;
    }
    return 0;
}

} // namespace

HierarchicalModel train_hierarchical(std::span<const std::vector<double>> features,
                                     std::span<const std::size_t> solver_labels, const LearnerSpec& learner,
                                     const SolverSet& solvers) {
    if (features.empty()) {
        throw Error("train_hierarchical: no rows");
    }
    if (features.size() != solver_labels.size()) {
        throw Error("train_hierarchical: feature and label counts differ");
    }
    HierarchicalModel h;
    h.naive = solvers.naive;
    std::vector<std::size_t> variant_class(solvers.size(), 0);
    for (std::size_t s = 0; s < solvers.size(); ++s) {
        if (s == solvers.naive) continue;
        variant_class[s] = h.variants.size();
        h.variants.push_back(s);
    }
    const std::size_t arity = features.front().size();

    TrainingSet level1;
    level1.num_classes = 2;
    TrainingSet level2;
    level2.num_classes = h.variants.size();
    std::size_t naive_rows = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::size_t s = solver_labels[i];
        if (s >= solvers.size()) {
            throw Error("train_hierarchical: solver label out of range");
        }
        const bool is_naive = s == solvers.naive;
        naive_rows += is_naive ? 1 : 0;
        level1.rows.push_back(features[i]);
        level1.labels.push_back(is_naive ? kLevel1Naive : kLevel1Propagating);
        if (!is_naive) {
            level2.rows.push_back(features[i]);
            level2.labels.push_back(variant_class[s]);
        }
    }

    if (naive_rows == 0) {
        h.level1 = Model::constant(kLevel1Propagating, arity, 2);
    } else if (naive_rows == features.size()) {
        h.level1 = Model::constant(kLevel1Naive, arity, 2);
    } else {
        h.level1 = train(learner, level1);
    }
    if (level2.rows.empty()) {
        h.level2 = Model::constant(default_variant(solvers, h.variants), arity, h.variants.size());
    } else {
        h.level2 = train(learner, level2);
    }
    return h;
}

std::size_t predict_hierarchical(const HierarchicalModel& model, std::span<const double> features) {
    if (predict(model.level1, features) == kLevel1Naive) {
        return model.naive;
    }
    return model.variants.at(predict(model.level2, features));
}

std::vector<std::size_t> Ensemble::tie_order() const {
    std::vector<std::size_t> order{solvers.default_solver};
    for (std::size_t s = 0; s < solvers.size(); ++s) {
        if (s != solvers.default_solver) order.push_back(s);
    }
    return order;
}

Ensemble train_meta(std::span<const LabeledRow> rows, std::vector<std::string> feature_names,
                    const SolverSet& solvers, std::span<const LearnerSpec> bank, const MetaOptions& options) {
    solvers.validate();
    if (bank.empty()) {
        throw Error("train_meta: empty learner bank");
    }
    std::vector<std::size_t> source;
    if (options.cost_model) {
        source = duplicate_by_cost(rows);
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].label.dont_know()) source.push_back(i);
        }
    }
    if (source.empty()) {
        throw Error("train_meta: no labeled rows to train on");
    }
    for (std::size_t i : source) {
        if (rows[i].features.size() != feature_names.size()) {
            throw Error("train_meta: row '" + rows[i].instance + "' does not match the feature schema");
        }
    }

    std::vector<std::size_t> classes;
    classes.reserve(source.size());
    for (std::size_t i : source) classes.push_back(*rows[i].label.solver);

    Rng rng(options.seed);
    const std::vector<std::size_t> fold_of = options.strict_folds
                                                 ? stratified_group_kfold(classes, source, options.folds, rng)
                                                 : stratified_kfold(classes, options.folds, rng);

    Ensemble e;
    e.solvers = solvers;
    e.feature_names = std::move(feature_names);
    e.folds = options.folds;
    e.bank.assign(bank.begin(), bank.end());

    for (std::size_t fold = 0; fold < options.folds; ++fold) {
        std::vector<std::vector<double>> train_x;
        std::vector<std::size_t> train_y;
        for (std::size_t r = 0; r < source.size(); ++r) {
            if (fold_of[r] == fold) continue;
            train_x.push_back(rows[source[r]].features);
            train_y.push_back(classes[r]);
        }
        for (std::size_t b = 0; b < bank.size(); ++b) {
            e.members.push_back({b, fold, train_hierarchical(train_x, train_y, bank[b], solvers)});
        }
    }
    std::stable_sort(e.members.begin(), e.members.end(), [](const auto& a, const auto& b) {
        return std::pair(a.learner, a.fold) < std::pair(b.learner, b.fold);
    });
    return e;
}

std::size_t plurality(std::span<const std::size_t> votes, std::span<const std::size_t> tie_order) {
    std::size_t best = tie_order.front();
    for (std::size_t s : tie_order) {
        if (votes[s] > votes[best]) best = s;
    }
    return best;
}

std::vector<std::size_t> meta_votes(const Ensemble& ensemble, std::span<const double> features) {
    if (features.size() != ensemble.feature_names.size()) {
        throw Error("predict_meta: expected " + std::to_string(ensemble.feature_names.size()) + " features, got " +
                    std::to_string(features.size()));
    }
    std::vector<std::size_t> votes(ensemble.solvers.size(), 0);
    for (const auto& m : ensemble.members) {
        ++votes[predict_hierarchical(m.model, features)];
    }
    return votes;
}

std::size_t predict_meta(const Ensemble& ensemble, std::span<const double> features) {
    const auto votes = meta_votes(ensemble, features);
    return plurality(votes, ensemble.tie_order());
}

namespace {

json spec_to_json(const LearnerSpec& s) {
    return {{"kind", to_string(s.kind)},    {"min_bucket", s.min_bucket}, {"var_floor", s.var_floor},
            {"k", s.k},                     {"max_depth", s.max_depth},   {"min_leaf", s.min_leaf}};
}

LearnerSpec spec_from_json(const json& j) {
    LearnerSpec s;
    s.kind = parse_learner_kind(j.at("kind").get<std::string>());
    s.min_bucket = j.at("min_bucket").get<std::size_t>();
    s.var_floor = j.at("var_floor").get<double>();
    s.k = j.at("k").get<std::size_t>();
    s.max_depth = j.at("max_depth").get<std::size_t>();
    s.min_leaf = j.at("min_leaf").get<std::size_t>();
    return s;
}

json model_to_json(const Model& m) {
    json j{{"kind", to_string(m.kind)}, {"arity", m.arity}, {"classes", m.num_classes}};
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroRParams>) {
                j["majority"] = p.majority;
            } else if constexpr (std::is_same_v<P, OneRParams>) {
                j["feature"] = p.feature;
                j["thresholds"] = p.thresholds;
                j["bucket_class"] = p.bucket_class;
            } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                j["log_prior"] = p.log_prior;
                j["present"] = p.present;
                j["mean"] = p.mean;
                j["variance"] = p.variance;
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                j["k"] = p.k;
                j["centre"] = p.centre;
                j["scale"] = p.scale;
                j["rows"] = p.rows;
                j["labels"] = p.labels;
            } else {
                json nodes = json::array();
                for (const auto& n : p.nodes) {
                    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_class});
                }
                j["nodes"] = std::move(nodes);
            }
        },
        m.params);
    return j;
}

Model model_from_json(const json& j) {
    Model m;
    m.kind = parse_learner_kind(j.at("kind").get<std::string>());
    m.arity = j.at("arity").get<std::size_t>();
    m.num_classes = j.at("classes").get<std::size_t>();
    auto check_class = [&](std::size_t c) {
        if (c >= m.num_classes) throw CorruptionError("model class id out of range");
    };
    switch (m.kind) {
    case LearnerKind::zero_r: {
        ZeroRParams p{j.at("majority").get<std::size_t>()};
        check_class(p.majority);
        m.params = p;
        break;
    }
    case LearnerKind::one_r: {
        OneRParams p;
        p.feature = j.at("feature").get<std::size_t>();
        p.thresholds = j.at("thresholds").get<std::vector<double>>();
        p.bucket_class = j.at("bucket_class").get<std::vector<std::size_t>>();
        if (p.bucket_class.size() != p.thresholds.size() + 1 || (m.arity && p.feature >= m.arity)) {
            throw CorruptionError("inconsistent one-rule model");
        }
        for (auto c : p.bucket_class) check_class(c);
        m.params = std::move(p);
        break;
    }
    case LearnerKind::naive_bayes: {
        NaiveBayesParams p;
        p.log_prior = j.at("log_prior").get<std::vector<double>>();
        p.present = j.at("present").get<std::vector<bool>>();
        p.mean = j.at("mean").get<std::vector<std::vector<double>>>();
        p.variance = j.at("variance").get<std::vector<std::vector<double>>>();
        if (p.log_prior.size() != m.num_classes || p.present.size() != m.num_classes ||
            p.mean.size() != m.num_classes || p.variance.size() != m.num_classes) {
            throw CorruptionError("inconsistent naive Bayes model");
        }
        for (std::size_t c = 0; c < m.num_classes; ++c) {
            if (p.mean[c].size() != m.arity || p.variance[c].size() != m.arity) {
                throw CorruptionError("inconsistent naive Bayes model");
            }
        }
        m.params = std::move(p);
        break;
    }
    case LearnerKind::knn: {
        KnnParams p;
        p.k = j.at("k").get<std::size_t>();
        p.centre = j.at("centre").get<std::vector<double>>();
        p.scale = j.at("scale").get<std::vector<double>>();
        p.rows = j.at("rows").get<std::vector<std::vector<double>>>();
        p.labels = j.at("labels").get<std::vector<std::size_t>>();
        if (p.k == 0 || p.rows.empty() || p.rows.size() != p.labels.size() || p.centre.size() != m.arity ||
            p.scale.size() != m.arity) {
            throw CorruptionError("inconsistent nearest-neighbour model");
        }
        for (const auto& r : p.rows) {
            if (r.size() != m.arity) throw CorruptionError("inconsistent nearest-neighbour model");
        }
        for (auto c : p.labels) check_class(c);
        m.params = std::move(p);
        break;
    }
    case LearnerKind::tree: {
        TreeParams p;
        for (const auto& n : j.at("nodes")) {
            TreeNode t;
            t.feature = n.at(0).get<std::size_t>();
            t.threshold = n.at(1).get<double>();
            t.left = n.at(2).get<std::size_t>();
            t.right = n.at(3).get<std::size_t>();
            t.leaf_class = n.at(4).get<std::size_t>();
            p.nodes.push_back(t);
        }
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
            const auto& t = p.nodes[i];
            check_class(t.leaf_class);
            // Children always come after their parent, which also rules out cycles.
            if (!t.is_leaf() && (t.left <= i || t.right <= i || t.left >= p.nodes.size() ||
                                 t.right >= p.nodes.size() || t.feature >= m.arity)) {
                throw CorruptionError("inconsistent decision tree");
            }
        }
        if (p.nodes.empty()) throw CorruptionError("empty decision tree");
        m.params = std::move(p);
        break;
    }
    }
    return m;
}

std::string checksum_hex(std::string_view body) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
    return buf;
}

} // namespace

std::string save_ensemble(const Ensemble& e) {
    json j;
    j["solvers"] = {{"names", e.solvers.names},
                    {"naive", e.solvers.naive},
                    {"default", e.solvers.default_solver},
                    {"timeout", e.solvers.timeout_seconds}};
    j["features"] = {{"count", e.feature_names.size()}, {"names", e.feature_names}};
    j["folds"] = e.folds;
    json bank = json::array();
    for (const auto& s : e.bank) bank.push_back(spec_to_json(s));
    j["learners"] = std::move(bank);
    json members = json::array();
    for (const auto& m : e.members) {
        members.push_back({{"learner", m.learner},
                           {"fold", m.fold},
                           {"naive", m.model.naive},
                           {"variants", m.model.variants},
                           {"level1", model_to_json(m.model.level1)},
                           {"level2", model_to_json(m.model.level2)}});
    }
    j["members"] = std::move(members);

    std::string body = std::string(kEnsembleMagic) + " " + std::string(kEnsembleVersion) + "\n" + j.dump() + "\n";
    return body + "checksum " + checksum_hex(body) + "\n";
}

Ensemble load_ensemble(std::string_view text) {
    const std::size_t first_nl = text.find('\n');
    const std::string_view first = text.substr(0, first_nl);
    const std::string magic = std::string(kEnsembleMagic) + " ";
    if (first.substr(0, magic.size()) != magic) {
        throw CorruptionError("not an ensemble file (missing '" + std::string(kEnsembleMagic) + "' header)");
    }
    const std::string_view version = first.substr(magic.size());
    if (version != kEnsembleVersion) {
        throw FormatVersionError("unsupported ensemble format version '" + std::string(version) + "' (supported: " +
                                 std::string(kEnsembleVersion) + ")");
    }

    std::string_view trimmed = text;
    if (!trimmed.empty() && trimmed.back() == '\n') trimmed.remove_suffix(1);
    const std::size_t last_nl = trimmed.rfind('\n');
    if (first_nl == std::string_view::npos || last_nl == std::string_view::npos || last_nl <= first_nl) {
        throw CorruptionError("ensemble file is truncated");
    }
    const std::string_view trailer = trimmed.substr(last_nl + 1);
    const std::string_view body = text.substr(0, last_nl + 1);
    if (trailer.substr(0, 9) != "checksum ") {
        throw CorruptionError("ensemble file is truncated (no checksum trailer)");
    }
    if (trailer.substr(9) != checksum_hex(body)) {
        throw CorruptionError("ensemble checksum mismatch");
    }

    Ensemble e;
    try {
        const json j = json::parse(body.substr(first_nl + 1));
        const auto& s = j.at("solvers");
        e.solvers.names = s.at("names").get<std::vector<std::string>>();
        e.solvers.naive = s.at("naive").get<std::size_t>();
        e.solvers.default_solver = s.at("default").get<std::size_t>();
        e.solvers.timeout_seconds = s.at("timeout").get<double>();
        e.solvers.validate();
        e.feature_names = j.at("features").at("names").get<std::vector<std::string>>();
        if (j.at("features").at("count").get<std::size_t>() != e.feature_names.size()) {
            throw CorruptionError("feature count does not match the feature names");
        }
        e.folds = j.at("folds").get<std::size_t>();
        for (const auto& b : j.at("learners")) e.bank.push_back(spec_from_json(b));
        for (const auto& mj : j.at("members")) {
            EnsembleMember m;
            m.learner = mj.at("learner").get<std::size_t>();
            m.fold = mj.at("fold").get<std::size_t>();
            m.model.naive = mj.at("naive").get<std::size_t>();
            m.model.variants = mj.at("variants").get<std::vector<std::size_t>>();
            m.model.level1 = model_from_json(mj.at("level1"));
            m.model.level2 = model_from_json(mj.at("level2"));
            if (m.learner >= e.bank.size() || m.fold >= e.folds || m.model.naive >= e.solvers.size() ||
                m.model.level1.num_classes != 2 || m.model.level2.num_classes != m.model.variants.size() ||
                m.model.level1.arity != e.feature_names.size() || m.model.level2.arity != e.feature_names.size()) {
                throw CorruptionError("inconsistent ensemble member");
            }
            for (auto v : m.model.variants) {
                if (v >= e.solvers.size()) throw CorruptionError("ensemble member names an unknown solver");
            }
            e.members.push_back(std::move(m));
        }
    } catch (const CorruptionError&) {
        throw;
    } catch (const std::exception& ex) {
        throw CorruptionError(std::string("malformed ensemble body: ") + ex.what());
    }
    if (e.members.empty()) {
        throw CorruptionError("ensemble has no members");
    }
    return e;
}

} // namespace cspsel

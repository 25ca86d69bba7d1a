#include "cspsel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cspsel {

void TrainingSet::validate() const {
    if (rows.empty()) {
        throw Error("training set is empty");
    }
    if (labels.size() != rows.size()) {
        throw Error("training set: row and label counts differ");
    }
    const std::size_t a = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != a) throw Error("training set: rows differ in arity");
    }
    for (ClassId c : labels) {
        if (c >= num_classes) throw Error("training set: label outside the class alphabet");
    }
}

std::string_view to_string(LearnerKind kind) noexcept {
    switch (kind) {
    case LearnerKind::zero_r: return "zeror";
    case LearnerKind::one_r: return "oner";
    case LearnerKind::naive_bayes: return "nbayes";
    case LearnerKind::knn: return "knn";
    case LearnerKind::tree: return "tree";
    }
    return "?";
}

LearnerKind parse_learner_kind(std::string_view text) {
    for (auto k : {LearnerKind::zero_r, LearnerKind::one_r, LearnerKind::naive_bayes, LearnerKind::knn,
                   LearnerKind::tree}) {
        if (to_string(k) == text) return k;
    }
    throw Error("unknown learner '" + std::string(text) + "' (want zeror, oner, nbayes, knn or tree)");
}

std::vector<LearnerSpec> parse_learner_bank(std::string_view text) {
    std::vector<LearnerSpec> bank;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = text.substr(start, comma - start);
        if (!item.empty()) {
            LearnerSpec s;
            s.kind = parse_learner_kind(item);
            bank.push_back(s);
        }
        start = comma + 1;
    }
    if (bank.empty()) {
        throw Error("learner bank is empty");
    }
    return bank;
}

std::vector<LearnerSpec> default_learner_bank() {
    return parse_learner_bank("zeror,oner,nbayes,knn,tree");
}

Model Model::constant(ClassId cls, std::size_t arity, std::size_t num_classes) {
    Model m;
    m.kind = LearnerKind::zero_r;
    m.arity = arity;
    m.num_classes = num_classes;
    m.params = ZeroRParams{cls};
    return m;
}

namespace {

ClassId argmax_first(std::span<const std::size_t> counts) {
    ClassId best = 0;
    for (ClassId c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return best;
}

std::vector<std::size_t> class_counts(const TrainingSet& ts) {
    std::vector<std::size_t> counts(ts.num_classes, 0);
    for (ClassId c : ts.labels) ++counts[c];
    return counts;
}

Model shell(LearnerKind kind, const TrainingSet& ts) {
    ts.validate();
    Model m;
    m.kind = kind;
    m.arity = ts.arity();
    m.num_classes = ts.num_classes;
    return m;
}

} // namespace

Model train_zero_r(const TrainingSet& ts) {
    Model m = shell(LearnerKind::zero_r, ts);
    m.params = ZeroRParams{argmax_first(class_counts(ts))};
    return m;
}

Model train_one_r(const TrainingSet& ts, std::size_t min_bucket) {
    Model m = shell(LearnerKind::one_r, ts);
    const std::size_t n = ts.size();
    const std::size_t classes = ts.num_classes;

    struct Bucket {
        double first = 0;
        double last = 0;
        std::vector<std::size_t> counts;
        ClassId majority = 0;
    };

    OneRParams best;
    std::size_t best_correct = 0;
    bool have_best = false;

    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < ts.arity(); ++f) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return ts.rows[a][f] < ts.rows[b][f]; });

        std::vector<Bucket> buckets;
        Bucket cur;
        cur.counts.assign(classes, 0);
        bool open = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ts.rows[order[i]][f];
            if (!open) {
                cur.first = v;
                open = true;
            }
            cur.last = v;
            ++cur.counts[ts.labels[order[i]]];
            const bool value_changes = i + 1 == n || ts.rows[order[i + 1]][f] != v;
            const std::size_t top = *std::max_element(cur.counts.begin(), cur.counts.end());
            // A full bucket still absorbs the next value while every row
            // carrying that value agrees with the bucket's majority.
            bool next_agrees = false;
            if (top >= min_bucket && value_changes && i + 1 < n) {
                const ClassId maj = argmax_first(cur.counts);
                const double next = ts.rows[order[i + 1]][f];
                next_agrees = true;
                for (std::size_t j = i + 1; j < n && ts.rows[order[j]][f] == next; ++j) {
                    next_agrees = next_agrees && ts.labels[order[j]] == maj;
                }
            }
            if (i + 1 == n || (top >= min_bucket && value_changes && !next_agrees)) {
                cur.majority = argmax_first(cur.counts);
                buckets.push_back(cur);
                cur.counts.assign(classes, 0);
                open = false;
            }
        }

        // Adjacent buckets that predict the same class collapse into one.
        std::vector<Bucket> merged;
        for (auto& b : buckets) {
            if (!merged.empty() && merged.back().majority == b.majority) {
                auto& m2 = merged.back();
                m2.last = b.last;
                for (std::size_t c = 0; c < classes; ++c) m2.counts[c] += b.counts[c];
            } else {
                merged.push_back(std::move(b));
            }
        }

        OneRParams rule;
        rule.feature = f;
        std::size_t correct = 0;
        for (std::size_t b = 0; b < merged.size(); ++b) {
            correct += merged[b].counts[merged[b].majority];
            rule.bucket_class.push_back(merged[b].majority);
            if (b + 1 < merged.size()) {
                double t = (merged[b].last + merged[b + 1].first) / 2;
                if (!(t < merged[b + 1].first)) t = merged[b].last;
                rule.thresholds.push_back(t);
            }
        }
        if (!have_best || correct > best_correct) {
            best = std::move(rule);
            best_correct = correct;
            have_best = true;
        }
    }
    if (!have_best) {
        // No features at all: a single bucket holding the majority class.
        best.bucket_class = {argmax_first(class_counts(ts))};
    }
    m.params = std::move(best);
    return m;
}

Model train_naive_bayes(const TrainingSet& ts, double var_floor) {
    Model m = shell(LearnerKind::naive_bayes, ts);
    const std::size_t classes = ts.num_classes;
    const std::size_t a = ts.arity();
    const auto counts = class_counts(ts);

    NaiveBayesParams p;
    p.log_prior.resize(classes);
    p.present.resize(classes);
    p.mean.assign(classes, std::vector<double>(a, 0.0));
    p.variance.assign(classes, std::vector<double>(a, 0.0));
    const double denom = static_cast<double>(ts.size() + classes);
    for (ClassId c = 0; c < classes; ++c) {
        p.log_prior[c] = std::log(static_cast<double>(counts[c] + 1) / denom);
        p.present[c] = counts[c] > 0;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t f = 0; f < a; ++f) p.mean[ts.labels[i]][f] += ts.rows[i][f];
    }
    for (ClassId c = 0; c < classes; ++c) {
        if (!counts[c]) continue;
        for (double& x : p.mean[c]) x /= static_cast<double>(counts[c]);
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const ClassId c = ts.labels[i];
        for (std::size_t f = 0; f < a; ++f) {
            const double d = ts.rows[i][f] - p.mean[c][f];
            p.variance[c][f] += d * d;
        }
    }
    for (ClassId c = 0; c < classes; ++c) {
        for (double& v : p.variance[c]) {
            v = counts[c] ? std::max(v / static_cast<double>(counts[c]), var_floor) : 1.0;
        }
    }
    m.params = std::move(p);
    return m;
}

Model train_knn(const TrainingSet& ts, std::size_t k) {
    if (k == 0) {
        throw Error("knn needs k >= 1");
    }
    Model m = shell(LearnerKind::knn, ts);
    const std::size_t a = ts.arity();
    const double n = static_cast<double>(ts.size());
    KnnParams p;
    p.k = k;
    p.centre.assign(a, 0.0);
    p.scale.assign(a, 0.0);
    for (const auto& r : ts.rows) {
        for (std::size_t f = 0; f < a; ++f) p.centre[f] += r[f];
    }
    for (double& c : p.centre) c /= n;
    for (const auto& r : ts.rows) {
        for (std::size_t f = 0; f < a; ++f) p.scale[f] += (r[f] - p.centre[f]) * (r[f] - p.centre[f]);
    }
    for (double& s : p.scale) s = std::sqrt(s / n);
    p.rows.reserve(ts.size());
    for (const auto& r : ts.rows) {
        std::vector<double> z(a);
        for (std::size_t f = 0; f < a; ++f) z[f] = p.scale[f] > 0 ? (r[f] - p.centre[f]) / p.scale[f] : 0.0;
        p.rows.push_back(std::move(z));
    }
    p.labels = ts.labels;
    m.params = std::move(p);
    return m;
}

namespace {

double entropy(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct TreeBuilder {
    const TrainingSet& ts;
    std::size_t max_depth;
    std::size_t min_leaf;
    std::vector<TreeNode> nodes;

    static constexpr double kMinGain = 1e-12;

    std::size_t build(std::vector<std::size_t> idx, std::size_t depth) {
        const std::size_t me = nodes.size();
        nodes.emplace_back();
        std::vector<std::size_t> counts(ts.num_classes, 0);
        for (std::size_t i : idx) ++counts[ts.labels[i]];
        nodes[me].leaf_class = argmax_first(counts);

        const std::size_t n = idx.size();
        const bool pure = *std::max_element(counts.begin(), counts.end()) == n;
        if (pure || depth >= max_depth || n < 2 * min_leaf) {
            return me;
        }

        const double parent_h = entropy(counts, n);
        double best_gain = kMinGain;
        bool found = false;
        std::size_t best_feature = 0;
        double best_threshold = 0;

        std::vector<std::size_t> sorted = idx;
        std::vector<std::size_t> left(ts.num_classes);
        std::vector<std::size_t> right(ts.num_classes);
        for (std::size_t f = 0; f < ts.arity(); ++f) {
            std::stable_sort(sorted.begin(), sorted.end(),
                             [&](std::size_t a, std::size_t b) { return ts.rows[a][f] < ts.rows[b][f]; });
            std::fill(left.begin(), left.end(), 0);
            right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const ClassId c = ts.labels[sorted[i]];
                ++left[c];
                --right[c];
                const double v = ts.rows[sorted[i]][f];
                const double next = ts.rows[sorted[i + 1]][f];
                if (!(v < next)) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double h = (static_cast<double>(nl) * entropy(left, nl) +
                                  static_cast<double>(nr) * entropy(right, nr)) /
                                 static_cast<double>(n);
                const double gain = parent_h - h;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    double t = (v + next) / 2;
                    if (!(t < next)) t = v;
                    best_threshold = t;
                    found = true;
                }
            }
        }
        if (!found) {
            return me;
        }

        std::vector<std::size_t> lo;
        std::vector<std::size_t> hi;
        for (std::size_t i : idx) {
            (ts.rows[i][best_feature] <= best_threshold ? lo : hi).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const std::size_t l = build(std::move(lo), depth + 1);
        const std::size_t r = build(std::move(hi), depth + 1);
        nodes[me].feature = best_feature;
        nodes[me].threshold = best_threshold;
        nodes[me].left = l;
        nodes[me].right = r;
        return me;
    }
};

} // namespace

Model train_decision_tree(const TrainingSet& ts, std::size_t max_depth, std::size_t min_leaf) {
    Model m = shell(LearnerKind::tree, ts);
    TreeBuilder b{ts, max_depth, std::max<std::size_t>(min_leaf, 1), {}};
    std::vector<std::size_t> all(ts.size());
    std::iota(all.begin(), all.end(), 0);
    b.build(std::move(all), 0);
    m.params = TreeParams{std::move(b.nodes)};
    return m;
}

Model train(const LearnerSpec& spec, const TrainingSet& ts) {
    switch (spec.kind) {
    case LearnerKind::zero_r: return train_zero_r(ts);
    case LearnerKind::one_r: return train_one_r(ts, spec.min_bucket);
    case LearnerKind::naive_bayes: return train_naive_bayes(ts, spec.var_floor);
    case LearnerKind::knn: return train_knn(ts, spec.k);
    case LearnerKind::tree: return train_decision_tree(ts, spec.max_depth, spec.min_leaf);
    }
    throw Error("unknown learner kind");
}

std::vector<double> naive_bayes_scores(const Model& model, std::span<const double> x) {
    const auto& p = std::get<NaiveBayesParams>(model.params);
    constexpr double log_two_pi = 1.8378770664093453;
    std::vector<double> scores(model.num_classes, -std::numeric_limits<double>::infinity());
    for (ClassId c = 0; c < model.num_classes; ++c) {
        if (!p.present[c]) continue;
        double s = p.log_prior[c];
        for (std::size_t f = 0; f < x.size(); ++f) {
            const double var = p.variance[c][f];
            const double d = x[f] - p.mean[c][f];
            s -= 0.5 * (log_two_pi + std::log(var)) + d * d / (2 * var);
        }
        scores[c] = s;
    }
    return scores;
}

namespace {

ClassId predict_one_r(const OneRParams& p, std::span<const double> x) {
    const double v = x[p.feature];
    for (std::size_t i = 0; i < p.thresholds.size(); ++i) {
        if (v <= p.thresholds[i]) return p.bucket_class[i];
    }
    return p.bucket_class.back();
}

ClassId predict_knn(const Model& model, const KnnParams& p, std::span<const double> x) {
    const std::size_t n = p.rows.size();
    std::vector<double> z(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) z[f] = p.scale[f] > 0 ? (x[f] - p.centre[f]) / p.scale[f] : 0.0;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0;
        for (std::size_t f = 0; f < z.size(); ++f) {
            const double e = p.rows[i][f] - z[f];
            d += e * e;
        }
        dist[i] = {d, i};
    }
    const std::size_t k = std::min(p.k, n);
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    const double cutoff = dist[k - 1].first;
    std::vector<std::size_t> votes(model.num_classes, 0);
    for (const auto& [d, i] : dist) {
        if (d <= cutoff) ++votes[p.labels[i]];
    }
    return argmax_first(votes);
}

ClassId predict_tree(const TreeParams& p, std::span<const double> x) {
    std::size_t at = 0;
    while (!p.nodes[at].is_leaf()) {
        const auto& node = p.nodes[at];
        at = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return p.nodes[at].leaf_class;
}

} // namespace

ClassId predict(const Model& model, std::span<const double> features) {
    if (features.size() != model.arity) {
        throw Error("predict: expected " + std::to_string(model.arity) + " features, got " +
                    std::to_string(features.size()));
    }
    return std::visit(
        [&](const auto& p) -> ClassId {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroRParams>) {
                return p.majority;
            } else if constexpr (std::is_same_v<P, OneRParams>) {
                return predict_one_r(p, features);
            } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                const auto scores = naive_bayes_scores(model, features);
                ClassId best = 0;
                for (ClassId c = 1; c < scores.size(); ++c) {
                    if (scores[c] > scores[best]) best = c;
                }
                return best;
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                return predict_knn(model, p, features);
            } else {
                return predict_tree(p, features);
            }
        },
        model.params);
}

std::size_t tree_depth(const Model& model) {
    const auto& nodes = std::get<TreeParams>(model.params).nodes;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[at].is_leaf()) {
            stack.emplace_back(nodes[at].left, d + 1);
            stack.emplace_back(nodes[at].right, d + 1);
        }
    }
    return deepest;
}

} // namespace cspsel

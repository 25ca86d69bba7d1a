#pragma once

#include "cspsel/common.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cspsel {

using ClassId = std::size_t;

/// Feature rows with class ids in [0, num_classes). The class alphabet order
/// is the id order and decides every tie.
struct TrainingSet {
    std::vector<std::vector<double>> rows;
    std::vector<ClassId> labels;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t arity() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
    void validate() const;
};

enum class LearnerKind { zero_r, one_r, naive_bayes, knn, tree };

std::string_view to_string(LearnerKind kind) noexcept;
LearnerKind parse_learner_kind(std::string_view text);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::zero_r;
    std::size_t min_bucket = 6;  // one_r
    double var_floor = 1e-9;     // naive_bayes
    std::size_t k = 5;           // knn
    std::size_t max_depth = 20;  // tree
    std::size_t min_leaf = 2;    // tree

    bool operator==(const LearnerSpec&) const = default;
};

/// Comma-separated kinds, e.g. "zeror,oner,nbayes,knn,tree", with defaults.
std::vector<LearnerSpec> parse_learner_bank(std::string_view text);
std::vector<LearnerSpec> default_learner_bank();

struct ZeroRParams {
    ClassId majority = 0;
};

/// Ascending thresholds split the feature axis into buckets;
/// value <= thresholds[i] falls in bucket i, anything larger in the last.
struct OneRParams {
    std::size_t feature = 0;
    std::vector<double> thresholds;
    std::vector<ClassId> bucket_class;
};

struct NaiveBayesParams {
    std::vector<double> log_prior;              // per class
    std::vector<bool> present;                  // class had training rows
    std::vector<std::vector<double>> mean;      // [class][feature]
    std::vector<std::vector<double>> variance;  // [class][feature], floored
};

struct KnnParams {
    std::size_t k = 5;
    std::vector<double> centre;
    std::vector<double> scale; // 0 marks a constant feature
    std::vector<std::vector<double>> rows; // normalised
    std::vector<ClassId> labels;
};

struct TreeNode {
    // Internal node when left != 0 (the root is index 0 and never a child).
    std::size_t feature = 0;
    double threshold = 0;
    std::size_t left = 0;
    std::size_t right = 0;
    ClassId leaf_class = 0;

    bool is_leaf() const noexcept { return left == 0; }
};

struct TreeParams {
    std::vector<TreeNode> nodes;
};

/// A trained classifier. Immutable; predict is pure.
struct Model {
    LearnerKind kind = LearnerKind::zero_r;
    std::size_t arity = 0;
    std::size_t num_classes = 0;
    std::variant<ZeroRParams, OneRParams, NaiveBayesParams, KnnParams, TreeParams> params;

    /// A model that always answers `cls`.
    static Model constant(ClassId cls, std::size_t arity, std::size_t num_classes);
};

Model train_zero_r(const TrainingSet& ts);
Model train_one_r(const TrainingSet& ts, std::size_t min_bucket = 6);
Model train_naive_bayes(const TrainingSet& ts, double var_floor = 1e-9);
Model train_knn(const TrainingSet& ts, std::size_t k = 5);
Model train_decision_tree(const TrainingSet& ts, std::size_t max_depth = 20, std::size_t min_leaf = 2);

Model train(const LearnerSpec& spec, const TrainingSet& ts);

/// Throws Error when `features` does not have the model's arity.
ClassId predict(const Model& model, std::span<const double> features);

/// Per-class log scores of a naive Bayes model; classes without training
/// rows score -infinity.
std::vector<double> naive_bayes_scores(const Model& model, std::span<const double> features);

/// Edges on the longest root-to-leaf path; a lone leaf has depth 0.
std::size_t tree_depth(const Model& model);

} // namespace cspsel

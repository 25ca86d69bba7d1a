#pragma once

#include "cspsel/features.hpp"
#include "cspsel/learners.hpp"
#include "cspsel/perf_data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspsel {

/// One training instance: its features and its label from the runtime data.
struct LabeledRow {
    std::string instance;
    std::vector<double> features;
    Label label;
};

/// Joins feature vectors and labels by instance name, in label order.
/// Throws Error unless both cover the same instance set.
std::vector<LabeledRow> join_rows(std::span<const FeatureVector> features,
                                  std::span<const LabeledInstance> labels);

/// How often a row of the given cost appears in the duplicated data set:
/// 1 + ceil(log2(cost)), and at least once. Throws Error for negative cost.
std::size_t duplication_copies(double cost_seconds);

/// Source indices of the duplicated data set. "Don't know" rows are dropped;
/// copies of a row are contiguous and rows keep their relative order.
std::vector<std::size_t> duplicate_by_cost(std::span<const LabeledRow> rows);

/// Fold index per row. Each class is shuffled with `rng` and dealt
/// round-robin, the deal continuing across classes, so every fold holds
/// floor or ceil of its proportional share of each class.
std::vector<std::size_t> stratified_kfold(std::span<const std::size_t> classes, std::size_t k, Rng& rng);

/// Same, but rows sharing a group id always land in the same fold. Groups are
/// stratified by the class of their first row.
std::vector<std::size_t> stratified_group_kfold(std::span<const std::size_t> classes,
                                                std::span<const std::size_t> groups, std::size_t k, Rng& rng);

/// Two-level decision: naive versus propagating, then which propagating
/// implementation.
struct HierarchicalModel {
    Model level1;                       // class 0: naive, class 1: propagating
    Model level2;                       // classes index `variants`
    std::vector<std::size_t> variants;  // level-2 class id -> solver index
    std::size_t naive = 0;
};

inline constexpr ClassId kLevel1Naive = 0;
inline constexpr ClassId kLevel1Propagating = 1;

/// `solver_labels[i]` is the solver index that row `features[i]` is labeled with.
HierarchicalModel train_hierarchical(std::span<const std::vector<double>> features,
                                     std::span<const std::size_t> solver_labels, const LearnerSpec& learner,
                                     const SolverSet& solvers);

std::size_t predict_hierarchical(const HierarchicalModel& model, std::span<const double> features);

struct EnsembleMember {
    std::size_t learner = 0; // index into the bank
    std::size_t fold = 0;    // the fold left out while training
    HierarchicalModel model;
};

struct Ensemble {
    SolverSet solvers;
    std::vector<std::string> feature_names;
    std::size_t folds = 0;
    std::vector<LearnerSpec> bank;
    std::vector<EnsembleMember> members; // sorted by (learner, fold)

    /// Vote tie precedence: the default solver, then the others in list order.
    std::vector<std::size_t> tie_order() const;
};

struct MetaOptions {
    std::size_t folds = 3;
    bool cost_model = true;    // duplicate rows by cost before folding
    bool strict_folds = false; // keep all copies of a row in one fold
    std::uint64_t seed = 1;
};

Ensemble train_meta(std::span<const LabeledRow> rows, std::vector<std::string> feature_names,
                    const SolverSet& solvers, std::span<const LearnerSpec> bank, const MetaOptions& options);

/// Plurality of member votes; ties resolved by Ensemble::tie_order.
std::size_t predict_meta(const Ensemble& ensemble, std::span<const double> features);

/// Per-solver vote counts of the members.
std::vector<std::size_t> meta_votes(const Ensemble& ensemble, std::span<const double> features);

/// Plurality over `votes` with `tie_order` precedence.
std::size_t plurality(std::span<const std::size_t> votes, std::span<const std::size_t> tie_order);

class FormatVersionError : public Error {
public:
    using Error::Error;
};

class CorruptionError : public Error {
public:
    using Error::Error;
};

inline constexpr std::string_view kEnsembleMagic = "cspsel-ensemble";
inline constexpr std::string_view kEnsembleVersion = "v1";

std::string save_ensemble(const Ensemble& ensemble);
Ensemble load_ensemble(std::string_view text);

} // namespace cspsel

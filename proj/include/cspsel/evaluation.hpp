#pragma once

#include "cspsel/features.hpp"
#include "cspsel/perf_data.hpp"
#include "cspsel/pipeline.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspsel {

/// Anything that picks a solver for an instance. Choosers that only look at
/// features ignore the name; baselines that peek at the runtimes ignore the
/// features.
using Chooser = std::function<std::size_t(std::string_view instance, std::span<const double> features)>;

struct InstanceOutcome {
    std::string instance;
    std::size_t chosen = 0;
    double penalty_seconds = 0;
    double feature_seconds = 0;
    double predict_seconds = 0;
};

struct EvaluationReport {
    std::string classifier;
    std::string feature_set; // "full", "cheap" or "none"
    std::vector<InstanceOutcome> outcomes; // instances with at least one solved solver
    std::size_t dont_know = 0;             // excluded: nobody solved them
    double total_penalty_seconds = 0;
    double feature_seconds = 0;
    double predict_seconds = 0;

    double overhead_seconds() const noexcept { return feature_seconds + predict_seconds; }
};

/// Penalty of `chooser` on every instance of `runtimes`. `features` must cover
/// exactly the same instances; their extraction time is counted as overhead.
EvaluationReport evaluate(std::string classifier, const Chooser& chooser, std::span<const FeatureVector> features,
                          const RuntimeMatrix& runtimes);

/// Variant for choosers that need no features (the baselines).
EvaluationReport evaluate(std::string classifier, const Chooser& chooser, const RuntimeMatrix& runtimes);

enum class BaselineKind { oracle, anti_oracle, default_decision, random_decision };

std::string_view to_string(BaselineKind kind) noexcept;

/// oracle: fastest solved solver. anti_oracle: the pick with the largest
/// penalty. default_decision: always the default solver. random_decision: a
/// uniform pick over all solvers, seeded per instance name so the result does
/// not depend on evaluation order.
Chooser baseline(BaselineKind kind, const RuntimeMatrix& runtimes, std::uint64_t seed = 0);

Chooser ensemble_chooser(const Ensemble& ensemble);
Chooser member_chooser(const Ensemble& ensemble, std::size_t member);

/// One summary line per report:
/// `classifier,feature_set,total_penalty_seconds,instances,dont_know,feature_seconds,predict_seconds,penalty_plus_overhead_seconds`
std::string write_summary_csv(std::span<const EvaluationReport> reports);

/// `instance,chosen,penalty_seconds,feature_seconds,predict_seconds`
std::string write_outcomes_csv(const EvaluationReport& report, const SolverSet& solvers);

struct SummaryEntry {
    std::string classifier;
    double total_penalty_seconds = 0;
};

std::vector<SummaryEntry> parse_summary_csv(std::string_view text);

/// Classifier x condition table of total penalties, e.g. rows per classifier
/// and columns "all equal" / "cost model".
class PenaltyTable {
public:
    void add(std::string_view classifier, std::string_view condition, double total_seconds);

    const std::vector<std::string>& classifiers() const noexcept { return classifiers_; }
    const std::vector<std::string>& conditions() const noexcept { return conditions_; }

    /// Full precision; missing cells are empty. Throws Error if the table is empty.
    std::string to_csv() const;
    /// Aligned text rounded to four significant digits.
    std::string to_text() const;

private:
    std::vector<std::string> classifiers_;
    std::vector<std::string> conditions_;
    std::vector<std::vector<std::optional<double>>> cells_;
};

} // namespace cspsel

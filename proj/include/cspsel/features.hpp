#pragma once

#include "cspsel/instance.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspsel {

enum class FeatureSet { full, cheap };

FeatureSet parse_feature_set(std::string_view text);
std::string_view to_string(FeatureSet set) noexcept;

// Canonical attribute order. The first nine come from the primal graph.
inline constexpr std::array<std::string_view, 37> kFullFeatureNames = {
    "edge_density", "clustering", "deg_min", "deg_max", "deg_mean", "deg_median", "deg_sd",
    "width_ordering", "width_graph",
    "dom_min", "dom_q1", "dom_median", "dom_q3", "dom_max", "dom_mean",
    "arity_min", "arity_q1", "arity_median", "arity_q3", "arity_max", "arity_mean",
    "multi_shared", "con_per_var", "aux_ratio",
    "tight_min", "tight_q1", "tight_median", "tight_q3", "tight_max", "tight_mean",
    "sym_prop",
    "ad_min", "ad_q1", "ad_median", "ad_q3", "ad_max", "ad_mean",
};

inline constexpr std::size_t kGraphFeatures = 9;
inline constexpr std::size_t kSummaryFeatures = 6;
static_assert(kGraphFeatures + kSummaryFeatures /*domains*/ + kSummaryFeatures /*arity*/ + 1 /*multi_shared*/ +
                      1 /*con_per_var*/ + 1 /*aux_ratio*/ + kSummaryFeatures /*tightness*/ + 1 /*sym_prop*/ +
                      kSummaryFeatures /*alldifferent*/ ==
                  kFullFeatureNames.size(),
              "attribute groups must add up to the canonical list");

/// Graph attributes skipped by the cheap set: everything but edge density.
inline constexpr std::array<std::string_view, 8> kCheapExcluded = {
    "clustering", "deg_min", "deg_max", "deg_mean", "deg_median", "deg_sd", "width_ordering", "width_graph",
};

std::span<const std::string_view> feature_names(FeatureSet set);

/// True for attributes that are proportions and must lie in [0, 1].
bool is_unit_interval_feature(std::string_view name);

struct Summary6 {
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
    double mean = 0;
    bool degenerate = false; // empty population, all values zero
};

/// Quantiles at 0, .25, .5, .75, 1 by linear interpolation on rank p*(k-1), plus the mean.
Summary6 summary6(std::span<const double> values);

Summary6 domain_features(const Instance& inst);
Summary6 arity_features(const Instance& inst);
double multiple_shared_variables(const Instance& inst);
double mean_constraints_per_variable(const Instance& inst);

/// Auxiliary to non-auxiliary variable ratio. Zero with a diagnostic if every
/// variable is auxiliary.
double aux_ratio(const Instance& inst, std::vector<std::string>* diagnostics = nullptr);

/// Product of the scope's domain sizes, saturating at UINT64_MAX.
std::uint64_t scope_domain_product(const Instance& inst, const Constraint& c);

/// Fraction of the scope's domain product the constraint disallows.
double exact_tightness(const Instance& inst, const Constraint& c);

/// Fraction of `samples` random valid tuples that violate the constraint.
double sampled_tightness(const Instance& inst, const Constraint& c, Rng& rng, std::size_t samples);

/// Exact when the domain product fits the sample budget, sampled otherwise.
/// The random stream for each constraint is seeded from `seed` and the
/// constraint's content, so results do not depend on declaration order.
double constraint_tightness(const Instance& inst, const Constraint& c, std::uint64_t seed, std::size_t samples);

Summary6 tightness_features(const Instance& inst, std::uint64_t seed, std::size_t samples = 1000);

/// Colour class of every variable after refinement of the variable/constraint
/// incidence graph. Class ids are canonical (independent of names and of
/// declaration order) but only meaningful for comparing variables.
std::vector<std::size_t> symmetry_classes(const Instance& inst);

double symmetry_proportion(const Instance& inst);

Summary6 alldiff_features(const Instance& inst);

struct FeatureVector {
    std::string instance;
    FeatureSet set = FeatureSet::full;
    std::vector<double> values; // ordered as feature_names(set)
    double extract_seconds = 0;
    std::vector<std::string> diagnostics;

    std::span<const std::string_view> names() const { return feature_names(set); }
    double at(std::string_view name) const;
};

inline constexpr std::size_t kDefaultTightnessSamples = 1000;

FeatureVector extract(const Instance& inst, FeatureSet set, std::uint64_t seed,
                      std::size_t samples = kDefaultTightnessSamples);

/// Features file with header `instance,<names...>,extract_seconds`.
std::string write_features_csv(std::span<const FeatureVector> vectors);
std::vector<FeatureVector> parse_features_csv(std::string_view text);

} // namespace cspsel

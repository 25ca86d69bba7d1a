#pragma once

#include "cspsel/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspsel {

inline constexpr double kDefaultTimeoutSeconds = 3600.0;

/// The candidate implementations. `naive` is the decomposition-equivalent
/// one; `default_solver` is what a solver uses when nobody decides.
struct SolverSet {
    std::vector<std::string> names;
    std::size_t naive = 0;
    std::size_t default_solver = 0;
    double timeout_seconds = kDefaultTimeoutSeconds;

    std::size_t size() const noexcept { return names.size(); }
    std::size_t index_of(std::string_view name) const; // throws Error if unknown
    void validate() const;

    bool operator==(const SolverSet&) const = default;
};

/// Solvers file: one name per line, optionally followed by the role
/// annotations `naive` and/or `default`; a `timeout <seconds>` line.
SolverSet parse_solvers_file(std::string_view text);
std::string write_solvers_file(const SolverSet& solvers);

enum class RunStatus { solved, timeout };

struct RunRecord {
    double cpu_seconds = 0;
    double nodes = 0;
    RunStatus status = RunStatus::solved;
};

/// Complete instance x solver table. Instances are kept sorted by name so
/// downstream results never depend on the input row order.
class RuntimeMatrix {
public:
    RuntimeMatrix() = default;
    RuntimeMatrix(SolverSet solvers, std::vector<std::string> instances,
                  std::vector<std::vector<RunRecord>> rows);

    const SolverSet& solvers() const noexcept { return solvers_; }
    const std::vector<std::string>& instances() const noexcept { return instances_; }
    std::size_t instance_count() const noexcept { return instances_.size(); }

    std::span<const RunRecord> row(std::size_t instance) const { return rows_.at(instance); }
    std::optional<std::size_t> find(std::string_view instance) const;

private:
    SolverSet solvers_;
    std::vector<std::string> instances_;
    std::vector<std::vector<RunRecord>> rows_;
};

/// Runtime file with header `instance,solver,cpu_seconds,nodes,status`.
RuntimeMatrix parse_runtime_csv(std::string_view text, const SolverSet& solvers);
std::string write_runtime_csv(const RuntimeMatrix& matrix);

struct Label {
    std::optional<std::size_t> solver; // empty: nobody solved it ("don't know")
    double cost_seconds = 0;

    bool dont_know() const noexcept { return !solver.has_value(); }
    bool operator==(const Label&) const = default;
};

inline constexpr std::string_view kDontKnow = "dont_know";

/// Processor time below this is treated as this when computing nodes/second.
inline constexpr double kCpuFloorSeconds = 1e-3;

/// Best implementation for one instance: the naive one if it is strictly
/// faster than every other, otherwise the solved propagating implementation
/// with the highest search nodes per second (ties: solver list order).
Label label_instance(std::span<const RunRecord> row, const SolverSet& solvers);

/// Extra CPU time caused by picking `chosen` instead of the fastest solver.
/// A timed-out pick counts as timeout minus the fastest time. Throws Error
/// if nobody solved the instance.
double misclassification_penalty(std::span<const RunRecord> row, std::size_t chosen, const SolverSet& solvers);

/// Largest penalty any choice could incur; zero when nobody solved it.
double instance_cost(std::span<const RunRecord> row, const SolverSet& solvers);

/// Index of the solved solver with the least CPU time (ties: list order).
std::optional<std::size_t> fastest_solver(std::span<const RunRecord> row);

struct LabeledInstance {
    std::string instance;
    Label label;
};

std::vector<LabeledInstance> label_all(const RuntimeMatrix& matrix);

/// Labels file with header `instance,label,cost_seconds`.
std::string write_labels_csv(std::span<const LabeledInstance> labels, const SolverSet& solvers);
std::vector<LabeledInstance> parse_labels_csv(std::string_view text, const SolverSet& solvers);

} // namespace cspsel

#pragma once

#include "cspsel/common.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cspsel {

using Value = std::int64_t;
using Tuple = std::vector<Value>;

struct Variable {
    std::string name;
    std::vector<Value> domain; // sorted ascending, no duplicates, non-empty
    bool aux = false;

    bool operator==(const Variable&) const = default;
};

enum class ConstraintKind { alldifferent, extension, relation };

enum class RelOp { eq, ne, lt, le, gt, ge };

std::string_view to_string(RelOp op) noexcept;

/// A constraint over an ordered scope of variable indices.
///
/// Extension constraints list their tuples explicitly (sorted, unique) and
/// are either an allowed list or a forbidden list. Relation constraints are
/// binary and read `scope[0] op scope[1] + offset`.
struct Constraint {
    ConstraintKind kind = ConstraintKind::alldifferent;
    std::vector<std::size_t> scope;
    bool allowed = true;
    std::vector<Tuple> tuples;
    RelOp op = RelOp::eq;
    Value offset = 0;

    std::size_t arity() const noexcept { return scope.size(); }

    bool operator==(const Constraint&) const = default;

    static Constraint alldifferent(std::vector<std::size_t> scope);
    static Constraint extension(std::vector<std::size_t> scope, bool allowed, std::vector<Tuple> tuples);
    static Constraint relation(std::size_t lhs, RelOp op, std::size_t rhs, Value offset = 0);
};

struct Instance {
    std::string name;
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;
    /// Variable indices in search order. Always a full permutation; when the
    /// source text has no `order` line this is declaration order.
    std::vector<std::size_t> ordering;

    bool operator==(const Instance&) const = default;
};

/// Throws Error if any structural invariant of `inst` is violated.
void validate(const Instance& inst);

/// Parses the line-oriented instance format. Throws ParseError carrying the
/// offending line and column.
Instance parse_instance(std::string_view text);

/// Inverse of parse_instance: parse_instance(render_instance(i)) == i.
std::string render_instance(const Instance& inst);

/// Constraint semantics without domain checks. Throws on arity mismatch.
bool satisfies(const Constraint& c, std::span<const Value> assignment);

/// As above, additionally rejecting values outside the scope's domains.
bool satisfies(const Instance& inst, const Constraint& c, std::span<const Value> assignment);

/// One tuple drawn position-wise uniformly from the scope's domains.
Tuple sample_valid_tuple(const Constraint& c, const Instance& inst, Rng& rng);

} // namespace cspsel

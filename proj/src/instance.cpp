#include "cspsel/instance.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace cspsel {

std::string_view to_string(RelOp op) noexcept {
    switch (op) {
    case RelOp::eq: return "=";
    case RelOp::ne: return "!=";
    case RelOp::lt: return "<";
    case RelOp::le: return "<=";
    case RelOp::gt: return ">";
    case RelOp::ge: return ">=";
    }
    return "?";
}

Constraint Constraint::alldifferent(std::vector<std::size_t> scope) {
    Constraint c;
    c.kind = ConstraintKind::alldifferent;
    c.scope = std::move(scope);
    return c;
}

Constraint Constraint::extension(std::vector<std::size_t> scope, bool allowed, std::vector<Tuple> tuples) {
    Constraint c;
    c.kind = ConstraintKind::extension;
    c.scope = std::move(scope);
    c.allowed = allowed;
    std::sort(tuples.begin(), tuples.end());
    tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
    c.tuples = std::move(tuples);
    return c;
}

Constraint Constraint::relation(std::size_t lhs, RelOp op, std::size_t rhs, Value offset) {
    Constraint c;
    c.kind = ConstraintKind::relation;
    c.scope = {lhs, rhs};
    c.op = op;
    c.offset = offset;
    return c;
}

void validate(const Instance& inst) {
    const std::size_t n = inst.variables.size();
    std::unordered_map<std::string, std::size_t> names;
    for (const auto& v : inst.variables) {
        if (!names.emplace(v.name, 0).second) {
            throw Error("duplicate variable name '" + v.name + "'");
        }
        if (v.domain.empty()) {
            throw Error("variable '" + v.name + "' has an empty domain");
        }
        if (!std::is_sorted(v.domain.begin(), v.domain.end()) ||
            std::adjacent_find(v.domain.begin(), v.domain.end()) != v.domain.end()) {
            throw Error("domain of '" + v.name + "' is not strictly ascending");
        }
    }
    for (const auto& c : inst.constraints) {
        if (c.scope.empty()) {
            throw Error("constraint with empty scope");
        }
        std::vector<std::size_t> sorted = c.scope;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw Error("constraint scope repeats a variable");
        }
        if (sorted.back() >= n) {
            throw Error("constraint scope references an undeclared variable");
        }
        switch (c.kind) {
        case ConstraintKind::alldifferent:
            if (c.arity() < 2) {
                throw Error("alldifferent needs arity >= 2");
            }
            break;
        case ConstraintKind::relation:
            if (c.arity() != 2) {
                throw Error("relation constraints are binary");
            }
            break;
        case ConstraintKind::extension:
            for (const auto& t : c.tuples) {
                if (t.size() != c.arity()) {
                    throw Error("extension tuple length differs from arity");
                }
            }
            break;
        }
    }
    if (inst.ordering.size() != n) {
        throw Error("ordering must list every variable exactly once");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t v : inst.ordering) {
        if (v >= n || seen[v]) {
            throw Error("ordering must list every variable exactly once");
        }
        seen[v] = true;
    }
}

namespace {

enum class TokKind { ident, integer, punct, end };

struct Token {
    TokKind kind = TokKind::end;
    std::string text;
    std::size_t column = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.column = i + 1;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < line.size() && ident_char(line[j])) ++j;
            t.kind = TokKind::ident;
            t.text = line.substr(i, j - i);
            i = j;
        } else if (digit(c) || (c == '-' && i + 1 < line.size() && digit(line[i + 1]))) {
            std::size_t j = i + 1;
            while (j < line.size() && digit(line[j])) ++j;
            t.kind = TokKind::integer;
            t.text = line.substr(i, j - i);
            i = j;
        } else {
            static constexpr std::string_view two[] = {"..", "!=", "<=", ">="};
            t.kind = TokKind::punct;
            bool matched = false;
            for (auto p : two) {
                if (line.substr(i, 2) == p) {
                    t.text = p;
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("{}(),;+-=<>").find(c) == std::string_view::npos) {
                    throw ParseError(std::string("unexpected character '") + c + "'", line_no, i + 1);
                }
                t.text = std::string(1, c);
                ++i;
            }
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.column = line.size() + 1;
    out.push_back(end);
    return out;
}

class LineParser {
public:
    LineParser(std::vector<Token> toks, std::size_t line_no) : toks_(std::move(toks)), line_(line_no) {}

    const Token& peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == TokKind::end; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, peek().column); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t column) const {
        throw ParseError(msg, line_, column);
    }

    bool accept(std::string_view punct) {
        if (peek().kind == TokKind::punct && peek().text == punct) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(std::string_view punct) {
        if (!accept(punct)) {
            fail("expected '" + std::string(punct) + "'");
        }
    }

    Token ident() {
        if (peek().kind != TokKind::ident) {
            fail("expected an identifier");
        }
        return toks_[pos_++];
    }

    Value integer() {
        if (peek().kind != TokKind::integer) {
            fail("expected an integer");
        }
        try {
            return parse_int(toks_[pos_++].text);
        } catch (const Error&) {
            fail_at("integer out of range", toks_[pos_ - 1].column);
        }
    }

    bool integer_next() const { return peek().kind == TokKind::integer; }

    void finish() {
        if (!at_end()) {
            fail("unexpected trailing token '" + peek().text + "'");
        }
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

struct PendingOrder {
    std::vector<Token> names;
    std::size_t line = 0;
};

} // namespace

Instance parse_instance(std::string_view text) {
    Instance inst;
    std::unordered_map<std::string, std::size_t> index;
    bool have_name = false;
    std::optional<PendingOrder> order;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }

        LineParser p(tokenize(line, line_no), line_no);
        if (p.at_end()) {
            continue;
        }
        const Token keyword = p.ident();

        auto lookup = [&](const Token& t) {
            auto it = index.find(t.text);
            if (it == index.end()) {
                p.fail_at("undeclared variable '" + t.text + "'", t.column);
            }
            return it->second;
        };

        auto scope_list = [&] {
            std::vector<std::size_t> scope;
            std::vector<bool> used(inst.variables.size(), false);
            p.expect("(");
            while (!p.accept(")")) {
                const Token t = p.ident();
                const std::size_t v = lookup(t);
                if (used[v]) {
                    p.fail_at("variable '" + t.text + "' repeated in scope", t.column);
                }
                used[v] = true;
                scope.push_back(v);
            }
            return scope;
        };

        if (keyword.text == "instance") {
            if (have_name) {
                p.fail_at("duplicate instance line", keyword.column);
            }
            // Instance names are a single whitespace-free word.
            std::string_view rest = line.substr(keyword.column - 1 + keyword.text.size());
            const auto b = rest.find_first_not_of(" \t");
            if (b == std::string_view::npos) {
                p.fail("expected an instance name");
            }
            rest = rest.substr(b);
            const auto e = rest.find_first_of(" \t");
            if (e != std::string_view::npos && rest.find_first_not_of(" \t", e) != std::string_view::npos) {
                throw ParseError("instance name must be a single word", line_no, line.size() - rest.size() + e + 2);
            }
            inst.name = std::string(rest.substr(0, e));
            have_name = true;
        } else if (keyword.text == "var") {
            const Token name = p.ident();
            Variable v;
            v.name = name.text;
            if (p.peek().kind == TokKind::ident && p.peek().text == "aux") {
                p.ident();
                v.aux = true;
            }
            const std::size_t dom_col = p.peek().column;
            if (p.accept("{")) {
                if (!p.accept("}")) {
                    do {
                        v.domain.push_back(p.integer());
                    } while (p.accept(","));
                    p.expect("}");
                }
                std::sort(v.domain.begin(), v.domain.end());
                if (std::adjacent_find(v.domain.begin(), v.domain.end()) != v.domain.end()) {
                    p.fail_at("duplicate value in domain of '" + v.name + "'", dom_col);
                }
            } else {
                const Value lo = p.integer();
                p.expect("..");
                const Value hi = p.integer();
                if (hi >= lo && hi - lo > 10'000'000) {
                    p.fail_at("domain range too large", dom_col);
                }
                for (Value x = lo; x <= hi; ++x) {
                    v.domain.push_back(x);
                }
            }
            if (v.domain.empty()) {
                p.fail_at("empty domain for '" + v.name + "'", dom_col);
            }
            p.finish();
            if (!index.emplace(v.name, inst.variables.size()).second) {
                p.fail_at("duplicate variable name '" + v.name + "'", name.column);
            }
            inst.variables.push_back(std::move(v));
        } else if (keyword.text == "order") {
            if (order) {
                p.fail_at("order given more than once", keyword.column);
            }
            PendingOrder po;
            po.line = line_no;
            while (!p.at_end()) {
                po.names.push_back(p.ident());
            }
            order = std::move(po);
        } else if (keyword.text == "con") {
            const Token kind = p.ident();
            if (kind.text == "alldifferent") {
                auto scope = scope_list();
                if (scope.size() < 2) {
                    p.fail_at("alldifferent needs arity >= 2", kind.column);
                }
                p.finish();
                inst.constraints.push_back(Constraint::alldifferent(std::move(scope)));
            } else if (kind.text == "rel") {
                const Token lhs = p.ident();
                const std::size_t x = lookup(lhs);
                RelOp op{};
                if (p.accept("=")) op = RelOp::eq;
                else if (p.accept("!=")) op = RelOp::ne;
                else if (p.accept("<=")) op = RelOp::le;
                else if (p.accept(">=")) op = RelOp::ge;
                else if (p.accept("<")) op = RelOp::lt;
                else if (p.accept(">")) op = RelOp::gt;
                else p.fail("expected a relational operator");
                const Token rhs = p.ident();
                const std::size_t y = lookup(rhs);
                if (x == y) {
                    p.fail_at("relation between a variable and itself", rhs.column);
                }
                Value offset = 0;
                if (p.accept("+")) {
                    offset = p.integer();
                } else if (p.accept("-")) {
                    offset = -p.integer();
                }
                p.finish();
                inst.constraints.push_back(Constraint::relation(x, op, y, offset));
            } else if (kind.text == "ext") {
                const Token mode = p.ident();
                bool allowed = true;
                if (mode.text == "allowed") {
                    allowed = true;
                } else if (mode.text == "forbidden") {
                    allowed = false;
                } else {
                    p.fail_at("expected 'allowed' or 'forbidden'", mode.column);
                }
                auto scope = scope_list();
                if (scope.empty()) {
                    p.fail_at("extension constraint with empty scope", mode.column);
                }
                std::vector<Tuple> tuples;
                p.expect("{");
                if (!p.accept("}")) {
                    do {
                        const std::size_t col = p.peek().column;
                        p.expect("(");
                        Tuple t;
                        do {
                            t.push_back(p.integer());
                        } while (p.accept(","));
                        p.expect(")");
                        if (t.size() != scope.size()) {
                            p.fail_at("tuple length " + std::to_string(t.size()) + " differs from arity " +
                                          std::to_string(scope.size()),
                                      col);
                        }
                        tuples.push_back(std::move(t));
                    } while (p.accept(";"));
                    p.expect("}");
                }
                p.finish();
                inst.constraints.push_back(Constraint::extension(std::move(scope), allowed, std::move(tuples)));
            } else {
                p.fail_at("unknown constraint kind '" + kind.text + "'", kind.column);
            }
        } else {
            p.fail_at("unknown keyword '" + keyword.text + "'", keyword.column);
        }
    }

    const std::size_t n = inst.variables.size();
    if (order) {
        std::vector<bool> seen(n, false);
        for (const auto& t : order->names) {
            auto it = index.find(t.text);
            if (it == index.end()) {
                throw ParseError("undeclared variable '" + t.text + "' in order", order->line, t.column);
            }
            if (seen[it->second]) {
                throw ParseError("variable '" + t.text + "' repeated in order", order->line, t.column);
            }
            seen[it->second] = true;
            inst.ordering.push_back(it->second);
        }
        if (inst.ordering.size() != n) {
            throw ParseError("order is not a permutation of all variables", order->line, 1);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            inst.ordering.push_back(i);
        }
    }
    return inst;
}

std::string render_instance(const Instance& inst) {
    std::ostringstream out;
    if (!inst.name.empty()) {
        out << "instance " << inst.name << '\n';
    }
    for (const auto& v : inst.variables) {
        out << "var " << v.name << (v.aux ? " aux " : " ");
        const auto& d = v.domain;
        const bool contiguous = d.size() > 1 && d.back() - d.front() + 1 == static_cast<Value>(d.size());
        if (contiguous) {
            out << d.front() << ".." << d.back();
        } else {
            out << '{';
            for (std::size_t i = 0; i < d.size(); ++i) {
                out << (i ? "," : "") << d[i];
            }
            out << '}';
        }
        out << '\n';
    }
    bool identity = true;
    for (std::size_t i = 0; i < inst.ordering.size(); ++i) {
        identity = identity && inst.ordering[i] == i;
    }
    if (!identity) {
        out << "order";
        for (std::size_t v : inst.ordering) {
            out << ' ' << inst.variables[v].name;
        }
        out << '\n';
    }
    auto scope = [&](const Constraint& c) {
        out << '(';
        for (std::size_t v : c.scope) {
            out << ' ' << inst.variables[v].name;
        }
        out << " )";
    };
    for (const auto& c : inst.constraints) {
        switch (c.kind) {
        case ConstraintKind::alldifferent:
            out << "con alldifferent ";
            scope(c);
            break;
        case ConstraintKind::relation:
            out << "con rel " << inst.variables[c.scope[0]].name << ' ' << to_string(c.op) << ' '
                << inst.variables[c.scope[1]].name;
            if (c.offset != 0) {
                out << " + " << c.offset;
            }
            break;
        case ConstraintKind::extension:
            out << "con ext " << (c.allowed ? "allowed " : "forbidden ");
            scope(c);
            out << " {";
            for (std::size_t i = 0; i < c.tuples.size(); ++i) {
                out << (i ? " ; (" : " (");
                for (std::size_t j = 0; j < c.tuples[i].size(); ++j) {
                    out << (j ? "," : "") << c.tuples[i][j];
                }
                out << ')';
            }
            out << " }";
            break;
        }
        out << '\n';
    }
    return out.str();
}

bool satisfies(const Constraint& c, std::span<const Value> assignment) {
    if (assignment.size() != c.arity()) {
        throw Error("assignment length " + std::to_string(assignment.size()) + " differs from arity " +
                    std::to_string(c.arity()));
    }
    switch (c.kind) {
    case ConstraintKind::alldifferent: {
        if (assignment.size() <= 8) {
            for (std::size_t i = 0; i < assignment.size(); ++i) {
                for (std::size_t j = i + 1; j < assignment.size(); ++j) {
                    if (assignment[i] == assignment[j]) return false;
                }
            }
            return true;
        }
        std::vector<Value> sorted(assignment.begin(), assignment.end());
        std::sort(sorted.begin(), sorted.end());
        return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    }
    case ConstraintKind::extension: {
        const bool found = std::binary_search(
            c.tuples.begin(), c.tuples.end(), assignment,
            [](const auto& a, const auto& b) {
                return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
            });
        return c.allowed ? found : !found;
    }
    case ConstraintKind::relation: {
        const Value x = assignment[0];
        const Value y = assignment[1] + c.offset;
        switch (c.op) {
        case RelOp::eq: return x == y;
        case RelOp::ne: return x != y;
        case RelOp::lt: return x < y;
        case RelOp::le: return x <= y;
        case RelOp::gt: return x > y;
        case RelOp::ge: return x >= y;
        }
    }
    }
    return false;
}

bool satisfies(const Instance& inst, const Constraint& c, std::span<const Value> assignment) {
    if (assignment.size() != c.arity()) {
        return satisfies(c, assignment); // throws the arity error
    }
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const auto& dom = inst.variables.at(c.scope[i]).domain;
        if (!std::binary_search(dom.begin(), dom.end(), assignment[i])) {
            throw Error("value " + std::to_string(assignment[i]) + " outside the domain of '" +
                        inst.variables[c.scope[i]].name + "'");
        }
    }
    return satisfies(c, assignment);
}

Tuple sample_valid_tuple(const Constraint& c, const Instance& inst, Rng& rng) {
    Tuple t(c.arity());
    for (std::size_t i = 0; i < c.arity(); ++i) {
        const auto& dom = inst.variables[c.scope[i]].domain;
        t[i] = dom[uniform_index(rng, dom.size())];
    }
    return t;
}

} // namespace cspsel

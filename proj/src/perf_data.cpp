#include "cspsel/perf_data.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace cspsel {

std::size_t SolverSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw Error("unknown solver '" + std::string(name) + "'");
}

void SolverSet::validate() const {
    if (names.size() < 2) {
        throw Error("a solver set needs at least two solvers");
    }
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (auto it = std::adjacent_find(sorted.begin(), sorted.end()); it != sorted.end()) {
        throw Error("duplicate solver name '" + *it + "'");
    }
    if (naive >= names.size() || default_solver >= names.size()) {
        throw Error("naive/default solver index out of range");
    }
    if (!(timeout_seconds > 0) || !std::isfinite(timeout_seconds)) {
        throw Error("timeout must be a positive number of seconds");
    }
}

SolverSet parse_solvers_file(std::string_view text) {
    SolverSet s;
    std::optional<std::size_t> naive;
    std::optional<std::size_t> def;
    bool have_timeout = false;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream words(line);
        std::vector<std::string> w;
        for (std::string t; words >> t;) w.push_back(t);
        if (w.empty()) continue;
        if (w[0] == "timeout") {
            if (w.size() != 2 || have_timeout) {
                throw ParseError("expected a single 'timeout <seconds>' line", line_no, 1);
            }
            try {
                s.timeout_seconds = parse_double(w[1]);
            } catch (const Error& e) {
                throw ParseError(e.what(), line_no, 1);
            }
            have_timeout = true;
            continue;
        }
        const std::size_t idx = s.names.size();
        s.names.push_back(w[0]);
        for (std::size_t k = 1; k < w.size(); ++k) {
            if (w[k] == "naive") {
                if (naive) throw ParseError("more than one naive solver", line_no, 1);
                naive = idx;
            } else if (w[k] == "default") {
                if (def) throw ParseError("more than one default solver", line_no, 1);
                def = idx;
            } else {
                throw ParseError("unknown solver annotation '" + w[k] + "'", line_no, 1);
            }
        }
    }
    if (!naive || !def) {
        throw ParseError("solvers file must mark one naive and one default solver", line_no, 1);
    }
    s.naive = *naive;
    s.default_solver = *def;
    s.validate();
    return s;
}

std::string write_solvers_file(const SolverSet& solvers) {
    std::ostringstream out;
    for (std::size_t i = 0; i < solvers.size(); ++i) {
        out << solvers.names[i];
        if (i == solvers.naive) out << " naive";
        if (i == solvers.default_solver) out << " default";
        out << '\n';
    }
    out << "timeout " << format_double(solvers.timeout_seconds) << '\n';
    return out.str();
}

RuntimeMatrix::RuntimeMatrix(SolverSet solvers, std::vector<std::string> instances,
                             std::vector<std::vector<RunRecord>> rows)
    : solvers_(std::move(solvers)) {
    solvers_.validate();
    if (instances.size() != rows.size()) {
        throw Error("runtime matrix: instance and row counts differ");
    }
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return instances[a] < instances[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        if (k > 0 && instances[i] == instances_.back()) {
            throw Error("runtime matrix: duplicate instance '" + instances[i] + "'");
        }
        if (rows[i].size() != solvers_.size()) {
            throw Error("runtime matrix: instance '" + instances[i] + "' lacks a record per solver");
        }
        for (const auto& r : rows[i]) {
            if (!(r.cpu_seconds >= 0) || !(r.nodes >= 0)) {
                throw Error("runtime matrix: negative time or node count for '" + instances[i] + "'");
            }
            if (r.status == RunStatus::timeout && r.cpu_seconds != solvers_.timeout_seconds) {
                throw Error("runtime matrix: timeout record for '" + instances[i] +
                            "' must report the timeout as its CPU time");
            }
            if (r.status == RunStatus::solved && r.cpu_seconds > solvers_.timeout_seconds) {
                throw Error("runtime matrix: solved record for '" + instances[i] + "' exceeds the timeout");
            }
        }
        instances_.push_back(instances[i]);
        rows_.push_back(std::move(rows[i]));
    }
}

std::optional<std::size_t> RuntimeMatrix::find(std::string_view instance) const {
    auto it = std::lower_bound(instances_.begin(), instances_.end(), instance);
    if (it == instances_.end() || *it != instance) return std::nullopt;
    return static_cast<std::size_t>(it - instances_.begin());
}

RuntimeMatrix parse_runtime_csv(std::string_view text, const SolverSet& solvers) {
    const auto rows = csv::read(text);
    if (rows.empty()) {
        throw ParseError("runtime file is empty", 1, 1);
    }
    csv::expect_header(rows.front(), {"instance", "solver", "cpu_seconds", "nodes", "status"});

    std::map<std::string, std::vector<std::optional<RunRecord>>> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 5) {
            throw ParseError("malformed row: expected 5 fields", row.line, 1);
        }
        RunRecord rec;
        std::size_t solver = 0;
        try {
            solver = solvers.index_of(row.fields[1]);
            rec.cpu_seconds = parse_double(row.fields[2]);
            rec.nodes = parse_double(row.fields[3]);
        } catch (const Error& e) {
            throw ParseError(e.what(), row.line, 1);
        }
        if (row.fields[4] == "solved") {
            rec.status = RunStatus::solved;
        } else if (row.fields[4] == "timeout") {
            rec.status = RunStatus::timeout;
        } else {
            throw ParseError("status must be 'solved' or 'timeout'", row.line, 1);
        }
        if (rec.cpu_seconds < 0 || rec.nodes < 0) {
            throw ParseError("negative cpu_seconds or nodes", row.line, 1);
        }
        if (rec.status == RunStatus::timeout && rec.cpu_seconds != solvers.timeout_seconds) {
            throw ParseError("timeout row must have cpu_seconds equal to the timeout (" +
                                 format_double(solvers.timeout_seconds) + ")",
                             row.line, 1);
        }
        if (rec.status == RunStatus::solved && rec.cpu_seconds > solvers.timeout_seconds) {
            throw ParseError("solved row exceeds the timeout", row.line, 1);
        }
        auto& cell = cells[row.fields[0]];
        cell.resize(solvers.size());
        if (cell[solver]) {
            throw ParseError("duplicate cell for instance '" + row.fields[0] + "', solver '" + row.fields[1] + "'",
                             row.line, 1);
        }
        cell[solver] = rec;
    }

    std::vector<std::string> instances;
    std::vector<std::vector<RunRecord>> matrix;
    for (auto& [name, cell] : cells) {
        std::vector<RunRecord> full;
        for (std::size_t s = 0; s < solvers.size(); ++s) {
            if (!cell[s]) {
                throw Error("incomplete runtime matrix: no record for instance '" + name + "', solver '" +
                            solvers.names[s] + "'");
            }
            full.push_back(*cell[s]);
        }
        instances.push_back(name);
        matrix.push_back(std::move(full));
    }
    return RuntimeMatrix(solvers, std::move(instances), std::move(matrix));
}

std::string write_runtime_csv(const RuntimeMatrix& matrix) {
    std::ostringstream out;
    out << "instance,solver,cpu_seconds,nodes,status\n";
    const auto& s = matrix.solvers();
    for (std::size_t i = 0; i < matrix.instance_count(); ++i) {
        const auto row = matrix.row(i);
        for (std::size_t j = 0; j < s.size(); ++j) {
            out << matrix.instances()[i] << ',' << s.names[j] << ',' << format_double(row[j].cpu_seconds) << ','
                << format_double(row[j].nodes) << ',' << (row[j].status == RunStatus::solved ? "solved" : "timeout")
                << '\n';
        }
    }
    return out.str();
}

std::optional<std::size_t> fastest_solver(std::span<const RunRecord> row) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j].status != RunStatus::solved) continue;
        if (!best || row[j].cpu_seconds < row[*best].cpu_seconds) best = j;
    }
    return best;
}

Label label_instance(std::span<const RunRecord> row, const SolverSet& solvers) {
    if (row.size() != solvers.size()) {
        throw Error("label_instance: row has " + std::to_string(row.size()) + " records for " +
                    std::to_string(solvers.size()) + " solvers");
    }
    Label label;
    if (!fastest_solver(row)) {
        return label;
    }
    label.cost_seconds = instance_cost(row, solvers);

    const auto& naive = row[solvers.naive];
    if (naive.status == RunStatus::solved) {
        bool strictly_fastest = true;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j != solvers.naive && !(naive.cpu_seconds < row[j].cpu_seconds)) {
                strictly_fastest = false;
                break;
            }
        }
        if (strictly_fastest) {
            label.solver = solvers.naive;
            return label;
        }
    }

    double best_rate = -1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (j == solvers.naive || row[j].status != RunStatus::solved) continue;
        const double rate = row[j].nodes / std::max(row[j].cpu_seconds, kCpuFloorSeconds);
        if (rate > best_rate) {
            best_rate = rate;
            label.solver = j;
        }
    }
    if (!label.solver) {
        // Only the naive implementation finished, but it tied on CPU time.
        label.solver = solvers.naive;
    }
    return label;
}

double misclassification_penalty(std::span<const RunRecord> row, std::size_t chosen, const SolverSet& solvers) {
    if (chosen >= row.size()) {
        throw Error("misclassification_penalty: solver index out of range");
    }
    const auto best = fastest_solver(row);
    if (!best) {
        throw Error("misclassification_penalty: no solver solved the instance");
    }
    const double fastest = row[*best].cpu_seconds;
    const double taken = row[chosen].status == RunStatus::solved ? row[chosen].cpu_seconds : solvers.timeout_seconds;
    return taken - fastest;
}

double instance_cost(std::span<const RunRecord> row, const SolverSet& solvers) {
    if (!fastest_solver(row)) {
        return 0.0;
    }
    double cost = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        cost = std::max(cost, misclassification_penalty(row, j, solvers));
    }
    return cost;
}

std::vector<LabeledInstance> label_all(const RuntimeMatrix& matrix) {
    std::vector<LabeledInstance> out;
    out.reserve(matrix.instance_count());
    for (std::size_t i = 0; i < matrix.instance_count(); ++i) {
        out.push_back({matrix.instances()[i], label_instance(matrix.row(i), matrix.solvers())});
    }
    return out;
}

std::string write_labels_csv(std::span<const LabeledInstance> labels, const SolverSet& solvers) {
    std::ostringstream out;
    out << "instance,label,cost_seconds\n";
    for (const auto& l : labels) {
        out << l.instance << ','
            << (l.label.solver ? std::string_view(solvers.names.at(*l.label.solver)) : kDontKnow) << ','
            << format_double(l.label.cost_seconds) << '\n';
    }
    return out.str();
}

std::vector<LabeledInstance> parse_labels_csv(std::string_view text, const SolverSet& solvers) {
    const auto rows = csv::read(text);
    if (rows.empty()) {
        throw ParseError("labels file is empty", 1, 1);
    }
    csv::expect_header(rows.front(), {"instance", "label", "cost_seconds"});
    std::vector<LabeledInstance> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 3) {
            throw ParseError("malformed row: expected 3 fields", row.line, 1);
        }
        LabeledInstance li;
        li.instance = row.fields[0];
        try {
            if (row.fields[1] != kDontKnow) li.label.solver = solvers.index_of(row.fields[1]);
            li.label.cost_seconds = parse_double(row.fields[2]);
        } catch (const Error& e) {
            throw ParseError(e.what(), row.line, 1);
        }
        if (li.label.cost_seconds < 0) {
            throw ParseError("negative cost", row.line, 1);
        }
        out.push_back(std::move(li));
    }
    return out;
}

} // namespace cspsel

#include "cspsel/evaluation.hpp"

#include "csv.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace cspsel {

namespace {

EvaluationReport run(std::string classifier, const Chooser& chooser, const RuntimeMatrix& runtimes,
                     const std::unordered_map<std::string_view, const FeatureVector*>* features) {
    EvaluationReport r;
    r.classifier = std::move(classifier);
    r.feature_set = "none";
    const auto& solvers = runtimes.solvers();
    for (std::size_t i = 0; i < runtimes.instance_count(); ++i) {
        const auto& name = runtimes.instances()[i];
        const auto row = runtimes.row(i);
        if (!fastest_solver(row)) {
            ++r.dont_know;
            continue;
        }
        InstanceOutcome o;
        o.instance = name;
        std::span<const double> fv;
        if (features) {
            const FeatureVector* f = features->at(name);
            fv = f->values;
            o.feature_seconds = f->extract_seconds;
            r.feature_set = std::string(to_string(f->set));
        }
        const auto start = std::chrono::steady_clock::now();
        o.chosen = chooser(name, fv);
        o.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.chosen >= solvers.size()) {
            throw Error("chooser '" + r.classifier + "' returned an unknown solver index");
        }
        o.penalty_seconds = misclassification_penalty(row, o.chosen, solvers);
        r.total_penalty_seconds += o.penalty_seconds;
        r.feature_seconds += o.feature_seconds;
        r.predict_seconds += o.predict_seconds;
        r.outcomes.push_back(std::move(o));
    }
    return r;
}

} // namespace

EvaluationReport evaluate(std::string classifier, const Chooser& chooser, std::span<const FeatureVector> features,
                          const RuntimeMatrix& runtimes) {
    std::unordered_map<std::string_view, const FeatureVector*> by_name;
    for (const auto& f : features) {
        if (!runtimes.find(f.instance)) {
            throw Error("instance set mismatch: features for '" + f.instance + "' but no runtimes");
        }
        by_name.emplace(f.instance, &f);
    }
    for (const auto& name : runtimes.instances()) {
        if (!by_name.count(name)) {
            throw Error("instance set mismatch: runtimes for '" + name + "' but no features");
        }
    }
    if (by_name.size() != features.size()) {
        throw Error("instance set mismatch: duplicate feature rows");
    }
    return run(std::move(classifier), chooser, runtimes, &by_name);
}

EvaluationReport evaluate(std::string classifier, const Chooser& chooser, const RuntimeMatrix& runtimes) {
    return run(std::move(classifier), chooser, runtimes, nullptr);
}

std::string_view to_string(BaselineKind kind) noexcept {
    switch (kind) {
    case BaselineKind::oracle: return "oracle";
    case BaselineKind::anti_oracle: return "anti_oracle";
    case BaselineKind::default_decision: return "default";
    case BaselineKind::random_decision: return "random";
    }
    return "?";
}

Chooser baseline(BaselineKind kind, const RuntimeMatrix& runtimes, std::uint64_t seed) {
    const RuntimeMatrix* m = &runtimes;
    auto row_of = [m](std::string_view instance) {
        const auto i = m->find(instance);
        if (!i) throw Error("baseline: unknown instance '" + std::string(instance) + "'");
        return m->row(*i);
    };
    switch (kind) {
    case BaselineKind::oracle:
        return [row_of](std::string_view instance, std::span<const double>) {
            return fastest_solver(row_of(instance)).value_or(0);
        };
    case BaselineKind::anti_oracle:
        return [row_of, m](std::string_view instance, std::span<const double>) {
            const auto row = row_of(instance);
            std::size_t worst = 0;
            double worst_penalty = -1;
            for (std::size_t s = 0; s < row.size(); ++s) {
                const double p = misclassification_penalty(row, s, m->solvers());
                if (p > worst_penalty) {
                    worst_penalty = p;
                    worst = s;
                }
            }
            return worst;
        };
    case BaselineKind::default_decision: {
        const std::size_t d = runtimes.solvers().default_solver;
        return [d](std::string_view, std::span<const double>) { return d; };
    }
    case BaselineKind::random_decision: {
        const std::size_t n = runtimes.solvers().size();
        return [n, seed](std::string_view instance, std::span<const double>) {
            Rng rng(splitmix64(seed ^ fnv1a64(instance)));
            return static_cast<std::size_t>(uniform_index(rng, n));
        };
    }
    }
    throw Error("unknown baseline");
}

Chooser ensemble_chooser(const Ensemble& ensemble) {
    return [&ensemble](std::string_view, std::span<const double> fv) { return predict_meta(ensemble, fv); };
}

Chooser member_chooser(const Ensemble& ensemble, std::size_t member) {
    const HierarchicalModel& m = ensemble.members.at(member).model;
    return [&m](std::string_view, std::span<const double> fv) { return predict_hierarchical(m, fv); };
}

std::string write_summary_csv(std::span<const EvaluationReport> reports) {
    std::ostringstream out;
    out << "classifier,feature_set,total_penalty_seconds,instances,dont_know,feature_seconds,predict_seconds,"
           "penalty_plus_overhead_seconds\n";
    for (const auto& r : reports) {
        out << r.classifier << ',' << r.feature_set << ',' << format_double(r.total_penalty_seconds) << ','
            << r.outcomes.size() << ',' << r.dont_know << ',' << format_double(r.feature_seconds) << ','
            << format_double(r.predict_seconds) << ','
            << format_double(r.total_penalty_seconds + r.overhead_seconds()) << '\n';
    }
    return out.str();
}

std::string write_outcomes_csv(const EvaluationReport& report, const SolverSet& solvers) {
    std::ostringstream out;
    out << "instance,chosen,penalty_seconds,feature_seconds,predict_seconds\n";
    for (const auto& o : report.outcomes) {
        out << o.instance << ',' << solvers.names.at(o.chosen) << ',' << format_double(o.penalty_seconds) << ','
            << format_double(o.feature_seconds) << ',' << format_double(o.predict_seconds) << '\n';
    }
    return out.str();
}

std::vector<SummaryEntry> parse_summary_csv(std::string_view text) {
    const auto rows = csv::read(text);
    if (rows.empty()) {
        throw ParseError("summary file is empty", 1, 1);
    }
    const auto& h = rows.front().fields;
    const auto col = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (h[i] == name) return i;
        }
        throw ParseError("summary header lacks column '" + std::string(name) + "'", rows.front().line, 1);
    };
    const std::size_t c_name = col("classifier");
    const std::size_t c_total = col("total_penalty_seconds");
    std::vector<SummaryEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != h.size()) {
            throw ParseError("malformed summary row", rows[r].line, 1);
        }
        try {
            out.push_back({f[c_name], parse_double(f[c_total])});
        } catch (const Error& e) {
            throw ParseError(e.what(), rows[r].line, 1);
        }
    }
    return out;
}

void PenaltyTable::add(std::string_view classifier, std::string_view condition, double total_seconds) {
    auto index = [](std::vector<std::string>& names, std::string_view name) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
        names.emplace_back(name);
        return names.size() - 1;
    };
    const std::size_t r = index(classifiers_, classifier);
    const std::size_t c = index(conditions_, condition);
    cells_.resize(classifiers_.size());
    for (auto& row : cells_) row.resize(conditions_.size());
    cells_[r][c] = total_seconds;
}

std::string PenaltyTable::to_csv() const {
    if (classifiers_.empty()) {
        throw Error("penalty table has no classifiers");
    }
    std::ostringstream out;
    out << "classifier";
    for (const auto& c : conditions_) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < classifiers_.size(); ++r) {
        out << classifiers_[r];
        for (const auto& cell : cells_[r]) {
            out << ',';
            if (cell) out << format_double(*cell);
        }
        out << '\n';
    }
    return out.str();
}

std::string PenaltyTable::to_text() const {
    if (classifiers_.empty()) {
        throw Error("penalty table has no classifiers");
    }
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"classifier"});
    for (const auto& c : conditions_) grid.back().push_back(c);
    for (std::size_t r = 0; r < classifiers_.size(); ++r) {
        grid.push_back({classifiers_[r]});
        for (const auto& cell : cells_[r]) grid.back().push_back(cell ? format_significant(*cell, 4) : "-");
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream out;
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) {
                out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            } else {
                out << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cspsel

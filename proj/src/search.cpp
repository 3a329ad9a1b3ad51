#include "nonterm/search.hpp"

#include <chrono>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "nonterm/encode.hpp"
#include "nonterm/errors.hpp"

namespace nonterm {

const char* to_string(SearchMethod m) {
    return m == SearchMethod::Tdas ? "tdas" : "tda-baseline";
}

const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Disproved: return "Disproved";
        case SearchStatus::ExhaustedUnsat: return "ExhaustedUnsat";
        default: return "Timeout";
    }
}

int default_state_ceiling(const std::string& rule_name) {
    if (rule_name == "S3" || rule_name == "S4") return 6;  // five-argument refutations
    if (rule_name == "Phi2") return 9;
    return 7;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

SearchOutcome disprove(const CombinatorRule& rule, const SearchOptions& opts) {
    int ceiling = opts.max_states > 0 ? opts.max_states : default_state_ceiling(rule.name);
    if (ceiling < rule.arity + 1)
        throw InvalidInput("max_states must be at least " + std::to_string(rule.arity + 1) +
                           " for " + rule.name);
    if (ceiling > kMaxStates)
        throw InvalidInput("max_states exceeds the representation limit of " +
                           std::to_string(kMaxStates));

    bool sink = opts.method == SearchMethod::Tdas;
    auto t_start = std::chrono::steady_clock::now();
    SearchOutcome out;

    for (int n = rule.arity + 1; n <= ceiling; ++n) {
        SearchStep step;
        step.states = n;

        auto t_enc = std::chrono::steady_clock::now();
        CnfInstance inst = sink ? encode_tdas(rule, n) : encode_tda_baseline(rule, n);
        step.encode_seconds = seconds_since(t_enc);
        CnfStats stats = cnf_stats(inst);
        step.variables = stats.variables;
        step.clauses = stats.clauses;

        if (!opts.emit_cnf_prefix.empty()) {
            std::string base = opts.emit_cnf_prefix + "-" + rule.name + "-" + std::to_string(n);
            write_dimacs_file(inst, base + ".cnf");
            write_variable_map(inst, base + ".map");
        }

        double budget = opts.per_state_timeout;
        if (opts.total_timeout > 0) {
            double left = opts.total_timeout - seconds_since(t_start);
            if (left <= 0) {
                step.result = SatStatus::Unknown;
                out.per_state_log.push_back(step);
                out.status = SearchStatus::Timeout;
                out.detail = "total time budget exhausted before " + std::to_string(n) +
                             " states";
                return out;
            }
            budget = budget > 0 ? std::min(budget, left) : left;
        }

        SatResult res = opts.solver
                            ? solve_external(inst, *opts.solver, budget)
                            : solve_builtin(inst, {opts.conflict_limit, budget});
        step.result = res.status;
        step.solve_seconds = res.solve_seconds;
        out.per_state_log.push_back(step);

        if (res.status == SatStatus::Unknown) {
            out.status = SearchStatus::Timeout;
            out.detail = "no verdict at " + std::to_string(n) + " states: " + res.detail;
            return out;
        }
        if (res.status == SatStatus::Unsatisfiable) continue;

        TreeAutomaton a = decode_automaton(inst, res.model);
        VerificationReport report = sink ? verify_tdas(a, rule) : verify_tda(a, rule);
        if (!report.passed())
            throw InternalError("decoded automaton fails verification for " + rule.name +
                                " at " + std::to_string(n) + " states:\n" + report.summary());

        std::optional<TermPtr> witness = smallest_accepted_term(a, rule);
        if (!witness)
            throw InternalError("final language of the decoded automaton is empty for " +
                                rule.name);
        validate_counterexample(*witness, a, rule, opts.validate_steps);

        out.status = SearchStatus::Disproved;
        out.found_states = n;
        out.automaton = std::move(a);
        out.verification = std::move(report);
        out.counterexample = std::move(witness);
        out.instance = std::move(inst);
        out.model = std::move(res.model);
        return out;
    }

    out.status = SearchStatus::ExhaustedUnsat;
    return out;
}

ValidationReport validate_counterexample(const TermPtr& start, const TreeAutomaton& a,
                                         const CombinatorRule& rule, int steps) {
    constexpr int kBreadthCap = 100;
    ValidationReport report;
    std::unordered_set<TermPtr, TermHash, TermEq> visited;
    std::vector<TermPtr> frontier{start};
    visited.insert(start);

    for (int depth = 0; depth <= steps; ++depth) {
        std::vector<TermPtr> next;
        for (const TermPtr& t : frontier) {
            if (!accepts(a, t))
                throw ValidationFailure("term left the certificate language at step " +
                                        std::to_string(depth) + ": " + print_term(t, rule));
            if (is_normal_form(t, rule))
                throw ValidationFailure("term reached a normal form at step " +
                                        std::to_string(depth) + ": " + print_term(t, rule));
            ++report.terms_checked;
            report.depth_reached = depth;
            if (depth == steps) continue;
            for (TermPtr& s : innermost_successors(t, rule)) {
                if (static_cast<int>(next.size()) >= kBreadthCap) break;
                if (visited.insert(s).second) next.push_back(std::move(s));
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return report;
}

std::vector<CorpusRow> run_corpus(const std::vector<CombinatorRule>& rules,
                                  const CorpusOptions& opts) {
    std::vector<CorpusRow> rows(rules.size());
    std::mutex pick;
    std::size_t cursor = 0;

    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(pick);
                if (cursor >= rules.size()) return;
                i = cursor++;
            }
            CorpusRow& row = rows[i];
            row.name = rules[i].name;
            if (!opts.include_slow && opts.search.max_states == 0 &&
                default_state_ceiling(rules[i].name) > 7) {
                row.skipped = true;
                row.error = "needs a nine-state search; rerun with the slow set enabled";
                continue;
            }
            try {
                row.outcome = disprove(rules[i], opts.search);
            } catch (const Error& e) {
                row.error = e.what();
            }
            if (!opts.keep_artifacts) {
                row.outcome.instance.reset();
                row.outcome.model.clear();
                row.outcome.model.shrink_to_fit();
            }
        }
    };

    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace {

nlohmann::json outcome_json(const CombinatorRule* rule, const SearchOutcome& out) {
    nlohmann::json j;
    j["status"] = to_string(out.status);
    j["found_states"] =
        out.found_states ? nlohmann::json(*out.found_states) : nlohmann::json(nullptr);
    nlohmann::json per_n = nlohmann::json::array();
    for (const SearchStep& s : out.per_state_log) {
        per_n.push_back({{"n", s.states},
                         {"result", to_string(s.result)},
                         {"vars", s.variables},
                         {"clauses", s.clauses},
                         {"encode_s", s.encode_seconds},
                         {"solve_s", s.solve_seconds}});
    }
    j["per_n"] = per_n;
    j["counterexample"] = out.counterexample && rule
                              ? nlohmann::json(print_term(*out.counterexample, *rule))
                              : nlohmann::json(nullptr);
    j["automaton"] =
        out.automaton ? nlohmann::json(serialize_automaton(*out.automaton)) : nlohmann::json(nullptr);
    if (!out.detail.empty()) j["detail"] = out.detail;
    return j;
}

} // namespace

std::string outcome_to_json(const CombinatorRule& rule, const SearchOutcome& outcome,
                            SearchMethod method) {
    nlohmann::json j = outcome_json(&rule, outcome);
    j["combinator"] = rule.name;
    j["method"] = to_string(method);
    return j.dump(2);
}

std::string corpus_to_json(const std::vector<CorpusRow>& rows, SearchMethod method) {
    nlohmann::json doc;
    doc["method"] = to_string(method);
    nlohmann::json arr = nlohmann::json::array();
    for (const CorpusRow& row : rows) {
        const CombinatorRule* rule = find_builtin_rule(row.name);
        nlohmann::json j;
        if (row.skipped) {
            j["status"] = "Skipped";
            j["detail"] = row.error;
        } else if (!row.error.empty()) {
            j["status"] = "Error";
            j["detail"] = row.error;
        } else {
            j = outcome_json(rule, row.outcome);
        }
        j["combinator"] = row.name;
        arr.push_back(j);
    }
    doc["rows"] = arr;
    return doc.dump(2);
}

} // namespace nonterm

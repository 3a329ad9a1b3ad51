#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nonterm/automaton.hpp"
#include "nonterm/cnf.hpp"
#include "nonterm/solver.hpp"
#include "nonterm/term.hpp"
#include "nonterm/verify.hpp"

namespace nonterm {

enum class SearchMethod { Tdas, TdaBaseline };

const char* to_string(SearchMethod m);  // "tdas" / "tda-baseline"

struct SearchOptions {
    SearchMethod method = SearchMethod::Tdas;
    int max_states = 0;                  // 0 = per-rule default ceiling
    double per_state_timeout = 0.0;      // seconds per candidate size, 0 = none
    double total_timeout = 0.0;          // seconds for the whole ladder, 0 = none
    std::optional<SolverCommand> solver; // nullopt = builtin solver
    long long conflict_limit = 0;        // builtin solver only
    int validate_steps = 50;
    std::string emit_cnf_prefix;         // write <prefix>-<rule>-<N>.cnf/.map per size
};

enum class SearchStatus { Disproved, ExhaustedUnsat, Timeout };

const char* to_string(SearchStatus s);

struct SearchStep {
    int states = 0;
    SatStatus result = SatStatus::Unknown;
    long long variables = 0;
    long long clauses = 0;
    double encode_seconds = 0.0;
    double solve_seconds = 0.0;
};

struct SearchOutcome {
    SearchStatus status = SearchStatus::Timeout;
    std::string detail;  // set when status is Timeout
    std::optional<int> found_states;
    std::optional<TreeAutomaton> automaton;
    VerificationReport verification;
    std::optional<TermPtr> counterexample;
    std::vector<SearchStep> per_state_log;
    // The satisfiable instance and model, kept for later auditing.
    std::optional<CnfInstance> instance;
    std::vector<bool> model;
};

// Default search ceiling for a combinator name: high enough to find
// every known certificate, low enough to keep refutation runs at desk
// scale for the five-argument rules.
int default_state_ceiling(const std::string& rule_name);

// The disproof ladder: for each state count from arity+1 up to the
// ceiling, build the chosen encoding and solve it.  The first
// satisfiable size is decoded, re-verified (a failure here is an
// InternalError: the encoding promises soundness), and witnessed by the
// smallest accepted term, which is then replayed for validate_steps
// rewrite levels.  Unsatisfiable sizes advance; an unknown solver
// result stops the search with Timeout.
SearchOutcome disprove(const CombinatorRule& rule, const SearchOptions& opts = {});

struct ValidationReport {
    long long terms_checked = 0;
    int depth_reached = 0;
};

// Breadth-first replay of innermost rewriting from `start`, checking
// every reached term is accepted by the automaton and reducible.  Each
// level keeps at most 100 new terms.  Throws ValidationFailure naming
// the offending term and step when a check fails.
ValidationReport validate_counterexample(const TermPtr& start, const TreeAutomaton& a,
                                         const CombinatorRule& rule, int steps);

struct CorpusRow {
    std::string name;
    bool skipped = false;
    std::string error;  // non-empty when this row failed
    SearchOutcome outcome;
};

struct CorpusOptions {
    SearchOptions search;
    bool include_slow = false;  // also run the nine-state combinator
    bool keep_artifacts = false; // keep per-row instances and models
    int jobs = 1;
};

// One row per rule, failures recorded per row without stopping the run.
// Rules whose default ceiling exceeds available memory budgets (the
// nine-state search) are marked skipped unless include_slow is set.
std::vector<CorpusRow> run_corpus(const std::vector<CombinatorRule>& rules,
                                  const CorpusOptions& opts = {});

// JSON documents with stable keys: status, found_states, per_n (n,
// result, vars, clauses, encode_s, solve_s), counterexample, automaton.
std::string outcome_to_json(const CombinatorRule& rule, const SearchOutcome& outcome,
                            SearchMethod method);
std::string corpus_to_json(const std::vector<CorpusRow>& rows, SearchMethod method);

} // namespace nonterm

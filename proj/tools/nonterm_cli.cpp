// Command-line driver: disprove termination of a sole combinatory
// calculus, verify certificate automata, trace reductions, and run the
// built-in combinator corpus.
#include <cctype>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nonterm/automaton.hpp"
#include "nonterm/errors.hpp"
#include "nonterm/search.hpp"
#include "nonterm/solver.hpp"
#include "nonterm/term.hpp"
#include "nonterm/verify.hpp"

using namespace nonterm;

namespace {

// Exit conventions: 0 success/Disproved, 1 ExhaustedUnsat or failed
// verification, 2 Timeout, 64 bad input, 69 missing external program,
// 70 internal fault.
constexpr int kExitUsage = 64;
constexpr int kExitSpawn = 69;
constexpr int kExitInternal = 70;

SolverCommand split_command(const std::string& text) {
    std::istringstream in(text);
    SolverCommand cmd;
    std::string tok;
    while (in >> tok) {
        if (cmd.executable.empty())
            cmd.executable = tok;
        else
            cmd.args.push_back(tok);
    }
    if (cmd.executable.empty()) throw InvalidInput("empty solver command");
    return cmd;
}

// Flags shared by disprove and corpus, collected into SearchOptions.
struct SearchFlags {
    std::string method = "tdas";
    int max_states = 0;
    double per_n_timeout = 0.0;
    double timeout = 0.0;
    std::string solver;
    bool builtin_solver = false;
    std::string emit_cnf;

    void attach(CLI::App* cmd, bool allow_both) {
        std::vector<std::string> methods{"tdas", "ez", "tda-baseline"};
        if (allow_both) methods.push_back("both");
        cmd->add_option("--method", method, "Encoding to search with")
            ->check(CLI::IsMember(methods))
            ->capture_default_str();
        cmd->add_option("--max-states", max_states,
                        "Largest automaton size to try (default: per-combinator)");
        cmd->add_option("--per-n-timeout", per_n_timeout,
                        "Wall-clock limit in seconds per automaton size");
        cmd->add_option("--timeout", timeout, "Wall-clock limit in seconds for the whole search");
        cmd->add_option("--solver", solver,
                        "External SAT solver command (overrides NONTERM_SAT_SOLVER)");
        cmd->add_flag("--builtin-solver", builtin_solver,
                      "Use the built-in CDCL solver even when an external one is available");
        cmd->add_option("--emit-cnf", emit_cnf,
                        "Write <prefix>-<name>-<n>.cnf and .map for every attempted size");
    }

    SearchMethod resolved_method() const {
        return method == "tdas" ? SearchMethod::Tdas : SearchMethod::TdaBaseline;
    }

    SearchOptions to_options() const {
        SearchOptions opts;
        opts.method = resolved_method();
        opts.max_states = max_states;
        opts.per_state_timeout = per_n_timeout;
        opts.total_timeout = timeout;
        if (builtin_solver)
            opts.solver.reset();
        else if (!solver.empty())
            opts.solver = split_command(solver);
        else
            opts.solver = discover_solver();
        opts.emit_cnf_prefix = emit_cnf;
        return opts;
    }
};

void print_step_log(const std::vector<SearchStep>& log) {
    for (const SearchStep& s : log) {
        std::printf("  n=%d: %s, %lld vars, %lld clauses, encode %.2fs, solve %.2fs\n",
                    s.states, to_string(s.result), s.variables, s.clauses, s.encode_seconds,
                    s.solve_seconds);
    }
}

int cmd_disprove(const std::string& rule_text, const SearchFlags& flags, bool json) {
    CombinatorRule rule = resolve_rule(rule_text);
    SearchOutcome out = disprove(rule, flags.to_options());
    if (json) {
        std::cout << outcome_to_json(rule, out, flags.resolved_method()) << "\n";
    } else {
        std::string shown = print_term(rule.lhs, rule) + " -> " + print_term(rule.rhs, rule);
        std::printf("%s (%s, method %s)\n", rule.name.c_str(), shown.c_str(),
                    to_string(flags.resolved_method()));
        print_step_log(out.per_state_log);
        switch (out.status) {
            case SearchStatus::Disproved:
                std::printf("status: Disproved with %d states\n", *out.found_states);
                std::printf("verification:\n%s", out.verification.summary().c_str());
                std::printf("automaton:\n%s", serialize_automaton(*out.automaton).c_str());
                std::printf("counterexample: %s\n",
                            print_term(*out.counterexample, rule).c_str());
                break;
            case SearchStatus::ExhaustedUnsat:
                std::printf("status: ExhaustedUnsat (no certificate in the tried range)\n");
                break;
            case SearchStatus::Timeout:
                std::printf("status: Timeout (%s)\n", out.detail.c_str());
                break;
        }
    }
    switch (out.status) {
        case SearchStatus::Disproved: return 0;
        case SearchStatus::ExhaustedUnsat: return 1;
        default: return 2;
    }
}

int cmd_verify(const std::string& path, const std::string& rule_text, bool tda) {
    CombinatorRule rule = resolve_rule(rule_text);
    TreeAutomaton a = parse_automaton_file(path);
    VerificationReport report = tda ? verify_tda(a, rule) : verify_tdas(a, rule);
    std::cout << report.summary();
    std::printf("verification %s\n", report.passed() ? "passed" : "failed");
    return report.passed() ? 0 : 1;
}

// Leading identifier of a term, used to pick the builtin rule when the
// reduce subcommand is given no rule text.
CombinatorRule rule_for_term(const std::string& term_text) {
    std::size_t i = 0;
    while (i < term_text.size() && (std::isspace((unsigned char)term_text[i]) || term_text[i] == '('))
        ++i;
    std::size_t j = i;
    while (j < term_text.size() && (std::isalnum((unsigned char)term_text[j]) || term_text[j] == '_'))
        ++j;
    std::string head = term_text.substr(i, j - i);
    if (const CombinatorRule* rule = find_builtin_rule(head)) return *rule;
    throw UnknownSymbol("no built-in rule for '" + head + "'; pass the rule text as a second argument");
}

int cmd_reduce(const std::string& term_text, const std::string& rule_text, int steps,
               bool innermost) {
    CombinatorRule rule = rule_text.empty() ? rule_for_term(term_text) : resolve_rule(rule_text);
    TermPtr t = parse_term(term_text, rule);
    std::printf("%s\n", print_term(t, rule).c_str());
    int done = 0;
    while (done < steps) {
        if (is_normal_form(t, rule)) break;
        std::vector<TermPtr> next =
            innermost ? innermost_successors(t, rule) : rewrite_successors(t, rule);
        if (next.empty()) break;
        t = next.front();  // successors come in leftmost order
        std::printf("-> %s\n", print_term(t, rule).c_str());
        ++done;
    }
    if (is_normal_form(t, rule))
        std::printf("normal form after %d step%s\n", done, done == 1 ? "" : "s");
    else
        std::printf("stopped after %d step%s; not a normal form\n", done, done == 1 ? "" : "s");
    return 0;
}

void print_corpus_table(const std::vector<CorpusRow>& rows, SearchMethod method) {
    std::printf("method: %s\n", to_string(method));
    std::printf("%-6s %6s %9s %10s %9s %9s %9s  %s\n", "name", "states", "vars", "clauses",
                "encode_s", "solve_s", "total_s", "status");
    for (const CorpusRow& row : rows) {
        if (row.skipped) {
            std::printf("%-6s %6s %9s %10s %9s %9s %9s  Skipped (%s)\n", row.name.c_str(), "-",
                        "-", "-", "-", "-", "-", row.error.c_str());
            continue;
        }
        if (!row.error.empty()) {
            std::printf("%-6s %6s %9s %10s %9s %9s %9s  Error (%s)\n", row.name.c_str(), "-",
                        "-", "-", "-", "-", "-", row.error.c_str());
            continue;
        }
        const SearchOutcome& out = row.outcome;
        double encode = 0, solve = 0;
        for (const SearchStep& s : out.per_state_log) {
            encode += s.encode_seconds;
            solve += s.solve_seconds;
        }
        long long vars = 0, clauses = 0;
        if (!out.per_state_log.empty()) {
            vars = out.per_state_log.back().variables;
            clauses = out.per_state_log.back().clauses;
        }
        std::string states = out.found_states ? std::to_string(*out.found_states) : "-";
        std::printf("%-6s %6s %9lld %10lld %9.2f %9.2f %9.2f  %s\n", row.name.c_str(),
                    states.c_str(), vars, clauses, encode, solve, encode + solve,
                    to_string(out.status));
    }
}

int cmd_corpus(const SearchFlags& flags, bool include_slow, int jobs, bool json) {
    CorpusOptions opts;
    opts.include_slow = include_slow;
    opts.jobs = jobs;

    std::vector<SearchMethod> methods;
    if (flags.method == "both")
        methods = {SearchMethod::Tdas, SearchMethod::TdaBaseline};
    else
        methods = {flags.resolved_method()};

    bool all_ok = true;
    std::string json_out;
    for (SearchMethod m : methods) {
        SearchFlags per = flags;
        per.method = m == SearchMethod::Tdas ? "tdas" : "tda-baseline";
        opts.search = per.to_options();
        std::vector<CorpusRow> rows = run_corpus(builtin_rules(), opts);
        for (const CorpusRow& row : rows)
            if (!row.error.empty() && !row.skipped) all_ok = false;
        if (json) {
            if (!json_out.empty()) json_out += ",\n";
            json_out += corpus_to_json(rows, m);
        } else {
            if (m != methods.front()) std::printf("\n");
            print_corpus_table(rows, m);
        }
    }
    if (json) {
        if (methods.size() > 1)
            std::cout << "[\n" << json_out << "\n]\n";
        else
            std::cout << json_out << "\n";
    }
    return all_ok ? 0 : kExitInternal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disprove termination of sole combinatory calculi with tree automata"};
    app.require_subcommand(1);

    // disprove
    std::string rule_text;
    SearchFlags disprove_flags;
    bool disprove_json = false;
    CLI::App* disprove_cmd =
        app.add_subcommand("disprove", "Search for a certificate automaton for one rule");
    disprove_cmd->add_option("rule", rule_text, "Combinator name (e.g. P3) or full rule text")
        ->required();
    disprove_flags.attach(disprove_cmd, false);
    disprove_cmd->add_flag("--json", disprove_json, "Emit a JSON report instead of text");

    // verify
    std::string automaton_path, verify_rule;
    bool verify_tda_flag = false;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Check a certificate automaton file against a rule");
    verify_cmd->add_option("automaton", automaton_path, "Automaton file")->required();
    verify_cmd->add_option("rule", verify_rule, "Combinator name or full rule text")->required();
    verify_cmd->add_flag("--tda", verify_tda_flag,
                         "Check the general certificate form instead of the sink form");

    // reduce
    std::string reduce_term, reduce_rule;
    int reduce_steps = 10;
    bool reduce_innermost = true;
    CLI::App* reduce_cmd = app.add_subcommand("reduce", "Print a reduction trace for a term");
    reduce_cmd->add_option("term", reduce_term, "Term to rewrite")->required();
    reduce_cmd->add_option("rule", reduce_rule,
                           "Combinator name or full rule text (default: from the term's head)");
    reduce_cmd->add_option("--steps", reduce_steps, "Maximum number of steps to print")
        ->capture_default_str();
    reduce_cmd->add_flag("--innermost,!--general", reduce_innermost,
                         "Contract a leftmost-innermost redex each step (default)");

    // corpus
    SearchFlags corpus_flags;
    bool include_slow = false, corpus_json = false;
    int jobs = 1;
    CLI::App* corpus_cmd =
        app.add_subcommand("corpus", "Run the search over the built-in combinators");
    corpus_flags.attach(corpus_cmd, true);
    corpus_cmd->add_flag("--include-slow", include_slow,
                         "Also run the nine-state combinator (long runtime)");
    corpus_cmd->add_option("--jobs", jobs, "Concurrent combinators")->check(CLI::Range(1, 64));
    corpus_cmd->add_flag("--json", corpus_json, "Emit a JSON report instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (disprove_cmd->parsed()) return cmd_disprove(rule_text, disprove_flags, disprove_json);
        if (verify_cmd->parsed()) return cmd_verify(automaton_path, verify_rule, verify_tda_flag);
        if (reduce_cmd->parsed())
            return cmd_reduce(reduce_term, reduce_rule, reduce_steps, reduce_innermost);
        if (corpus_cmd->parsed()) return cmd_corpus(corpus_flags, include_slow, jobs, corpus_json);
    } catch (const SpawnError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSpawn;
    } catch (const ModelInconsistent& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    } catch (const InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}

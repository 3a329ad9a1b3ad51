// Python surface: string-based wrappers over the rewriting, automaton,
// verification, and search operations.  Rules are passed as builtin
// names or full rule text, terms and automata as their text formats.
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nonterm/automaton.hpp"
#include "nonterm/encode.hpp"
#include "nonterm/errors.hpp"
#include "nonterm/search.hpp"
#include "nonterm/solver.hpp"
#include "nonterm/term.hpp"
#include "nonterm/verify.hpp"

namespace py = pybind11;
using namespace nonterm;

namespace {

SearchMethod method_from(const std::string& name) {
    if (name == "tdas") return SearchMethod::Tdas;
    if (name == "ez" || name == "tda-baseline") return SearchMethod::TdaBaseline;
    throw InvalidInput("unknown method '" + name + "' (use tdas, ez, or tda-baseline)");
}

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

py::dict report_dict(const VerificationReport& report) {
    py::dict d;
    d["passed"] = report.passed();
    py::list conditions;
    for (const ConditionResult& c : report.conditions) {
        py::dict row;
        row["name"] = c.name;
        row["passed"] = c.passed;
        row["detail"] = c.detail;
        conditions.append(row);
    }
    d["conditions"] = conditions;
    return d;
}

py::object parse_json(const std::string& text) {
    return py::module_::import("json").attr("loads")(text);
}

} // namespace

PYBIND11_MODULE(nonterm, m) {
    m.doc() = "Disprove termination of sole combinatory calculi with tree automata";

    m.def("builtin_rule_names", [] {
        std::vector<std::string> names;
        for (const CombinatorRule& rule : builtin_rules()) names.push_back(rule.name);
        return names;
    });

    m.def("rule_arity", [](const std::string& rule) { return resolve_rule(rule).arity; },
          py::arg("rule"));

    m.def(
        "rule_text",
        [](const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            return print_term(r.lhs, r) + " -> " + print_term(r.rhs, r);
        },
        py::arg("rule"));

    m.def(
        "normalize_term",
        [](const std::string& term, const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            return print_term(parse_term(term, r), r);
        },
        py::arg("term"), py::arg("rule"), "Parse a term and print it back canonically");

    m.def(
        "is_normal_form",
        [](const std::string& term, const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            return is_normal_form(parse_term(term, r), r);
        },
        py::arg("term"), py::arg("rule"));

    m.def(
        "ldepth",
        [](const std::string& term, const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            return ldepth(parse_term(term, r));
        },
        py::arg("term"), py::arg("rule"));

    m.def(
        "innermost_successors",
        [](const std::string& term, const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            std::vector<std::string> out;
            for (const TermPtr& s : innermost_successors(parse_term(term, r), r))
                out.push_back(print_term(s, r));
            return out;
        },
        py::arg("term"), py::arg("rule"));

    m.def(
        "reduce_trace",
        [](const std::string& term, const std::string& rule, int steps, bool innermost) {
            CombinatorRule r = resolve_rule(rule);
            TermPtr t = parse_term(term, r);
            std::vector<std::string> trace{print_term(t, r)};
            for (int i = 0; i < steps && !is_normal_form(t, r); ++i) {
                std::vector<TermPtr> next =
                    innermost ? innermost_successors(t, r) : rewrite_successors(t, r);
                if (next.empty()) break;
                t = next.front();
                trace.push_back(print_term(t, r));
            }
            return trace;
        },
        py::arg("term"), py::arg("rule"), py::arg("steps") = 10, py::arg("innermost") = true,
        "Leftmost reduction trace: the start term followed by up to `steps` successors");

    m.def(
        "accepts",
        [](const std::string& automaton, const std::string& term, const std::string& rule) {
            CombinatorRule r = resolve_rule(rule);
            return accepts(parse_automaton(automaton), parse_term(term, r));
        },
        py::arg("automaton"), py::arg("term"), py::arg("rule"));

    m.def(
        "smallest_accepted_term",
        [](const std::string& automaton, const std::string& rule) -> py::object {
            CombinatorRule r = resolve_rule(rule);
            std::optional<TermPtr> t = smallest_accepted_term(parse_automaton(automaton), r);
            if (!t) return py::none();
            return py::str(print_term(*t, r));
        },
        py::arg("automaton"), py::arg("rule"));

    m.def(
        "verify",
        [](const std::string& automaton, const std::string& rule, bool tda) {
            CombinatorRule r = resolve_rule(rule);
            TreeAutomaton a = parse_automaton(automaton);
            return report_dict(tda ? verify_tda(a, r) : verify_tdas(a, r));
        },
        py::arg("automaton"), py::arg("rule"), py::arg("tda") = false,
        "Check a certificate automaton; tda=True checks the general form");

    m.def(
        "verify_file",
        [](const std::string& path, const std::string& rule, bool tda) {
            CombinatorRule r = resolve_rule(rule);
            TreeAutomaton a = parse_automaton_file(path);
            return report_dict(tda ? verify_tda(a, r) : verify_tdas(a, r));
        },
        py::arg("path"), py::arg("rule"), py::arg("tda") = false);

    m.def(
        "encoding_stats",
        [](const std::string& rule, int states, const std::string& method) {
            CombinatorRule r = resolve_rule(rule);
            CnfInstance inst = method_from(method) == SearchMethod::Tdas
                                   ? encode_tdas(r, states)
                                   : encode_tda_baseline(r, states);
            CnfStats stats = cnf_stats(inst);
            py::dict d;
            d["vars"] = stats.variables;
            d["clauses"] = stats.clauses;
            d["eval_vars"] = inst.eval_variable_count;
            return d;
        },
        py::arg("rule"), py::arg("states"), py::arg("method") = "tdas");

    m.def(
        "disprove",
        [](const std::string& rule, const std::string& method, int max_states, double timeout,
           double per_n_timeout, const std::string& solver, bool builtin_solver) {
            CombinatorRule r = resolve_rule(rule);
            SearchOptions opts;
            opts.method = method_from(method);
            opts.max_states = max_states;
            opts.total_timeout = timeout;
            opts.per_state_timeout = per_n_timeout;
            if (!solver.empty())
                opts.solver = split_command(solver);
            else if (!builtin_solver)
                opts.solver = discover_solver();
            SearchOutcome out;
            {
                py::gil_scoped_release release;
                out = disprove(r, opts);
            }
            return parse_json(outcome_to_json(r, out, opts.method));
        },
        py::arg("rule"), py::arg("method") = "tdas", py::arg("max_states") = 0,
        py::arg("timeout") = 0.0, py::arg("per_n_timeout") = 0.0, py::arg("solver") = "",
        py::arg("builtin_solver") = true,
        "Run the disproof search; returns the report as a dict");

    m.def(
        "validate_counterexample",
        [](const std::string& term, const std::string& automaton, const std::string& rule,
           int steps) {
            CombinatorRule r = resolve_rule(rule);
            ValidationReport rep =
                validate_counterexample(parse_term(term, r), parse_automaton(automaton), r, steps);
            py::dict d;
            d["terms_checked"] = rep.terms_checked;
            d["depth_reached"] = rep.depth_reached;
            return d;
        },
        py::arg("term"), py::arg("automaton"), py::arg("rule"), py::arg("steps") = 50);
}

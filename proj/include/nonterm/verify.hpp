#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nonterm/automaton.hpp"
#include "nonterm/term.hpp"

namespace nonterm {

struct ConditionResult {
    std::string name;
    bool passed = false;
    std::string detail;  // witness or explanation on failure, empty otherwise
};

struct VerificationReport {
    std::vector<ConditionResult> conditions;

    bool passed() const;
    const ConditionResult* find(const std::string& name) const;
    std::string summary() const;  // one line per condition
};

// Failed closure instance: target state plus the state assigned to each
// rule variable (entry k-1 is the state substituted for x_{k}).
struct ClosureWitness {
    int q = 0;
    std::vector<int> var_states;
    std::string to_string() const;
};

// Smallest normal form accepted by the automaton, or nullopt when
// L(A) contains no normal form.  Exact, via the product of the automaton
// with the left-depth automaton capped at the rule's arity.
std::optional<TermPtr> nf_intersection_witness(const TreeAutomaton& a,
                                               const CombinatorRule& rule);

enum class ClosureVariant {
    InnermostSink,   // assignments avoiding q_F; escape to q_F
    EscapeToFinal,   // all assignments; escape to any final state
    Strict,          // all assignments; no escape
};

// Checks, for every state assignment alpha to the rule variables and every
// state q: lhs under alpha runs to q implies rhs under alpha runs to q (or
// to an escape state, depending on the variant).  Returns the first
// violation found, or nullopt if closed.  Assignments that map a variable
// to q_F are vacuous for InnermostSink: arguments of an innermost redex
// are normal forms, and no normal form reaches q_F once the nf-emptiness
// condition holds.
std::optional<ClosureWitness> closure_check(const TreeAutomaton& a,
                                            const CombinatorRule& rule,
                                            ClosureVariant variant);

// Certificate check for the sink form: unique final sink state, all
// states reachable, no normal form accepted, innermost closure.
VerificationReport verify_tdas(const TreeAutomaton& a, const CombinatorRule& rule);

// Certificate check for the general form: some reachable final state, no
// normal form accepted, closure with escape to a final state.
VerificationReport verify_tda(const TreeAutomaton& a, const CombinatorRule& rule);

// Exact decision of L(a, qa) being a subset of L(b, pb), via the subset
// construction on b.  Throws SizeLimit past 4096 distinct subsets.
bool language_inclusion(const TreeAutomaton& a, int qa,
                        const TreeAutomaton& b, int pb);

// Collapses a verified general certificate into a sink certificate with
// at most as many states: picks the lowest final state f, saturates it
// into a sink, drops every state whose language is absorbed by f, and
// re-verifies the result.  Throws InvalidInput when the input fails its
// precondition, SizeLimit past 12 states, InternalError if the rebuilt
// automaton does not verify.
TreeAutomaton tda_to_tdas(const TreeAutomaton& a0, const CombinatorRule& rule);

} // namespace nonterm

#pragma once

#include <string>
#include <vector>

#include "nonterm/automaton.hpp"
#include "nonterm/cnf.hpp"
#include "nonterm/term.hpp"

namespace nonterm {

// Deterministic mapping from encoding variables to CNF indices.  Blocks
// are laid out in a fixed order so equal inputs produce byte-identical
// instances:
//   transition-leaf | transition-app | [minld, redex] or [nf-reach] | eval
// with Tseitin auxiliaries appended past base_variable_count().
//
// The sink layout (for the single-sink synthesis) fixes q_F as the last
// state N.  Its Eval substitutions range over 1..N-1 only, and MinLd(q,0)
// and Eval(Z,{},q) share the index of the leaf transition variable.  The
// baseline layout replaces minld/redex with normal-form reachability
// variables and lets substitutions range over all states.
class VariableLayout {
public:
    VariableLayout(const CombinatorRule& rule, int n, bool sink_method);

    int states() const { return n_; }
    bool sink_method() const { return sink_; }
    int substitution_range() const { return sink_ ? n_ - 1 : n_; }

    int trans_leaf(int q) const;
    int trans_app(int q1, int q2, int q) const;
    int minld(int q, int m) const;    // sink layout; q < N, m < arity; m==0 aliases trans_leaf
    int redex(int q) const;           // sink layout
    int nf_reach(int q, int d) const; // baseline layout; d < arity

    // Eval variable for pattern subterm `index` (position in the rule's
    // pattern_subterms) under a full substitution alpha: alpha[k-1] is the
    // state of variable x_k; only the subterm's own free variables are
    // read.  The combinator leaf aliases trans_leaf(q).
    int eval(int index, const std::vector<int>& alpha, int q) const;

    int base_variable_count() const { return base_count_; }
    long long eval_variable_count() const { return eval_count_; }

    const std::vector<TermPtr>& subterms() const { return rule_.pattern_subterms; }
    const CombinatorRule& rule() const { return rule_; }
    // Children of subterm `index` as subterm indices; {-1,-1} for leaves.
    std::pair<int, int> children(int index) const;
    const std::vector<int>& free_vars(int index) const { return vars_[index]; }

    // Human-readable meaning of a CNF index, for map sidecars and debug
    // output; indices past the base count are auxiliaries.
    std::string describe(int var) const;

private:
    CombinatorRule rule_;
    int n_ = 0;
    bool sink_ = false;
    int base_count_ = 0;
    long long eval_count_ = 0;
    int app_base_ = 0;
    int minld_base_ = 0;   // sink layout
    int redex_base_ = 0;   // sink layout
    int nf_base_ = 0;      // baseline layout
    std::vector<int> eval_base_;             // per subterm; -1 for the Z leaf
    std::vector<std::vector<int>> vars_;     // free variables per subterm
    std::vector<std::pair<int, int>> kids_;  // child subterm indices
};

// CNF asserting an N-state automaton with sink final state N that makes
// every accepted term loop under innermost rewriting: sink rules, the
// reachability order, a redex-only final language via minimal left
// depths, and closure with escape into the sink.
CnfInstance encode_tdas(const CombinatorRule& rule, int n);

// CNF for the plain variant: final state N, no sink, normal forms kept
// out of the final language through depth-bounded reachability
// variables, and closure with escape into the final state.
CnfInstance encode_tda_baseline(const CombinatorRule& rule, int n);

// Transition rules read off a satisfying assignment.  Fails with
// ModelInconsistent when the model is not total on the instance or
// violates one of its clauses.
TreeAutomaton decode_automaton(const CnfInstance& inst, const std::vector<bool>& model);

// Appends unit clauses forcing the transition variables to exactly the
// given automaton (it must have matching state count).  Used to check
// that known certificates satisfy the encoding.
void pin_transitions(CnfInstance& inst, const TreeAutomaton& a);

// Cross-checks a model's derived variables against oracles on the
// decoded automaton: minld values per state, substitution runs per
// pattern subterm, and emptiness of normal forms for redex-marked
// states.
struct AgreementReport {
    long long minld_mismatches = 0;
    long long eval_mismatches = 0;
    long long redex_failures = 0;
    bool passed() const {
        return minld_mismatches == 0 && eval_mismatches == 0 && redex_failures == 0;
    }
};
AgreementReport check_model_agreement(const CnfInstance& inst,
                                      const std::vector<bool>& model);

} // namespace nonterm

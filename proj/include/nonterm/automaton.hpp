#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nonterm/term.hpp"

namespace nonterm {

// A set of automaton states as a bit mask; bit q-1 stands for state q.
using StateSet = std::uint64_t;

constexpr int kMaxStates = 62;

inline StateSet state_bit(int q) { return StateSet(1) << (q - 1); }
inline bool set_contains(StateSet s, int q) { return (s >> (q - 1)) & 1; }
inline StateSet all_states(int n) { return (StateSet(1) << n) - 1; }

// Calls fn(q) for each state in the set, ascending.
template <typename Fn>
void for_each_state(StateSet s, Fn fn) {
    while (s) {
        int q = __builtin_ctzll(s) + 1;
        fn(q);
        s &= s - 1;
    }
}

// Bottom-up nondeterministic tree automaton over the sole-calculus
// alphabet {Z/0, A/2}.  States are 1..state_count; rule sets are bit
// masks, so they are duplicate-free by construction.
struct TreeAutomaton {
    int state_count = 0;
    StateSet final_states = 0;
    StateSet leaf_targets = 0;             // targets of Z -> q
    std::vector<StateSet> app_targets;     // [(q1-1)*N + (q2-1)] -> targets of A(q1,q2)

    TreeAutomaton() = default;
    explicit TreeAutomaton(int n)
        : state_count(n), app_targets(static_cast<std::size_t>(n) * n, 0) {}

    StateSet app(int q1, int q2) const {
        return app_targets[static_cast<std::size_t>(q1 - 1) * state_count + (q2 - 1)];
    }
    StateSet& app(int q1, int q2) {
        return app_targets[static_cast<std::size_t>(q1 - 1) * state_count + (q2 - 1)];
    }

    bool operator==(const TreeAutomaton&) const = default;
};

// Line-oriented text format:
//   states N
//   final q[,q...]
//   sink q            (adds every rule A(q1,q2) -> q with q in {q1,q2})
//   Z -> q[|q...]
//   A(q1,q2) -> q[|q...]
// '#' starts a comment.  serialize_automaton emits a canonical form:
// rules sorted, and a sink directive replacing the rules it implies.
TreeAutomaton parse_automaton(const std::string& text);
TreeAutomaton parse_automaton_file(const std::string& path);
std::string serialize_automaton(const TreeAutomaton& a);

// The set of states the ground term can reach bottom-up.
StateSet run(const TreeAutomaton& a, const TermPtr& t);
bool accepts(const TreeAutomaton& a, const TermPtr& t);

// run for open terms: variable x_k evaluates to exactly var_state[k-1].
// Used to decide rewrite closure without materializing state constants.
StateSet run_with_states(const TreeAutomaton& a, const TermPtr& t,
                         const std::vector<int>& var_state);

// States reachable by at least one ground term (least fixpoint).
StateSet reachable_states(const TreeAutomaton& a);

// True when every application rule with q on either side goes to q and
// nowhere else.  At most one state of an automaton can satisfy this.
bool is_sink(const TreeAutomaton& a, int q);

constexpr int kUnboundedDepth = std::numeric_limits<int>::max();

// Minimum left depth over the terms reaching each state ([q-1] entry);
// kUnboundedDepth for states no term reaches.
std::vector<int> minld(const TreeAutomaton& a);

// A term witnessing minld: reaches state q and has ldepth == minld(q).
std::optional<TermPtr> minld_witness(const TreeAutomaton& a, int q);

// Smallest accepted term: minimal leaf count, ties broken by the printed
// form.  Empty when no final state is reachable.
std::optional<TermPtr> smallest_accepted_term(const TreeAutomaton& a,
                                              const CombinatorRule& rule);

// Deterministic automaton on capped left depth.  States 0..cap-1; Z -> 0,
// A(d1,d2) -> d1+1 when d1+1 < cap, otherwise undefined.  It accepts (in
// any state) exactly the normal forms of a rule with arity == cap.
struct DepthAutomaton {
    int cap = 0;
    explicit DepthAutomaton(int c) : cap(c) {}
    // State reached, or nullopt when some subterm hits the cap.
    std::optional<int> run(const TermPtr& t) const;
};

} // namespace nonterm

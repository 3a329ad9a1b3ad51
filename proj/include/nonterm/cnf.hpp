#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nonterm/term.hpp"

namespace nonterm {

// A propositional CNF instance in DIMACS conventions: variables are
// 1..variable_count, a literal is +v or -v.  Clauses are stored as one
// flat literal array (instances reach hundreds of millions of literals,
// so per-clause allocations are out).  The rule, method, and state count
// pin down the variable layout, which makes a stored model decodable
// without extra context.
struct CnfInstance {
    CombinatorRule rule;
    std::string method;  // "tdas" or "tda-baseline"
    int state_count = 0;
    int variable_count = 0;
    // Eval variables by the counting formula, shared leaf indices
    // included; used for method comparisons.
    long long eval_variable_count = 0;

    std::vector<int> literals;
    std::vector<std::size_t> clause_offsets = {0};

    std::size_t clause_count() const { return clause_offsets.size() - 1; }
    std::span<const int> clause(std::size_t i) const {
        return {literals.data() + clause_offsets[i],
                literals.data() + clause_offsets[i + 1]};
    }
    void add_clause(std::span<const int> lits) {
        literals.insert(literals.end(), lits.begin(), lits.end());
        clause_offsets.push_back(literals.size());
    }
    void add_clause(std::initializer_list<int> lits) {
        add_clause(std::span<const int>(lits.begin(), lits.size()));
    }
    void add_unit(int lit) { add_clause({lit}); }
};

struct CnfStats {
    long long variables = 0;
    long long clauses = 0;
};

CnfStats cnf_stats(const CnfInstance& inst);

// True when the assignment makes every clause true.  The model vector is
// 1-indexed: model[v] is the value of variable v, and model.size() must
// be at least variable_count + 1.
bool model_satisfies(const CnfInstance& inst, const std::vector<bool>& model);

} // namespace nonterm

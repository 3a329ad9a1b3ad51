#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nonterm/errors.hpp"

namespace nonterm {

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable binary tree over one nullary combinator and numbered variables.
// A leaf with var == 0 is the combinator; var == k > 0 is the variable x_k.
// Structural measures are cached at construction, so left-depth and
// normal-form queries are O(1) per node.
class Term {
public:
    static TermPtr leaf(int var = 0);
    static TermPtr app(TermPtr fun, TermPtr arg);

    bool is_leaf() const { return !left_; }
    bool is_app() const { return static_cast<bool>(left_); }
    bool is_combinator_leaf() const { return is_leaf() && var_ == 0; }
    bool is_variable() const { return is_leaf() && var_ > 0; }
    int variable_index() const { return var_; }

    const TermPtr& fun() const { return left_; }   // application only
    const TermPtr& arg() const { return right_; }  // application only

    // Length of the left spine: 0 for leaves, 1 + ldepth(fun) otherwise.
    int ldepth() const { return ldepth_; }
    // Maximum ldepth over all subterms; a term is a normal form for a rule
    // of arity n exactly when this is < n.
    int max_subterm_ldepth() const { return max_sub_ldepth_; }
    int leaf_count() const { return leaf_count_; }
    bool ground() const { return ground_; }
    std::uint64_t hash() const { return hash_; }

private:
    Term() = default;

    TermPtr left_, right_;
    int var_ = 0;
    int ldepth_ = 0;
    int max_sub_ldepth_ = 0;
    int leaf_count_ = 1;
    bool ground_ = true;
    std::uint64_t hash_ = 0;
};

// Structural equality (hash-accelerated).
bool equal_terms(const TermPtr& a, const TermPtr& b);

struct TermHash {
    std::size_t operator()(const TermPtr& t) const {
        return static_cast<std::size_t>(t->hash());
    }
};
struct TermEq {
    bool operator()(const TermPtr& a, const TermPtr& b) const {
        return equal_terms(a, b);
    }
};

// A sole combinatory calculus: one combinator Z with a single rule
//   Z x1 ... xn -> rhs        (n >= 1)
// where lhs is the left spine A(..A(A(Z,x1),x2).., xn), every variable
// occurs exactly once in the lhs and at least once in the rhs, and the rhs
// contains no other symbols.  The arity n is also the left depth every
// redex has.
struct CombinatorRule {
    std::string name;
    int arity = 0;
    TermPtr lhs;
    TermPtr rhs;

    // Distinct subterms of lhs then rhs, in first-occurrence preorder.
    // This is the pattern universe the synthesis encodings quantify over.
    std::vector<TermPtr> pattern_subterms;
};

// Free variables of an open term, ascending variable indices.
std::vector<int> free_variables(const TermPtr& t);

// Parse "NAME var1 var2 ... -> expr".  Variables are renamed x1..xn in
// lhs order; the rhs may use juxtaposition (left-associative) and
// parentheses.  Rejects erasing and non-left-linear rules.
CombinatorRule parse_rule(const std::string& text);

// Parse a ground term over the rule's combinator, e.g. "P P (P P)".
TermPtr parse_term(const std::string& text, const CombinatorRule& rule);

// Inverse of parse_term with minimal parentheses.  Variables print as x<k>.
std::string print_term(const TermPtr& t, const CombinatorRule& rule);

// Left depth of a ground term.
int ldepth(const TermPtr& t);

bool is_redex(const TermPtr& t, const CombinatorRule& rule);
bool is_normal_form(const TermPtr& t, const CombinatorRule& rule);

// All one-step reducts, contracting each redex position in preorder
// (root first, then function subtree, then argument subtree).
std::vector<TermPtr> rewrite_successors(const TermPtr& t, const CombinatorRule& rule);

// Reducts of innermost steps only: the contracted redex may not contain a
// reducible proper subterm.  Same position order as rewrite_successors.
std::vector<TermPtr> innermost_successors(const TermPtr& t, const CombinatorRule& rule);

// Registry of the standard benchmark combinators (P, P3, D1, D2, Phi,
// Phi2, S1, S2, S3, S4).
const std::vector<CombinatorRule>& builtin_rules();
const CombinatorRule* find_builtin_rule(const std::string& name);

// Accepts either a registered combinator name or a full rule string.
CombinatorRule resolve_rule(const std::string& name_or_rule);

} // namespace nonterm

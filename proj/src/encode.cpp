#include "nonterm/encode.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "nonterm/errors.hpp"
#include "nonterm/verify.hpp"

namespace nonterm {

VariableLayout::VariableLayout(const CombinatorRule& rule, int n, bool sink_method)
    : rule_(rule), n_(n), sink_(sink_method) {
    int m = rule_.arity;
    long long next = n;  // trans_leaf block is 1..n
    app_base_ = static_cast<int>(next);
    next += static_cast<long long>(n) * n * n;
    if (sink_) {
        minld_base_ = static_cast<int>(next);
        next += static_cast<long long>(n - 1) * (m - 1);
        redex_base_ = static_cast<int>(next);
        next += n;
    } else {
        nf_base_ = static_cast<int>(next);
        next += static_cast<long long>(n) * m;
    }

    int radix = substitution_range();
    const auto& subs = rule_.pattern_subterms;
    eval_base_.assign(subs.size(), -1);
    vars_.resize(subs.size());
    kids_.assign(subs.size(), {-1, -1});
    for (std::size_t i = 0; i < subs.size(); ++i) {
        vars_[i] = free_variables(subs[i]);
        if (subs[i]->is_app()) {
            for (std::size_t j = 0; j < subs.size(); ++j) {
                if (equal_terms(subs[j], subs[i]->fun())) kids_[i].first = static_cast<int>(j);
                if (equal_terms(subs[j], subs[i]->arg())) kids_[i].second = static_cast<int>(j);
            }
        }
        long long combos = 1;
        for (std::size_t k = 0; k < vars_[i].size(); ++k) combos *= radix;
        eval_count_ += combos * n;
        if (subs[i]->is_combinator_leaf()) continue;  // shares trans_leaf indices
        eval_base_[i] = static_cast<int>(next);
        next += combos * n;
        if (next > 2'000'000'000)
            throw SizeLimit("encoding needs more than 2e9 variables");
    }
    base_count_ = static_cast<int>(next);
}

int VariableLayout::trans_leaf(int q) const { return q; }

int VariableLayout::trans_app(int q1, int q2, int q) const {
    return app_base_ + ((q1 - 1) * n_ + (q2 - 1)) * n_ + q;
}

int VariableLayout::minld(int q, int m) const {
    if (m == 0) return trans_leaf(q);
    return minld_base_ + (q - 1) * (rule_.arity - 1) + m;
}

int VariableLayout::redex(int q) const { return redex_base_ + q; }

int VariableLayout::nf_reach(int q, int d) const {
    return nf_base_ + (q - 1) * rule_.arity + d + 1;
}

int VariableLayout::eval(int index, const std::vector<int>& alpha, int q) const {
    const TermPtr& t = rule_.pattern_subterms[index];
    if (t->is_combinator_leaf()) return trans_leaf(q);
    int radix = substitution_range();
    long long rank = 0;
    for (int v : vars_[index]) rank = rank * radix + (alpha[v - 1] - 1);
    return eval_base_[index] + static_cast<int>(rank) * n_ + q;
}

std::pair<int, int> VariableLayout::children(int index) const { return kids_[index]; }

std::string VariableLayout::describe(int var) const {
    if (var <= n_)
        return "TransLeaf(" + std::to_string(var) + ")";
    if (var <= app_base_ + n_ * n_ * n_) {
        int off = var - app_base_ - 1;
        int q = off % n_ + 1;
        int q2 = (off / n_) % n_ + 1;
        int q1 = off / (n_ * n_) + 1;
        return "TransApp(" + std::to_string(q1) + "," + std::to_string(q2) + "," +
               std::to_string(q) + ")";
    }
    int m = rule_.arity;
    if (sink_) {
        if (var <= minld_base_ + (n_ - 1) * (m - 1)) {
            int off = var - minld_base_ - 1;
            return "MinLd(" + std::to_string(off / (m - 1) + 1) + "," +
                   std::to_string(off % (m - 1) + 1) + ")";
        }
        if (var <= redex_base_ + n_)
            return "Redex(" + std::to_string(var - redex_base_) + ")";
    } else if (var <= nf_base_ + n_ * m) {
        int off = var - nf_base_ - 1;
        return "NfReach(" + std::to_string(off / m + 1) + "," + std::to_string(off % m) + ")";
    }
    if (var <= base_count_) {
        // Locate the eval block, then unrank the substitution.
        int radix = substitution_range();
        for (std::size_t i = 0; i < eval_base_.size(); ++i) {
            if (eval_base_[i] < 0) continue;
            long long combos = 1;
            for (std::size_t k = 0; k < vars_[i].size(); ++k) combos *= radix;
            if (var <= eval_base_[i] + combos * n_) {
                long long off = var - eval_base_[i] - 1;
                int q = static_cast<int>(off % n_) + 1;
                long long rank = off / n_;
                std::ostringstream sub;
                for (auto it = vars_[i].rbegin(); it != vars_[i].rend(); ++it) {
                    sub << (sub.tellp() > 0 ? "," : "") << "x" << *it << ":="
                        << (rank % radix + 1);
                    rank /= radix;
                }
                return "Eval(" + print_term(rule_.pattern_subterms[i], rule_) + ", {" +
                       sub.str() + "}, " + std::to_string(q) + ")";
            }
        }
    }
    return "Aux(" + std::to_string(var - base_count_) + ")";
}

namespace {

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) {
            h ^= static_cast<std::uint32_t>(x);
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Clause emission with hash-consed Tseitin gates.  Every gate gets both
// implication directions so models stay checkable clause by clause.
class CnfBuilder {
public:
    CnfBuilder(CnfInstance& inst, int first_aux) : inst_(inst), next_(first_aux) {}

    int variable_count() const { return next_ - 1; }
    void clause(std::initializer_list<int> lits) { inst_.add_clause(lits); }
    void clause(const std::vector<int>& lits) { inst_.add_clause(lits); }
    void unit(int lit) { inst_.add_unit(lit); }

    int and_gate(std::vector<int> lits) { return gate(kAnd, std::move(lits)); }
    int or_gate(std::vector<int> lits) { return gate(kOr, std::move(lits)); }

    void define_and(int v, const std::vector<int>& lits) {
        if (lits.empty()) {
            unit(v);
            return;
        }
        std::vector<int> back{v};
        for (int l : lits) {
            clause({-v, l});
            back.push_back(-l);
        }
        clause(back);
    }

    void define_or(int v, const std::vector<int>& lits) {
        if (lits.empty()) {
            unit(-v);
            return;
        }
        std::vector<int> fwd{-v};
        for (int l : lits) {
            clause({v, -l});
            fwd.push_back(l);
        }
        clause(fwd);
    }

private:
    enum { kAnd = 1, kOr = 2 };

    int gate(int tag, std::vector<int>&& lits) {
        if (lits.size() == 1) return lits[0];
        std::sort(lits.begin(), lits.end());
        std::vector<int> key;
        key.reserve(lits.size() + 1);
        key.push_back(tag);
        key.insert(key.end(), lits.begin(), lits.end());
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        int g = next_++;
        if (tag == kAnd)
            define_and(g, lits);
        else
            define_or(g, lits);
        cache_.emplace(std::move(key), g);
        return g;
    }

    CnfInstance& inst_;
    int next_;
    std::unordered_map<std::vector<int>, int, VecHash> cache_;
};

int subterm_index(const CombinatorRule& rule, const TermPtr& t) {
    for (std::size_t i = 0; i < rule.pattern_subterms.size(); ++i)
        if (equal_terms(rule.pattern_subterms[i], t)) return static_cast<int>(i);
    throw InternalError("term missing from the pattern universe");
}

// Runs fn for every substitution of the given variables with states in
// 1..range, in ranking order (first variable most significant).  The
// alpha vector spans all rule variables; untouched entries stay 1.
template <typename Fn>
void for_each_substitution(const std::vector<int>& vars, int arity, int range, Fn fn) {
    std::vector<int> alpha(arity, 1);
    if (vars.empty()) {
        fn(alpha);
        return;
    }
    for (;;) {
        fn(alpha);
        int i = static_cast<int>(vars.size()) - 1;
        while (i >= 0 && alpha[vars[i] - 1] == range) alpha[vars[i] - 1] = 1, --i;
        if (i < 0) break;
        ++alpha[vars[i] - 1];
    }
}

void emit_reachability(CnfBuilder& b, const VariableLayout& L) {
    // Lowest state runs the leaf; every other state is entered from
    // strictly lower ones, which orders the states by first use.
    for (int q = 1; q <= L.states(); ++q) {
        std::vector<int> c{L.trans_leaf(q)};
        for (int q1 = 1; q1 < q; ++q1)
            for (int q2 = 1; q2 < q; ++q2) c.push_back(L.trans_app(q1, q2, q));
        b.clause(c);
    }
}

void emit_leaf_units(CnfBuilder& b, const VariableLayout& L) {
    int n = L.states();
    int range = L.substitution_range();
    int arity = L.rule().arity;
    std::vector<int> alpha(arity, 1);
    for (std::size_t i = 0; i < L.subterms().size(); ++i) {
        const TermPtr& t = L.subterms()[i];
        if (!t->is_variable()) continue;
        int x = t->variable_index();
        for (int qa = 1; qa <= range; ++qa) {
            alpha[x - 1] = qa;
            b.unit(L.eval(static_cast<int>(i), alpha, qa));
        }
        for (int qa = 1; qa <= range; ++qa) {
            alpha[x - 1] = qa;
            for (int q = 1; q <= n; ++q)
                if (q != qa) b.unit(-L.eval(static_cast<int>(i), alpha, q));
        }
        alpha[x - 1] = 1;
    }
}

void emit_eval_definitions(CnfBuilder& b, const VariableLayout& L) {
    int n = L.states();
    int range = L.substitution_range();
    const auto& subs = L.subterms();
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->is_app()) continue;
        auto [i1, i2] = L.children(static_cast<int>(i));
        for_each_substitution(L.free_vars(static_cast<int>(i)), L.rule().arity, range,
                              [&](const std::vector<int>& alpha) {
            for (int q = 1; q <= n; ++q) {
                std::vector<int> disjuncts;
                disjuncts.reserve(static_cast<std::size_t>(n) * n);
                for (int q1 = 1; q1 <= n; ++q1)
                    for (int q2 = 1; q2 <= n; ++q2)
                        disjuncts.push_back(b.and_gate({L.eval(i1, alpha, q1),
                                                        L.eval(i2, alpha, q2),
                                                        L.trans_app(q1, q2, q)}));
                b.define_or(L.eval(static_cast<int>(i), alpha, q), disjuncts);
            }
        });
    }
}

void emit_closure(CnfBuilder& b, const VariableLayout& L, int escape_state) {
    const CombinatorRule& rule = L.rule();
    int lhs = subterm_index(rule, rule.lhs);
    int rhs = subterm_index(rule, rule.rhs);
    std::vector<int> all_vars(rule.arity);
    for (int k = 0; k < rule.arity; ++k) all_vars[k] = k + 1;
    for_each_substitution(all_vars, rule.arity, L.substitution_range(),
                          [&](const std::vector<int>& alpha) {
        for (int q = 1; q <= L.states(); ++q) {
            if (q == escape_state) {
                b.clause({-L.eval(lhs, alpha, q), L.eval(rhs, alpha, escape_state)});
                continue;
            }
            b.clause({-L.eval(lhs, alpha, q), L.eval(rhs, alpha, q),
                      L.eval(rhs, alpha, escape_state)});
        }
    });
}

} // namespace

CnfInstance encode_tdas(const CombinatorRule& rule, int n) {
    if (n < rule.arity + 1)
        throw InvalidInput("a certificate needs at least " +
                           std::to_string(rule.arity + 1) + " states for " + rule.name);
    CnfInstance inst;
    inst.rule = rule;
    inst.method = "tdas";
    inst.state_count = n;
    VariableLayout L(rule, n, true);
    inst.eval_variable_count = L.eval_variable_count();
    CnfBuilder b(inst, L.base_variable_count() + 1);
    int qf = n;
    int m = rule.arity;

    // The final state is a sink: every application touching it lands
    // back in it and nowhere else.
    for (int q1 = 1; q1 <= n; ++q1)
        for (int q2 = 1; q2 <= n; ++q2) {
            if (q1 != qf && q2 != qf) continue;
            b.unit(L.trans_app(q1, q2, qf));
            for (int q = 1; q <= n; ++q)
                if (q != qf) b.unit(-L.trans_app(q1, q2, q));
        }

    emit_reachability(b, L);

    // The final language must consist of reducible terms only.
    b.unit(L.redex(qf));

    // MinLd(q,m) means the shortest left spine among terms reaching q is
    // exactly m.  P1 rules out anything shorter, P2 witnesses length m.
    for (int q = 1; q < n; ++q)
        for (int d = 1; d < m; ++d) {
            std::vector<int> conj{-L.trans_leaf(q)};
            std::vector<int> p1;
            for (int k = 0; k < d - 1; ++k)
                for (int q1 = 1; q1 < n; ++q1)
                    for (int q2 = 1; q2 < n; ++q2)
                        p1.push_back(b.or_gate({-L.trans_app(q1, q2, q), -L.minld(q1, k)}));
            if (!p1.empty()) conj.push_back(b.and_gate(std::move(p1)));
            std::vector<int> p2;
            for (int q1 = 1; q1 < n; ++q1)
                for (int q2 = 1; q2 < n; ++q2)
                    p2.push_back(b.and_gate({L.trans_app(q1, q2, q), L.minld(q1, d - 1)}));
            conj.push_back(b.or_gate(std::move(p2)));
            b.define_and(L.minld(q, d), conj);
        }

    // Redex-marked states accept no leaf, and when a rule enters one
    // from two unmarked states the left child's spine is one short of a
    // redex, so the whole term is one.
    for (int q = 1; q <= n; ++q) b.clause({-L.redex(q), -L.trans_leaf(q)});
    for (int q = 1; q <= n; ++q)
        for (int q1 = 1; q1 < n; ++q1)
            for (int q2 = 1; q2 < n; ++q2) {
                if (q1 == q || q2 == q) continue;  // premise refutes itself
                b.clause({-L.redex(q), -L.trans_app(q1, q2, q), L.redex(q1), L.redex(q2),
                          L.minld(q1, m - 1)});
            }

    emit_leaf_units(b, L);
    emit_eval_definitions(b, L);
    emit_closure(b, L, qf);

    inst.variable_count = b.variable_count();
    return inst;
}

CnfInstance encode_tda_baseline(const CombinatorRule& rule, int n) {
    if (n < rule.arity + 1)
        throw InvalidInput("a certificate needs at least " +
                           std::to_string(rule.arity + 1) + " states for " + rule.name);
    CnfInstance inst;
    inst.rule = rule;
    inst.method = "tda-baseline";
    inst.state_count = n;
    VariableLayout L(rule, n, false);
    inst.eval_variable_count = L.eval_variable_count();
    CnfBuilder b(inst, L.base_variable_count() + 1);
    int m = rule.arity;

    emit_reachability(b, L);

    // NfReach(q,d) over-approximates "some normal form with left depth d
    // reaches q"; the final state must not reach any.
    for (int q = 1; q <= n; ++q) b.clause({-L.trans_leaf(q), L.nf_reach(q, 0)});
    for (int q1 = 1; q1 <= n; ++q1)
        for (int q2 = 1; q2 <= n; ++q2)
            for (int q = 1; q <= n; ++q)
                for (int d1 = 0; d1 + 1 < m; ++d1)
                    for (int d2 = 0; d2 < m; ++d2)
                        b.clause({-L.nf_reach(q1, d1), -L.nf_reach(q2, d2),
                                  -L.trans_app(q1, q2, q), L.nf_reach(q, d1 + 1)});
    for (int d = 0; d < m; ++d) b.unit(-L.nf_reach(n, d));

    emit_leaf_units(b, L);
    emit_eval_definitions(b, L);
    emit_closure(b, L, n);

    inst.variable_count = b.variable_count();
    return inst;
}

TreeAutomaton decode_automaton(const CnfInstance& inst, const std::vector<bool>& model) {
    if (model.size() < static_cast<std::size_t>(inst.variable_count) + 1)
        throw ModelInconsistent("assignment does not cover all variables");
    if (!model_satisfies(inst, model))
        throw ModelInconsistent("assignment violates a clause of the instance");
    VariableLayout L(inst.rule, inst.state_count, inst.method == "tdas");
    TreeAutomaton a(inst.state_count);
    a.final_states = state_bit(inst.state_count);
    for (int q = 1; q <= inst.state_count; ++q)
        if (model[L.trans_leaf(q)]) a.leaf_targets |= state_bit(q);
    for (int q1 = 1; q1 <= inst.state_count; ++q1)
        for (int q2 = 1; q2 <= inst.state_count; ++q2)
            for (int q = 1; q <= inst.state_count; ++q)
                if (model[L.trans_app(q1, q2, q)]) a.app(q1, q2) |= state_bit(q);
    return a;
}

void pin_transitions(CnfInstance& inst, const TreeAutomaton& a) {
    if (a.state_count != inst.state_count)
        throw InvalidInput("state count mismatch when pinning transitions");
    VariableLayout L(inst.rule, inst.state_count, inst.method == "tdas");
    for (int q = 1; q <= a.state_count; ++q)
        inst.add_unit(set_contains(a.leaf_targets, q) ? L.trans_leaf(q) : -L.trans_leaf(q));
    for (int q1 = 1; q1 <= a.state_count; ++q1)
        for (int q2 = 1; q2 <= a.state_count; ++q2)
            for (int q = 1; q <= a.state_count; ++q)
                inst.add_unit(set_contains(a.app(q1, q2), q) ? L.trans_app(q1, q2, q)
                                                             : -L.trans_app(q1, q2, q));
}

AgreementReport check_model_agreement(const CnfInstance& inst,
                                      const std::vector<bool>& model) {
    TreeAutomaton a = decode_automaton(inst, model);
    VariableLayout L(inst.rule, inst.state_count, inst.method == "tdas");
    AgreementReport rep;
    int n = inst.state_count;

    if (L.sink_method()) {
        std::vector<int> depths = minld(a);
        for (int q = 1; q < n; ++q)
            for (int m = 0; m < inst.rule.arity; ++m)
                if (model[L.minld(q, m)] != (depths[q - 1] == m)) ++rep.minld_mismatches;
        for (int q = 1; q <= n; ++q) {
            if (!model[L.redex(q)]) continue;
            TreeAutomaton probe = a;
            probe.final_states = state_bit(q);
            if (nf_intersection_witness(probe, inst.rule)) ++rep.redex_failures;
        }
    }

    for (std::size_t i = 0; i < L.subterms().size(); ++i) {
        if (L.subterms()[i]->is_combinator_leaf()) continue;
        for_each_substitution(L.free_vars(static_cast<int>(i)), inst.rule.arity,
                              L.substitution_range(), [&](const std::vector<int>& alpha) {
            StateSet reached = run_with_states(a, L.subterms()[i], alpha);
            for (int q = 1; q <= n; ++q) {
                bool want = set_contains(reached, q);
                if (model[L.eval(static_cast<int>(i), alpha, q)] != want)
                    ++rep.eval_mismatches;
            }
        });
    }
    return rep;
}

} // namespace nonterm

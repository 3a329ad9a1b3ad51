#include "nonterm/verify.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "nonterm/errors.hpp"

namespace nonterm {

bool VerificationReport::passed() const {
    for (const auto& c : conditions)
        if (!c.passed) return false;
    return true;
}

const ConditionResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerificationReport::summary() const {
    std::ostringstream out;
    for (const auto& c : conditions) {
        out << (c.passed ? "ok   " : "FAIL ") << c.name;
        if (!c.detail.empty()) out << ": " << c.detail;
        out << "\n";
    }
    return out.str();
}

std::string ClosureWitness::to_string() const {
    std::ostringstream out;
    out << "state " << q << " under [";
    for (std::size_t i = 0; i < var_states.size(); ++i) {
        if (i) out << ", ";
        out << "x" << (i + 1) << ":=" << var_states[i];
    }
    out << "]";
    return out.str();
}

std::optional<TermPtr> nf_intersection_witness(const TreeAutomaton& a,
                                               const CombinatorRule& rule) {
    int n = a.state_count;
    int cap = rule.arity;
    // Product state (q, d): some term with every subterm of left depth
    // below cap runs to q and itself has left depth d.  Tracks the
    // smallest such term per product state.
    auto id = [&](int q, int d) { return (q - 1) * cap + d; };
    std::vector<TermPtr> best(static_cast<std::size_t>(n) * cap);

    TermPtr z = Term::leaf();
    for_each_state(a.leaf_targets, [&](int q) { best[id(q, 0)] = z; });

    bool changed = true;
    while (changed) {
        changed = false;
        for (int q1 = 1; q1 <= n; ++q1) {
            for (int d1 = 0; d1 + 1 < cap; ++d1) {
                if (!best[id(q1, d1)]) continue;
                for (int q2 = 1; q2 <= n; ++q2) {
                    for (int d2 = 0; d2 < cap; ++d2) {
                        if (!best[id(q2, d2)]) continue;
                        int lc = best[id(q1, d1)]->leaf_count() +
                                 best[id(q2, d2)]->leaf_count();
                        for_each_state(a.app(q1, q2), [&](int q) {
                            TermPtr& slot = best[id(q, d1 + 1)];
                            if (!slot || lc < slot->leaf_count()) {
                                slot = Term::app(best[id(q1, d1)], best[id(q2, d2)]);
                                changed = true;
                            }
                        });
                    }
                }
            }
        }
    }

    TermPtr found;
    for_each_state(a.final_states, [&](int q) {
        for (int d = 0; d < cap; ++d) {
            const TermPtr& t = best[id(q, d)];
            if (t && (!found || t->leaf_count() < found->leaf_count())) found = t;
        }
    });
    if (!found) return std::nullopt;
    return found;
}

std::optional<ClosureWitness> closure_check(const TreeAutomaton& a,
                                            const CombinatorRule& rule,
                                            ClosureVariant variant) {
    int n = a.state_count;
    int arity = rule.arity;
    int sink_final = 0;
    if (variant == ClosureVariant::InnermostSink) {
        bool singleton = a.final_states && (a.final_states & (a.final_states - 1)) == 0;
        if (!singleton)
            throw InvalidInput("closure check needs a unique final state");
        sink_final = __builtin_ctzll(a.final_states) + 1;
        if (!is_sink(a, sink_final))
            throw InvalidInput("closure check needs the final state to be a sink");
    }
    StateSet escape = 0;
    switch (variant) {
        case ClosureVariant::InnermostSink: escape = state_bit(sink_final); break;
        case ClosureVariant::EscapeToFinal: escape = a.final_states; break;
        case ClosureVariant::Strict: escape = 0; break;
    }

    std::vector<int> alpha(arity, 1);
    for (;;) {
        bool vacuous = false;
        if (variant == ClosureVariant::InnermostSink)
            for (int v : alpha)
                if (v == sink_final) { vacuous = true; break; }
        if (!vacuous) {
            StateSet lhs = run_with_states(a, rule.lhs, alpha);
            if (lhs) {
                StateSet rhs = run_with_states(a, rule.rhs, alpha);
                if ((rhs & escape) == 0) {
                    StateSet missing = lhs & ~rhs;
                    if (missing)
                        return ClosureWitness{__builtin_ctzll(missing) + 1, alpha};
                }
            }
        }
        int i = 0;
        while (i < arity && alpha[i] == n) alpha[i++] = 1;
        if (i == arity) break;
        ++alpha[i];
    }
    return std::nullopt;
}

namespace {

std::string states_to_string(StateSet s) {
    std::ostringstream out;
    bool first = true;
    for_each_state(s, [&](int q) {
        if (!first) out << ",";
        out << q;
        first = false;
    });
    return out.str();
}

} // namespace

VerificationReport verify_tdas(const TreeAutomaton& a, const CombinatorRule& rule) {
    VerificationReport report;

    bool singleton = a.final_states && (a.final_states & (a.final_states - 1)) == 0;
    int f = singleton ? __builtin_ctzll(a.final_states) + 1 : 0;
    bool sink_ok = singleton && is_sink(a, f);
    {
        ConditionResult c{"final-sink", sink_ok, ""};
        if (!singleton)
            c.detail = "final states {" + states_to_string(a.final_states) + "} are not a singleton";
        else if (!sink_ok)
            c.detail = "final state " + std::to_string(f) + " is not a sink";
        report.conditions.push_back(std::move(c));
    }

    StateSet reach = reachable_states(a);
    StateSet missing = all_states(a.state_count) & ~reach;
    {
        ConditionResult c{"reachability", missing == 0, ""};
        if (missing) c.detail = "unreachable states {" + states_to_string(missing) + "}";
        report.conditions.push_back(std::move(c));
    }

    {
        auto witness = nf_intersection_witness(a, rule);
        ConditionResult c{"nf-empty", !witness.has_value(), ""};
        if (witness) c.detail = "accepts the normal form " + print_term(*witness, rule);
        report.conditions.push_back(std::move(c));
    }

    {
        ConditionResult c{"closure", false, ""};
        if (!sink_ok) {
            c.detail = "skipped: no unique sink final state";
        } else {
            auto witness = closure_check(a, rule, ClosureVariant::InnermostSink);
            c.passed = !witness.has_value();
            if (witness) c.detail = "violated at " + witness->to_string();
        }
        report.conditions.push_back(std::move(c));
    }

    return report;
}

VerificationReport verify_tda(const TreeAutomaton& a, const CombinatorRule& rule) {
    VerificationReport report;

    StateSet reach = reachable_states(a);
    {
        ConditionResult c{"final-reachable", (reach & a.final_states) != 0, ""};
        if (!c.passed) c.detail = "no final state is reachable";
        report.conditions.push_back(std::move(c));
    }

    {
        auto witness = nf_intersection_witness(a, rule);
        ConditionResult c{"nf-empty", !witness.has_value(), ""};
        if (witness) c.detail = "accepts the normal form " + print_term(*witness, rule);
        report.conditions.push_back(std::move(c));
    }

    {
        auto witness = closure_check(a, rule, ClosureVariant::EscapeToFinal);
        ConditionResult c{"closure", !witness.has_value(), ""};
        if (witness) c.detail = "violated at " + witness->to_string();
        report.conditions.push_back(std::move(c));
    }

    return report;
}

namespace {

constexpr int kMaxSubsets = 1 << 12;

// Reachable (state-of-a, subset-of-b) pairs, stopping early when a pair
// hits qa without pb.
bool inclusion_search(const TreeAutomaton& a, int qa,
                      const TreeAutomaton& b, int pb) {
    std::vector<StateSet> subsets;
    std::unordered_map<StateSet, int> subset_id;
    auto intern = [&](StateSet s) {
        auto it = subset_id.find(s);
        if (it != subset_id.end()) return it->second;
        if (static_cast<int>(subsets.size()) >= kMaxSubsets)
            throw SizeLimit("language inclusion exceeded " +
                            std::to_string(kMaxSubsets) + " subset states");
        subsets.push_back(s);
        subset_id.emplace(s, static_cast<int>(subsets.size()) - 1);
        return static_cast<int>(subsets.size()) - 1;
    };

    auto b_step = [&](StateSet s1, StateSet s2) {
        StateSet out = 0;
        for_each_state(s1, [&](int p1) {
            for_each_state(s2, [&](int p2) { out |= b.app(p1, p2); });
        });
        return out;
    };

    struct Pair {
        int q;
        int sid;
    };
    std::vector<Pair> seen;
    std::vector<char> seen_mask;  // [q-1][sid] flattened lazily
    auto mark = [&](int q, int sid) {
        std::size_t idx = static_cast<std::size_t>(q - 1) * kMaxSubsets + sid;
        if (seen_mask.size() <= idx) seen_mask.resize(static_cast<std::size_t>(a.state_count) * kMaxSubsets, 0);
        if (seen_mask[idx]) return false;
        seen_mask[idx] = 1;
        return true;
    };

    std::vector<Pair> work;
    auto add = [&](int q, StateSet s) {
        int sid = intern(s);
        if (!mark(q, sid)) return true;
        if (q == qa && !set_contains(s, pb)) return false;
        seen.push_back({q, sid});
        work.push_back({q, sid});
        return true;
    };

    bool included = true;
    StateSet b_leaf = b.leaf_targets;
    {
        bool ok = true;
        for_each_state(a.leaf_targets, [&](int q) {
            if (!add(q, b_leaf)) ok = false;
        });
        if (!ok) return false;
    }

    std::unordered_map<std::uint64_t, StateSet> step_memo;
    auto step = [&](int s1, int s2) {
        std::uint64_t key = (static_cast<std::uint64_t>(s1) << 32) | static_cast<std::uint32_t>(s2);
        auto it = step_memo.find(key);
        if (it != step_memo.end()) return it->second;
        StateSet out = b_step(subsets[s1], subsets[s2]);
        step_memo.emplace(key, out);
        return out;
    };

    while (!work.empty() && included) {
        Pair x = work.back();
        work.pop_back();
        std::size_t snapshot = seen.size();
        for (std::size_t j = 0; j < snapshot && included; ++j) {
            Pair y = seen[j];
            StateSet t1 = a.app(x.q, y.q);
            if (t1) {
                StateSet s = step(x.sid, y.sid);
                bool ok = true;
                for_each_state(t1, [&](int q) {
                    if (!add(q, s)) ok = false;
                });
                if (!ok) { included = false; break; }
            }
            if (x.q == y.q && x.sid == y.sid) continue;
            StateSet t2 = a.app(y.q, x.q);
            if (t2) {
                StateSet s = step(y.sid, x.sid);
                bool ok = true;
                for_each_state(t2, [&](int q) {
                    if (!add(q, s)) ok = false;
                });
                if (!ok) { included = false; break; }
            }
        }
    }
    return included;
}

// Order-preserving restriction to the reachable states; final states and
// rules are remapped, dropped states disappear.
TreeAutomaton drop_unreachable(const TreeAutomaton& a) {
    StateSet reach = reachable_states(a);
    if (reach == all_states(a.state_count)) return a;
    std::vector<int> remap(a.state_count + 1, 0);
    int next = 0;
    for (int q = 1; q <= a.state_count; ++q)
        if (set_contains(reach, q)) remap[q] = ++next;
    TreeAutomaton out(next);
    for_each_state(a.leaf_targets & reach, [&](int q) { out.leaf_targets |= state_bit(remap[q]); });
    for_each_state(a.final_states & reach, [&](int q) { out.final_states |= state_bit(remap[q]); });
    for (int q1 = 1; q1 <= a.state_count; ++q1) {
        if (!remap[q1]) continue;
        for (int q2 = 1; q2 <= a.state_count; ++q2) {
            if (!remap[q2]) continue;
            for_each_state(a.app(q1, q2) & reach, [&](int q) {
                out.app(remap[q1], remap[q2]) |= state_bit(remap[q]);
            });
        }
    }
    return out;
}

} // namespace

bool language_inclusion(const TreeAutomaton& a, int qa,
                        const TreeAutomaton& b, int pb) {
    if (qa < 1 || qa > a.state_count || pb < 1 || pb > b.state_count)
        throw InvalidInput("language inclusion state out of range");
    return inclusion_search(a, qa, b, pb);
}

TreeAutomaton tda_to_tdas(const TreeAutomaton& a0_in, const CombinatorRule& rule) {
    if (a0_in.state_count > 12)
        throw SizeLimit("sink collapse supports at most 12 states, got " +
                        std::to_string(a0_in.state_count));

    TreeAutomaton a0 = drop_unreachable(a0_in);
    if (!a0.final_states)
        throw InvalidInput("no reachable final state");
    if (auto nf = nf_intersection_witness(a0, rule))
        throw InvalidInput("input accepts the normal form " + print_term(*nf, rule));

    bool closed = !closure_check(a0, rule, ClosureVariant::Strict).has_value();
    if (!closed) {
        bool singleton = (a0.final_states & (a0.final_states - 1)) == 0;
        if (singleton) {
            closed = !closure_check(a0, rule, ClosureVariant::EscapeToFinal).has_value() ||
                     verify_tdas(a0, rule).passed();
        }
        if (!closed)
            throw InvalidInput("input automaton is not rewrite-closed");
    }

    int n0 = a0.state_count;
    int f = __builtin_ctzll(a0.final_states) + 1;  // lowest-indexed final state

    // Saturate f into a sink on a copy; the absorbed set holds every state
    // whose language lands inside the saturated f-language.
    TreeAutomaton aprime = a0;
    for (int q = 1; q <= n0; ++q) {
        aprime.app(f, q) |= state_bit(f);
        aprime.app(q, f) |= state_bit(f);
    }
    StateSet absorbed = 0;
    for (int q = 1; q <= n0; ++q)
        if (language_inclusion(a0, q, aprime, f)) absorbed |= state_bit(q);
    if (!set_contains(absorbed, f))
        throw InternalError("sink collapse: final state escaped its own closure");

    // Survivors keep their relative order; f goes last.
    std::vector<int> remap(n0 + 1, 0);
    int next = 0;
    for (int q = 1; q <= n0; ++q)
        if (q != f && !set_contains(absorbed, q)) remap[q] = ++next;
    remap[f] = ++next;
    int nn = next;

    TreeAutomaton out(nn);
    out.final_states = state_bit(nn);
    for_each_state(a0.leaf_targets, [&](int q) {
        if (remap[q]) out.leaf_targets |= state_bit(remap[q]);
    });
    for (int q1 = 1; q1 <= n0; ++q1) {
        if (!remap[q1] || q1 == f) continue;
        for (int q2 = 1; q2 <= n0; ++q2) {
            if (!remap[q2] || q2 == f) continue;
            for_each_state(a0.app(q1, q2), [&](int q) {
                if (remap[q]) out.app(remap[q1], remap[q2]) |= state_bit(remap[q]);
            });
        }
    }
    for (int q = 1; q <= nn; ++q) {
        out.app(nn, q) = state_bit(nn);
        out.app(q, nn) = state_bit(nn);
    }

    out = drop_unreachable(out);
    if (!out.final_states)
        throw InternalError("sink collapse: result lost its final state");
    if (!verify_tdas(out, rule).passed())
        throw InternalError("sink collapse: result failed certificate checks");
    return out;
}

} // namespace nonterm

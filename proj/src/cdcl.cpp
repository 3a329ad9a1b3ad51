#include <algorithm>
#include <chrono>
#include <queue>
#include <utility>
#include <vector>

#include "nonterm/errors.hpp"
#include "nonterm/solver.hpp"

namespace nonterm {
namespace {

// Literals are packed as 2v for "variable v true" and 2v+1 for "false";
// index arithmetic below relies on the pairing.
inline int lit_of(int dimacs) {
    return dimacs > 0 ? 2 * dimacs : -2 * dimacs + 1;
}
inline int neg(int lit) { return lit ^ 1; }
inline int var_of(int lit) { return lit >> 1; }
inline bool is_negative(int lit) { return lit & 1; }

enum : signed char { kFalse = -1, kUndef = 0, kTrue = 1 };

struct Clause {
    float activity = 0.0f;
    bool learned = false;
    std::vector<int> lits;
};

long long luby(long long i) {
    long long k = 1;
    while ((1ll << k) - 1 < i) ++k;
    while (i != (1ll << k) - 1) {
        i -= (1ll << (k - 1)) - 1;
        k = 1;
        while ((1ll << k) - 1 < i) ++k;
    }
    return 1ll << (k - 1);
}

class Cdcl {
public:
    explicit Cdcl(const CnfInstance& inst)
        : nvars_(inst.variable_count),
          assigns_(nvars_ + 1, kUndef),
          level_(nvars_ + 1, 0),
          reason_(nvars_ + 1, -1),
          phase_(nvars_ + 1, false),
          activity_(nvars_ + 1, 0.0),
          seen_(nvars_ + 1, false),
          watches_(2 * static_cast<std::size_t>(nvars_) + 2) {
        std::vector<int> lits;
        for (std::size_t i = 0; i < inst.clause_count() && !contradiction_; ++i) {
            lits.clear();
            for (int dl : inst.clause(i)) lits.push_back(lit_of(dl));
            std::sort(lits.begin(), lits.end());
            lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
            bool tautology = false;
            for (std::size_t k = 0; k + 1 < lits.size(); ++k)
                if (lits[k + 1] == neg(lits[k])) tautology = true;
            if (tautology) continue;
            if (lits.empty())
                contradiction_ = true;
            else if (lits.size() == 1)
                contradiction_ = !enqueue(lits[0], -1);
            else
                attach(lits, false);
        }
        first_learned_ = static_cast<int>(clauses_.size());
        max_learned_ = std::max<long long>(8000, first_learned_ / 3);
        for (int v = 1; v <= nvars_; ++v) heap_.push({activity_[v], v});
    }

    SatResult run(const BuiltinSolverOptions& opts) {
        auto t0 = std::chrono::steady_clock::now();
        SatResult res;
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        };
        auto finish = [&](SatStatus s) {
            res.status = s;
            res.solve_seconds = elapsed();
            return res;
        };

        if (contradiction_) return finish(SatStatus::Unsatisfiable);

        long long conflicts = 0, since_restart = 0;
        long long restart_round = 0, restart_budget = luby(1) * 100;
        std::vector<int> learnt;
        for (;;) {
            int confl = propagate();
            if (confl >= 0) {
                ++conflicts;
                ++since_restart;
                if (current_level() == 0) return finish(SatStatus::Unsatisfiable);
                int bt_level = 0;
                analyze(confl, learnt, bt_level);
                backtrack(bt_level);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int ci = attach(learnt, true);
                    bump_clause(ci);
                    enqueue(learnt[0], ci);
                }
                var_inc_ /= 0.95;
                clause_inc_ /= 0.999;
                if (opts.conflict_limit > 0 && conflicts >= opts.conflict_limit) {
                    res.detail =
                        "conflict limit reached (" + std::to_string(conflicts) + ")";
                    return finish(SatStatus::Unknown);
                }
                if (opts.timeout_seconds > 0 && (conflicts & 511) == 0 &&
                    elapsed() > opts.timeout_seconds) {
                    res.detail = "timeout";
                    return finish(SatStatus::Unknown);
                }
            } else if (since_restart >= restart_budget) {
                backtrack(0);
                since_restart = 0;
                restart_budget = luby(++restart_round + 1) * 100;
                if (learned_count() > max_learned_) {
                    reduce_learned();
                    max_learned_ = max_learned_ + max_learned_ / 10;
                }
            } else {
                int v = pick_branch();
                if (v == 0) {
                    res.model.assign(static_cast<std::size_t>(nvars_) + 1, false);
                    for (int u = 1; u <= nvars_; ++u) res.model[u] = assigns_[u] == kTrue;
                    if (!model_satisfies_internal())
                        throw InternalError("solver produced an inconsistent model");
                    return finish(SatStatus::Satisfiable);
                }
                trail_lim_.push_back(trail_.size());
                enqueue(phase_[v] ? 2 * v : 2 * v + 1, -1);
            }
        }
    }

private:
    int current_level() const { return static_cast<int>(trail_lim_.size()); }
    long long learned_count() const {
        return static_cast<long long>(clauses_.size()) - first_learned_;
    }

    signed char lit_value(int lit) const {
        signed char a = assigns_[lit >> 1];
        return (lit & 1) ? static_cast<signed char>(-a) : a;
    }

    bool enqueue(int lit, int reason) {
        signed char v = lit_value(lit);
        if (v != kUndef) return v == kTrue;
        int var = var_of(lit);
        assigns_[var] = is_negative(lit) ? kFalse : kTrue;
        level_[var] = current_level();
        reason_[var] = reason;
        phase_[var] = !is_negative(lit);
        trail_.push_back(lit);
        return true;
    }

    int attach(const std::vector<int>& lits, bool learned) {
        int ci = static_cast<int>(clauses_.size());
        clauses_.push_back({0.0f, learned, lits});
        watches_[lits[0]].push_back(ci);
        watches_[lits[1]].push_back(ci);
        return ci;
    }

    int propagate() {
        while (qhead_ < trail_.size()) {
            int fl = neg(trail_[qhead_++]);  // literal that just became false
            auto& wl = watches_[fl];
            std::size_t i = 0, j = 0;
            int confl = -1;
            for (; i < wl.size(); ++i) {
                int ci = wl[i];
                Clause& c = clauses_[ci];
                if (c.lits[0] == fl) std::swap(c.lits[0], c.lits[1]);
                int first = c.lits[0];
                if (lit_value(first) == kTrue) {
                    wl[j++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.lits.size(); ++k)
                    if (lit_value(c.lits[k]) != kFalse) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[c.lits[1]].push_back(ci);
                        moved = true;
                        break;
                    }
                if (moved) continue;
                wl[j++] = ci;
                if (lit_value(first) == kFalse) {
                    confl = ci;
                    ++i;
                    break;
                }
                enqueue(first, ci);
            }
            while (i < wl.size()) wl[j++] = wl[i++];
            wl.resize(j);
            if (confl >= 0) return confl;
        }
        return -1;
    }

    // First-UIP conflict analysis.  Relies on the invariant that a
    // propagated variable sits at index 0 of its reason clause.
    void analyze(int confl, std::vector<int>& learnt, int& bt_level) {
        learnt.assign(1, 0);
        int counter = 0, p = 0;
        std::size_t idx = trail_.size();
        int ci = confl;
        do {
            Clause& c = clauses_[ci];
            if (c.learned) bump_clause(ci);
            for (std::size_t k = (p == 0 ? 0 : 1); k < c.lits.size(); ++k) {
                int v = var_of(c.lits[k]);
                if (seen_[v] || level_[v] == 0) continue;
                seen_[v] = true;
                bump_var(v);
                if (level_[v] >= current_level())
                    ++counter;
                else
                    learnt.push_back(c.lits[k]);
            }
            while (!seen_[var_of(trail_[--idx])]) {}
            p = trail_[idx];
            seen_[var_of(p)] = false;
            ci = reason_[var_of(p)];
        } while (--counter > 0);
        learnt[0] = neg(p);

        bt_level = 0;
        for (std::size_t k = 1; k < learnt.size(); ++k) {
            seen_[var_of(learnt[k])] = false;
            if (level_[var_of(learnt[k])] > bt_level) {
                bt_level = level_[var_of(learnt[k])];
                std::swap(learnt[1], learnt[k]);
            }
        }
    }

    void backtrack(int target) {
        if (current_level() <= target) return;
        std::size_t begin = trail_lim_[target];
        for (std::size_t i = trail_.size(); i-- > begin;) {
            int v = var_of(trail_[i]);
            assigns_[v] = kUndef;
            reason_[v] = -1;
            heap_.push({activity_[v], v});
        }
        trail_.resize(begin);
        trail_lim_.resize(target);
        qhead_ = begin;
    }

    void bump_var(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (int u = 1; u <= nvars_; ++u) activity_[u] *= 1e-100;
            var_inc_ *= 1e-100;
            for (int u = 1; u <= nvars_; ++u)
                if (assigns_[u] == kUndef) heap_.push({activity_[u], u});
        } else if (assigns_[v] == kUndef) {
            heap_.push({activity_[v], v});
        }
    }

    void bump_clause(int ci) {
        Clause& c = clauses_[ci];
        c.activity += static_cast<float>(clause_inc_);
        if (c.activity > 1e20f) {
            for (auto& d : clauses_)
                if (d.learned) d.activity *= 1e-20f;
            clause_inc_ *= 1e-20;
        }
    }

    int pick_branch() {
        if (heap_.size() > 4 * static_cast<std::size_t>(nvars_) + 10000) {
            heap_ = {};
            for (int v = 1; v <= nvars_; ++v)
                if (assigns_[v] == kUndef) heap_.push({activity_[v], v});
        }
        while (!heap_.empty()) {
            auto [act, v] = heap_.top();
            heap_.pop();
            if (assigns_[v] == kUndef && act == activity_[v]) return v;
        }
        for (int v = 1; v <= nvars_; ++v)
            if (assigns_[v] == kUndef) return v;
        return 0;
    }

    // Drops the least active half of the long learned clauses.  Called
    // at decision level zero, where no learned clause is needed as a
    // reason (root assignments resolve through nothing).
    void reduce_learned() {
        for (int lit : trail_) reason_[var_of(lit)] = -1;
        std::vector<int> cand;
        for (int ci = first_learned_; ci < static_cast<int>(clauses_.size()); ++ci)
            if (clauses_[ci].lits.size() > 2) cand.push_back(ci);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            return clauses_[a].activity < clauses_[b].activity;
        });
        std::vector<char> dead(clauses_.size(), 0);
        for (std::size_t k = 0; k < cand.size() / 2; ++k) dead[cand[k]] = 1;

        std::vector<Clause> kept;
        kept.reserve(clauses_.size() - cand.size() / 2);
        for (std::size_t ci = 0; ci < clauses_.size(); ++ci)
            if (!dead[ci]) kept.push_back(std::move(clauses_[ci]));
        clauses_ = std::move(kept);
        for (auto& wl : watches_) wl.clear();
        for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
            watches_[clauses_[ci].lits[0]].push_back(static_cast<int>(ci));
            watches_[clauses_[ci].lits[1]].push_back(static_cast<int>(ci));
        }
    }

    bool model_satisfies_internal() const {
        for (const Clause& c : clauses_) {
            bool sat = false;
            for (int lit : c.lits)
                if (lit_value(lit) == kTrue) {
                    sat = true;
                    break;
                }
            if (!sat) return false;
        }
        return true;
    }

    int nvars_;
    bool contradiction_ = false;
    std::vector<signed char> assigns_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<char> phase_;
    std::vector<double> activity_;
    std::vector<char> seen_;
    std::vector<std::vector<int>> watches_;
    std::vector<Clause> clauses_;
    std::vector<int> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;
    std::priority_queue<std::pair<double, int>> heap_;
    int first_learned_ = 0;
    long long max_learned_ = 0;
    double var_inc_ = 1.0;
    double clause_inc_ = 1.0;
};

} // namespace

SatResult solve_builtin(const CnfInstance& inst, const BuiltinSolverOptions& opts) {
    Cdcl solver(inst);
    return solver.run(opts);
}

} // namespace nonterm

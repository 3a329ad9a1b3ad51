#include "nonterm/automaton.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "nonterm/errors.hpp"

namespace nonterm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_state_number(const std::string& tok, int line_no, int state_count) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw SyntaxError("line " + std::to_string(line_no) + ": expected a state number, got '" + tok + "'");
    }
    if (pos != tok.size())
        throw SyntaxError("line " + std::to_string(line_no) + ": expected a state number, got '" + tok + "'");
    if (v < 1 || v > state_count)
        throw InvalidInput("line " + std::to_string(line_no) + ": state " + std::to_string(v) +
                           " out of range 1.." + std::to_string(state_count));
    return v;
}

// Splits on sep, trimming each piece; rejects empty pieces.
std::vector<std::string> split_list(const std::string& s, char sep, int line_no) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, sep)) {
        cur = trim(cur);
        if (cur.empty())
            throw SyntaxError("line " + std::to_string(line_no) + ": empty entry in list '" + s + "'");
        out.push_back(cur);
    }
    if (out.empty())
        throw SyntaxError("line " + std::to_string(line_no) + ": empty list");
    return out;
}

StateSet parse_target_set(const std::string& rhs, int line_no, int state_count) {
    StateSet set = 0;
    for (const auto& tok : split_list(rhs, '|', line_no))
        set |= state_bit(parse_state_number(tok, line_no, state_count));
    return set;
}

void add_sink_rules(TreeAutomaton& a, int s) {
    for (int q = 1; q <= a.state_count; ++q) {
        a.app(s, q) |= state_bit(s);
        a.app(q, s) |= state_bit(s);
    }
}

} // namespace

TreeAutomaton parse_automaton(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool have_states = false;
    bool have_final = false;
    TreeAutomaton a;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.rfind("states", 0) == 0 && (line.size() == 6 || std::isspace(static_cast<unsigned char>(line[6])))) {
            if (have_states)
                throw SyntaxError("line " + std::to_string(line_no) + ": duplicate 'states' directive");
            std::string rest = trim(line.substr(6));
            std::size_t pos = 0;
            int n = 0;
            try {
                n = std::stoi(rest, &pos);
            } catch (const std::exception&) {
                throw SyntaxError("line " + std::to_string(line_no) + ": 'states' needs a count");
            }
            if (pos != rest.size() || n < 1)
                throw SyntaxError("line " + std::to_string(line_no) + ": 'states' needs a positive count");
            if (n > kMaxStates)
                throw SizeLimit("state count " + std::to_string(n) + " exceeds the supported maximum " +
                                std::to_string(kMaxStates));
            a = TreeAutomaton(n);
            have_states = true;
            continue;
        }

        if (!have_states)
            throw SyntaxError("line " + std::to_string(line_no) + ": 'states' must come before '" + line + "'");

        if (line.rfind("final", 0) == 0 && (line.size() == 5 || std::isspace(static_cast<unsigned char>(line[5])))) {
            have_final = true;
            for (const auto& tok : split_list(trim(line.substr(5)), ',', line_no))
                a.final_states |= state_bit(parse_state_number(tok, line_no, a.state_count));
            continue;
        }

        if (line.rfind("sink", 0) == 0 && (line.size() == 4 || std::isspace(static_cast<unsigned char>(line[4])))) {
            add_sink_rules(a, parse_state_number(trim(line.substr(4)), line_no, a.state_count));
            continue;
        }

        auto arrow = line.find("->");
        if (arrow == std::string::npos)
            throw SyntaxError("line " + std::to_string(line_no) + ": expected a rule or directive, got '" + line + "'");
        std::string lhs = trim(line.substr(0, arrow));
        std::string rhs = trim(line.substr(arrow + 2));
        StateSet targets = parse_target_set(rhs, line_no, a.state_count);

        if (lhs == "Z") {
            a.leaf_targets |= targets;
            continue;
        }
        if (lhs.size() >= 4 && lhs[0] == 'A' && lhs[1] == '(' && lhs.back() == ')') {
            std::string inner = lhs.substr(2, lhs.size() - 3);
            auto parts = split_list(inner, ',', line_no);
            if (parts.size() != 2)
                throw SyntaxError("line " + std::to_string(line_no) + ": 'A(q1,q2)' needs two states");
            int q1 = parse_state_number(parts[0], line_no, a.state_count);
            int q2 = parse_state_number(parts[1], line_no, a.state_count);
            a.app(q1, q2) |= targets;
            continue;
        }
        throw SyntaxError("line " + std::to_string(line_no) + ": unrecognized rule left side '" + lhs + "'");
    }

    if (!have_states) throw SyntaxError("missing 'states' directive");
    if (!have_final) throw SyntaxError("missing 'final' directive");
    return a;
}

TreeAutomaton parse_automaton_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open automaton file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read automaton file '" + path + "'");
    return parse_automaton(buf.str());
}

std::string serialize_automaton(const TreeAutomaton& a) {
    std::ostringstream out;
    out << "states " << a.state_count << "\n";

    out << "final ";
    bool first = true;
    for_each_state(a.final_states, [&](int q) {
        if (!first) out << ",";
        out << q;
        first = false;
    });
    out << "\n";

    StateSet sinks = 0;
    for (int q = 1; q <= a.state_count; ++q)
        if (is_sink(a, q)) sinks |= state_bit(q);
    for_each_state(sinks, [&](int q) { out << "sink " << q << "\n"; });

    if (a.leaf_targets) {
        out << "Z ->";
        first = true;
        for_each_state(a.leaf_targets, [&](int q) {
            out << (first ? " " : "|") << q;
            first = false;
        });
        out << "\n";
    }

    for (int q1 = 1; q1 <= a.state_count; ++q1) {
        for (int q2 = 1; q2 <= a.state_count; ++q2) {
            StateSet t = a.app(q1, q2);
            if (!t) continue;
            // Cells a sink directive regenerates are left implicit.
            if ((sinks & (state_bit(q1) | state_bit(q2))) != 0) continue;
            out << "A(" << q1 << "," << q2 << ") ->";
            first = true;
            for_each_state(t, [&](int q) {
                out << (first ? " " : "|") << q;
                first = false;
            });
            out << "\n";
        }
    }
    return out.str();
}

StateSet run(const TreeAutomaton& a, const TermPtr& t) {
    if (!t->ground()) throw InvalidInput("automaton run requires a ground term");
    // Terms share subterm nodes, so memoize per node.
    std::unordered_map<const Term*, StateSet> memo;
    struct Frame {
        const Term* node;
        bool expanded;
    };
    std::vector<Frame> stack{{t.get(), false}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (memo.count(f.node)) continue;
        if (f.node->is_leaf()) {
            memo.emplace(f.node, a.leaf_targets);
            continue;
        }
        if (!f.expanded) {
            stack.push_back({f.node, true});
            stack.push_back({f.node->fun().get(), false});
            stack.push_back({f.node->arg().get(), false});
            continue;
        }
        StateSet s1 = memo.at(f.node->fun().get());
        StateSet s2 = memo.at(f.node->arg().get());
        StateSet out = 0;
        for_each_state(s1, [&](int q1) {
            for_each_state(s2, [&](int q2) { out |= a.app(q1, q2); });
        });
        memo.emplace(f.node, out);
    }
    return memo.at(t.get());
}

bool accepts(const TreeAutomaton& a, const TermPtr& t) {
    return (run(a, t) & a.final_states) != 0;
}

StateSet run_with_states(const TreeAutomaton& a, const TermPtr& t,
                         const std::vector<int>& var_state) {
    if (t->is_leaf()) {
        if (t->is_combinator_leaf()) return a.leaf_targets;
        int k = t->variable_index();
        if (k < 1 || static_cast<std::size_t>(k) > var_state.size())
            throw InvalidInput("no state assigned to variable x" + std::to_string(k));
        int q = var_state[k - 1];
        if (q < 1 || q > a.state_count)
            throw InvalidInput("variable state " + std::to_string(q) + " out of range");
        return state_bit(q);
    }
    StateSet s1 = run_with_states(a, t->fun(), var_state);
    StateSet s2 = run_with_states(a, t->arg(), var_state);
    StateSet out = 0;
    for_each_state(s1, [&](int q1) {
        for_each_state(s2, [&](int q2) { out |= a.app(q1, q2); });
    });
    return out;
}

StateSet reachable_states(const TreeAutomaton& a) {
    StateSet reach = a.leaf_targets;
    bool changed = true;
    while (changed) {
        changed = false;
        StateSet next = reach;
        for_each_state(reach, [&](int q1) {
            for_each_state(reach, [&](int q2) { next |= a.app(q1, q2); });
        });
        if (next != reach) {
            reach = next;
            changed = true;
        }
    }
    return reach;
}

bool is_sink(const TreeAutomaton& a, int q) {
    StateSet only_q = state_bit(q);
    for (int p = 1; p <= a.state_count; ++p)
        if (a.app(q, p) != only_q || a.app(p, q) != only_q) return false;
    return true;
}

std::vector<int> minld(const TreeAutomaton& a) {
    int n = a.state_count;
    std::vector<int> d(n, kUnboundedDepth);
    for_each_state(a.leaf_targets, [&](int q) { d[q - 1] = 0; });
    bool changed = true;
    while (changed) {
        changed = false;
        for (int q1 = 1; q1 <= n; ++q1) {
            if (d[q1 - 1] == kUnboundedDepth) continue;
            for (int q2 = 1; q2 <= n; ++q2) {
                if (d[q2 - 1] == kUnboundedDepth) continue;
                int cand = d[q1 - 1] + 1;
                for_each_state(a.app(q1, q2), [&](int q) {
                    if (cand < d[q - 1]) {
                        d[q - 1] = cand;
                        changed = true;
                    }
                });
            }
        }
    }
    return d;
}

namespace {

// Minimal-leaf-count term reaching each state; tie-break left to callers.
std::vector<TermPtr> smallest_reaching_terms(const TreeAutomaton& a) {
    int n = a.state_count;
    std::vector<TermPtr> rep(n);
    if (a.leaf_targets) {
        TermPtr z = Term::leaf();
        for_each_state(a.leaf_targets, [&](int q) { rep[q - 1] = z; });
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (int q1 = 1; q1 <= n; ++q1) {
            if (!rep[q1 - 1]) continue;
            for (int q2 = 1; q2 <= n; ++q2) {
                if (!rep[q2 - 1]) continue;
                int lc = rep[q1 - 1]->leaf_count() + rep[q2 - 1]->leaf_count();
                for_each_state(a.app(q1, q2), [&](int q) {
                    if (!rep[q - 1] || lc < rep[q - 1]->leaf_count()) {
                        rep[q - 1] = Term::app(rep[q1 - 1], rep[q2 - 1]);
                        changed = true;
                    }
                });
            }
        }
    }
    return rep;
}

} // namespace

std::optional<TermPtr> minld_witness(const TreeAutomaton& a, int q) {
    std::vector<int> d = minld(a);
    if (d[q - 1] == kUnboundedDepth) return std::nullopt;
    std::vector<TermPtr> rep = smallest_reaching_terms(a);
    // d[q] == 0 forces a leaf: applications have left depth >= 1.
    if (d[q - 1] == 0) return Term::leaf();
    for (int q1 = 1; q1 <= a.state_count; ++q1) {
        if (d[q1 - 1] == kUnboundedDepth || d[q1 - 1] + 1 != d[q - 1]) continue;
        for (int q2 = 1; q2 <= a.state_count; ++q2) {
            if (!rep[q2 - 1]) continue;
            if (!set_contains(a.app(q1, q2), q)) continue;
            auto left = minld_witness(a, q1);
            if (!left) continue;
            return Term::app(*left, rep[q2 - 1]);
        }
    }
    throw InternalError("minld fixpoint has no witness for state " + std::to_string(q));
}

std::optional<TermPtr> smallest_accepted_term(const TreeAutomaton& a,
                                              const CombinatorRule& rule) {
    int n = a.state_count;
    struct Best {
        TermPtr t;
        std::string text;
    };
    std::vector<std::optional<Best>> best(n);
    if (a.leaf_targets) {
        TermPtr z = Term::leaf();
        std::string ztext = print_term(z, rule);
        for_each_state(a.leaf_targets, [&](int q) { best[q - 1] = Best{z, ztext}; });
    }

    auto improves = [](int lc, const std::string& text, const Best& cur) {
        int cur_lc = cur.t->leaf_count();
        return lc < cur_lc || (lc == cur_lc && text < cur.text);
    };

    // Children always have strictly fewer leaves, so values settle within
    // n rounds; the cap guards the loop against a broken ordering.
    int rounds = 0;
    bool changed = true;
    while (changed) {
        if (++rounds > 2 * n + 20) throw InternalError("smallest-term search failed to converge");
        changed = false;
        for (int q1 = 1; q1 <= n; ++q1) {
            if (!best[q1 - 1]) continue;
            for (int q2 = 1; q2 <= n; ++q2) {
                if (!best[q2 - 1]) continue;
                TermPtr cand;
                std::string cand_text;
                int lc = best[q1 - 1]->t->leaf_count() + best[q2 - 1]->t->leaf_count();
                auto ensure_cand = [&]() {
                    if (!cand) {
                        cand = Term::app(best[q1 - 1]->t, best[q2 - 1]->t);
                        cand_text = print_term(cand, rule);
                    }
                };
                for_each_state(a.app(q1, q2), [&](int q) {
                    if (best[q - 1]) {
                        int cur_lc = best[q - 1]->t->leaf_count();
                        if (lc > cur_lc) return;
                        if (lc == cur_lc) {
                            ensure_cand();
                            if (!(cand_text < best[q - 1]->text)) return;
                        }
                    }
                    ensure_cand();
                    best[q - 1] = Best{cand, cand_text};
                    changed = true;
                });
            }
        }
    }

    std::optional<Best> overall;
    for_each_state(a.final_states, [&](int q) {
        if (!best[q - 1]) return;
        if (!overall || improves(best[q - 1]->t->leaf_count(), best[q - 1]->text, *overall))
            overall = best[q - 1];
    });
    if (!overall) return std::nullopt;
    return overall->t;
}

std::optional<int> DepthAutomaton::run(const TermPtr& t) const {
    if (t->is_leaf()) return cap > 0 ? std::optional<int>(0) : std::nullopt;
    auto d1 = run(t->fun());
    auto d2 = run(t->arg());
    if (!d1 || !d2) return std::nullopt;
    if (*d1 + 1 >= cap) return std::nullopt;
    return *d1 + 1;
}

} // namespace nonterm

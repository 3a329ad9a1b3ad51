// Acceptance gate: one line per ship criterion, PASS or FAIL, with the
// tolerances pinned below.  Run with no arguments for the full gate or
// with --criterion N (repeatable) for a subset.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nonterm/automaton.hpp"
#include "nonterm/encode.hpp"
#include "nonterm/errors.hpp"
#include "nonterm/search.hpp"
#include "nonterm/solver.hpp"
#include "nonterm/term.hpp"
#include "nonterm/verify.hpp"

using namespace nonterm;

namespace {

// Pinned tolerances.
constexpr double kFixtureVerifySeconds = 5.0;    // per shipped automaton
constexpr double kFastSearchSeconds = 600.0;     // per three- or four-argument search
constexpr double kSlowSearchSeconds = 3600.0;    // per seven-state search
constexpr double kNegativeSearchSeconds = 1800.0;// per five-argument refutation
constexpr int kValidateSteps = 50;               // replay depth (breadth cap 100 inside)
constexpr int kMinimalLeaves = 8;                // smallest accepted term of the P automaton
constexpr int kExhaustiveLeaves = 7;             // leaf bound for the minimality sweep
constexpr long long kAnchorVars = 7116;          // reference size of the P search at 4 states
constexpr long long kAnchorClauses = 33543;
constexpr int kSizeFactor = 10;                  // order-of-magnitude band around the anchor
constexpr int kPropertyCases = 1000;             // per sampled property suite
constexpr long long kAgreementClauseCap = 50000; // builtin-vs-external comparison bound
constexpr unsigned kSeed = 20260822;

const std::vector<std::pair<std::string, int>> kFixtureStates = {
    {"P", 4}, {"P3", 6}, {"D1", 6}, {"D2", 6},
    {"Phi", 7}, {"Phi2", 9}, {"S1", 7}, {"S2", 6}};

// Expected certificate sizes and budgets for the positive searches.
struct SearchCase {
    const char* name;
    int states;
    double budget;
};
const std::vector<SearchCase> kSearchCases = {
    {"P", 4, kFastSearchSeconds},   {"P3", 6, kFastSearchSeconds},
    {"D1", 6, kFastSearchSeconds},  {"D2", 6, kFastSearchSeconds},
    {"S2", 6, kFastSearchSeconds},  {"Phi", 7, kSlowSearchSeconds},
    {"S1", 7, kSlowSearchSeconds}};

std::string fixture_path(const std::string& name) {
    return std::string(NONTERM_FIXTURE_DIR) + "/automata/" + name + ".ta";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int leaf_count(const TermPtr& t) {
    return t->is_app() ? leaf_count(t->fun()) + leaf_count(t->arg()) : 1;
}

// Search results shared between criteria; computed once on first use
// with artifacts kept for the model-agreement criterion.
struct Ctx {
    std::map<std::string, SearchOutcome> tdas;
    std::map<std::string, double> tdas_elapsed;
    std::optional<SearchOutcome> baseline_p;

    const SearchOutcome& run(const std::string& name) {
        auto it = tdas.find(name);
        if (it != tdas.end()) return it->second;
        auto t0 = std::chrono::steady_clock::now();
        SearchOutcome out = disprove(*find_builtin_rule(name), {});
        tdas_elapsed[name] = seconds_since(t0);
        return tdas.emplace(name, std::move(out)).first->second;
    }

    const SearchOutcome& baseline() {
        if (!baseline_p) {
            SearchOptions opts;
            opts.method = SearchMethod::TdaBaseline;
            opts.max_states = 4;
            baseline_p = disprove(*find_builtin_rule("P"), opts);
        }
        return *baseline_p;
    }
};

bool fail(std::string& note, const std::string& why) {
    note = why;
    return false;
}

// 1. Shipped automata parse and verify as sink certificates in budget.
bool criterion_certificates(Ctx&, std::string& note) {
    double slowest = 0;
    for (const auto& [name, states] : kFixtureStates) {
        auto t0 = std::chrono::steady_clock::now();
        TreeAutomaton a = parse_automaton_file(fixture_path(name));
        if (a.state_count != states)
            return fail(note, name + " has " + std::to_string(a.state_count) + " states, expected " +
                                  std::to_string(states));
        VerificationReport report = verify_tdas(a, *find_builtin_rule(name));
        double elapsed = seconds_since(t0);
        slowest = std::max(slowest, elapsed);
        if (!report.passed()) return fail(note, name + " failed: " + report.summary());
        if (elapsed >= kFixtureVerifySeconds)
            return fail(note, name + " took " + std::to_string(elapsed) + "s");
    }
    note = "8 automata verified, slowest " + std::to_string(slowest).substr(0, 5) + "s";
    return true;
}

// 2. Searches find the known certificate sizes with every smaller size
// refuted, within budget.
bool criterion_state_counts(Ctx& ctx, std::string& note) {
    for (const SearchCase& sc : kSearchCases) {
        const SearchOutcome& out = ctx.run(sc.name);
        double elapsed = ctx.tdas_elapsed[sc.name];
        if (out.status != SearchStatus::Disproved)
            return fail(note, std::string(sc.name) + ": " + to_string(out.status));
        if (*out.found_states != sc.states)
            return fail(note, std::string(sc.name) + " found at " +
                                  std::to_string(*out.found_states) + ", expected " +
                                  std::to_string(sc.states));
        int floor = find_builtin_rule(sc.name)->arity + 1;
        if (static_cast<int>(out.per_state_log.size()) != sc.states - floor + 1)
            return fail(note, std::string(sc.name) + ": unexpected ladder length");
        for (std::size_t i = 0; i + 1 < out.per_state_log.size(); ++i)
            if (out.per_state_log[i].result != SatStatus::Unsatisfiable)
                return fail(note, std::string(sc.name) + ": size " +
                                      std::to_string(out.per_state_log[i].states) +
                                      " not refuted");
        if (elapsed > sc.budget)
            return fail(note, std::string(sc.name) + " took " + std::to_string(elapsed) + "s");
    }
    note = "7 combinators at their known sizes, all smaller sizes refuted";
    return true;
}

// 3. Every found certificate re-verifies and its counterexample replays
// without ever reaching a normal form.
bool criterion_soundness(Ctx& ctx, std::string& note) {
    long long replayed = 0;
    for (const SearchCase& sc : kSearchCases) {
        const SearchOutcome& out = ctx.run(sc.name);
        const CombinatorRule& rule = *find_builtin_rule(sc.name);
        if (!verify_tdas(*out.automaton, rule).passed())
            return fail(note, std::string(sc.name) + ": certificate fails re-verification");
        try {
            ValidationReport rep =
                validate_counterexample(*out.counterexample, *out.automaton, rule, kValidateSteps);
            if (rep.terms_checked <= 0) return fail(note, std::string(sc.name) + ": empty replay");
            replayed += rep.terms_checked;
        } catch (const ValidationFailure& e) {
            return fail(note, std::string(sc.name) + ": " + e.what());
        }
    }
    note = std::to_string(replayed) + " reachable terms replayed, none a normal form";
    return true;
}

// 4. The P automaton's smallest accepted term has exactly 8 leaves and
// exhaustive enumeration confirms nothing smaller is accepted.
bool criterion_minimality(Ctx&, std::string& note) {
    const CombinatorRule& rule = *find_builtin_rule("P");
    TreeAutomaton a = parse_automaton_file(fixture_path("P"));
    std::optional<TermPtr> smallest = smallest_accepted_term(a, rule);
    if (!smallest) return fail(note, "empty certificate language");
    if (leaf_count(*smallest) != kMinimalLeaves)
        return fail(note, "smallest accepted term has " + std::to_string(leaf_count(*smallest)) +
                              " leaves, expected " + std::to_string(kMinimalLeaves));

    std::vector<std::vector<TermPtr>> by_leaves(kExhaustiveLeaves + 1);
    by_leaves[1] = {Term::leaf()};
    long long total = 1;
    for (int k = 2; k <= kExhaustiveLeaves; ++k) {
        for (int i = 1; i < k; ++i)
            for (const TermPtr& f : by_leaves[i])
                for (const TermPtr& arg : by_leaves[k - i]) {
                    by_leaves[k].push_back(Term::app(f, arg));
                    ++total;
                }
    }
    for (int k = 1; k <= kExhaustiveLeaves; ++k)
        for (const TermPtr& t : by_leaves[k])
            if (accepts(a, t))
                return fail(note, "accepted a " + std::to_string(k) + "-leaf term: " +
                                      print_term(t, rule));
    note = "8-leaf witness; all " + std::to_string(total) + " terms up to 7 leaves rejected";
    return true;
}

// 5. The baseline encoding also disproves P at 4 states and its
// certificate collapses into a sink certificate of at most 4 states.
bool criterion_baseline(Ctx& ctx, std::string& note) {
    const SearchOutcome& out = ctx.baseline();
    const CombinatorRule& rule = *find_builtin_rule("P");
    if (out.status != SearchStatus::Disproved || *out.found_states != 4)
        return fail(note, "baseline search did not disprove P at 4 states");
    if (!verify_tda(*out.automaton, rule).passed())
        return fail(note, "baseline certificate fails the general check");
    try {
        TreeAutomaton collapsed = tda_to_tdas(*out.automaton, rule);
        if (collapsed.state_count > 4)
            return fail(note, "collapse produced " + std::to_string(collapsed.state_count) +
                                  " states");
        if (!verify_tdas(collapsed, rule).passed())
            return fail(note, "collapsed automaton fails the sink check");
        note = "baseline certificate at 4 states, collapsed to " +
               std::to_string(collapsed.state_count) + " sink-form states";
    } catch (const Error& e) {
        return fail(note, std::string("collapse failed: ") + e.what());
    }
    return true;
}

// 6. The five-argument combinators have no certificate up to 6 states.
bool criterion_negative(Ctx&, std::string& note) {
    for (const char* name : {"S3", "S4"}) {
        SearchOptions opts;
        opts.max_states = 6;
        auto t0 = std::chrono::steady_clock::now();
        SearchOutcome out = disprove(*find_builtin_rule(name), opts);
        double elapsed = seconds_since(t0);
        if (out.status != SearchStatus::ExhaustedUnsat)
            return fail(note, std::string(name) + ": " + to_string(out.status));
        for (const SearchStep& s : out.per_state_log)
            if (s.result != SatStatus::Unsatisfiable)
                return fail(note, std::string(name) + ": size " + std::to_string(s.states) +
                                      " not refuted");
        if (elapsed > kNegativeSearchSeconds)
            return fail(note, std::string(name) + " took " + std::to_string(elapsed) + "s");
    }
    note = "S3 and S4 refuted at every size up to 6";
    return true;
}

// 7. Every model kept from the searches agrees with the independent
// oracles for minimum left depth and term evaluation.
bool criterion_agreement(Ctx& ctx, std::string& note) {
    int models = 0;
    auto check = [&](const std::string& name, const SearchOutcome& out) {
        if (!out.instance || out.model.empty()) return fail(note, name + ": artifacts missing");
        AgreementReport rep = check_model_agreement(*out.instance, out.model);
        if (!rep.passed())
            return fail(note, name + ": " + std::to_string(rep.minld_mismatches) + " minld, " +
                                  std::to_string(rep.eval_mismatches) + " eval mismatches");
        ++models;
        return true;
    };
    for (const SearchCase& sc : kSearchCases)
        if (!check(sc.name, ctx.run(sc.name))) return false;
    if (!check("P@baseline", ctx.baseline())) return false;
    note = std::to_string(models) + " models, zero mismatches";
    return true;
}

// 8. Instance sizes are sane: the P search at 4 states lies within an
// order of magnitude of the reference size, and the sink encoding needs
// strictly fewer evaluation variables than the baseline throughout.
bool criterion_sizes(Ctx&, std::string& note) {
    CnfStats stats = cnf_stats(encode_tdas(*find_builtin_rule("P"), 4));
    if (stats.variables < kAnchorVars / kSizeFactor || stats.variables > kAnchorVars * kSizeFactor ||
        stats.clauses < kAnchorClauses / kSizeFactor || stats.clauses > kAnchorClauses * kSizeFactor)
        return fail(note, "P at 4 states is " + std::to_string(stats.variables) + " vars / " +
                              std::to_string(stats.clauses) + " clauses, outside the band");
    for (const CombinatorRule& rule : builtin_rules()) {
        int n = rule.arity + 1;
        long long sink = VariableLayout(rule, n, true).eval_variable_count();
        long long baseline = VariableLayout(rule, n, false).eval_variable_count();
        if (sink >= baseline)
            return fail(note, rule.name + ": sink eval count " + std::to_string(sink) +
                                  " not below baseline " + std::to_string(baseline));
    }
    note = std::to_string(stats.variables) + " vars / " + std::to_string(stats.clauses) +
           " clauses at the anchor; sink eval counts below baseline for all 10 rules";
    return true;
}

// One witness term per state; exact for every reachable state.
std::vector<TermPtr> state_witnesses(const TreeAutomaton& a) {
    std::vector<TermPtr> witness(a.state_count + 1);
    for (int q = 1; q <= a.state_count; ++q)
        if (std::optional<TermPtr> w = minld_witness(a, q)) witness[q] = *w;
    return witness;
}

// Distinct accepted terms, breadth-first along innermost reduction.
std::vector<TermPtr> sample_accepted(const TreeAutomaton& a, const CombinatorRule& rule,
                                     int want) {
    std::vector<TermPtr> out;
    std::set<std::string> seen;
    std::vector<TermPtr> frontier{*smallest_accepted_term(a, rule)};
    while (!frontier.empty() && static_cast<int>(out.size()) < want) {
        std::vector<TermPtr> next;
        for (const TermPtr& t : frontier) {
            if (static_cast<int>(out.size()) >= want) break;
            if (!seen.insert(print_term(t, rule)).second) continue;
            out.push_back(t);
            for (TermPtr& s : innermost_successors(t, rule))
                if (static_cast<int>(next.size()) < 40) next.push_back(std::move(s));
        }
        frontier = std::move(next);
    }
    return out;
}

// 9. Property suites: sink absorption under random contexts, closure of
// acceptance under innermost steps, shipped automata as satisfying
// assignments, and builtin-vs-external solver agreement on every small
// instance.
bool criterion_properties(Ctx&, std::string& note) {
    std::mt19937 rng(kSeed);
    int per_fixture = kPropertyCases / static_cast<int>(kFixtureStates.size());

    // (a) Wrapping an accepted term in any context of evaluable terms
    // stays accepted: the final state absorbs every application.
    for (const auto& [name, _] : kFixtureStates) {
        const CombinatorRule& rule = *find_builtin_rule(name);
        TreeAutomaton a = parse_automaton_file(fixture_path(name));
        std::vector<TermPtr> witness = state_witnesses(a);
        for (int q = 1; q <= a.state_count; ++q)
            if (!witness[q]) return fail(note, name + ": state " + std::to_string(q) +
                                                   " has no witness term");
        std::vector<TermPtr> accepted = sample_accepted(a, rule, per_fixture);
        if (accepted.empty()) return fail(note, name + ": no accepted terms sampled");
        std::uniform_int_distribution<int> pick_state(1, a.state_count);
        std::uniform_int_distribution<int> layers(1, 3);
        std::uniform_int_distribution<int> side(0, 1);
        for (int i = 0; i < per_fixture; ++i) {
            TermPtr t = accepted[i % accepted.size()];
            int wrap = layers(rng);
            for (int j = 0; j < wrap; ++j) {
                TermPtr leg = witness[pick_state(rng)];
                t = side(rng) ? Term::app(t, leg) : Term::app(leg, t);
            }
            if (!accepts(a, t))
                return fail(note, name + ": context escaped the language: " + print_term(t, rule));
        }
    }

    // (b) Acceptance is closed under innermost reduction.
    long long steps_checked = 0;
    for (const auto& [name, _] : kFixtureStates) {
        const CombinatorRule& rule = *find_builtin_rule(name);
        TreeAutomaton a = parse_automaton_file(fixture_path(name));
        for (const TermPtr& t : sample_accepted(a, rule, per_fixture)) {
            for (const TermPtr& s : innermost_successors(t, rule)) {
                ++steps_checked;
                if (!accepts(a, s))
                    return fail(note, name + ": successor rejected: " + print_term(s, rule));
            }
        }
    }

    // (c) Each shipped automaton, pinned as unit clauses, satisfies its
    // own instance and decodes back to itself.  The 9-state automaton is
    // excluded: its instance does not fit desk-scale memory.
    for (const auto& [name, states] : kFixtureStates) {
        if (name == "Phi2") continue;
        const CombinatorRule& rule = *find_builtin_rule(name);
        TreeAutomaton a = parse_automaton_file(fixture_path(name));
        CnfInstance inst = encode_tdas(rule, states);
        pin_transitions(inst, a);
        SatResult res = solve_builtin(inst, {});
        if (res.status != SatStatus::Satisfiable)
            return fail(note, name + ": pinned instance " + to_string(res.status));
        if (!(decode_automaton(inst, res.model) == a))
            return fail(note, name + ": pinned model decodes to a different automaton");
        if (!check_model_agreement(inst, res.model).passed())
            return fail(note, name + ": pinned model disagrees with the oracles");
    }

    // (d) Builtin and external solvers agree on every instance under the
    // clause cap: the encoder instances that fit, the pinned P instance,
    // and a seeded random batch.
    std::optional<SolverCommand> external = discover_solver();
    if (!external) return fail(note, "no external solver found for the agreement suite");
    int agreed = 0;
    auto compare = [&](const CnfInstance& inst, const std::string& label) {
        CnfStats stats = cnf_stats(inst);
        if (stats.clauses > kAgreementClauseCap)
            return fail(note, label + " exceeds the clause cap");
        SatStatus ours = solve_builtin(inst, {}).status;
        SatStatus theirs = solve_external(inst, *external, 60.0).status;
        if (ours == SatStatus::Unknown || ours != theirs)
            return fail(note, label + ": builtin " + to_string(ours) + ", external " +
                                  to_string(theirs));
        ++agreed;
        return true;
    };
    const std::vector<std::pair<const char*, int>> encoder_picks = {{"P", 4}, {"P3", 4}};
    for (const auto& [name, n] : encoder_picks)
        if (!compare(encode_tdas(*find_builtin_rule(name), n), std::string(name) + " at " +
                                                                   std::to_string(n) + " states"))
            return false;
    CombinatorRule w = parse_rule("W x -> x x");
    for (int n = 2; n <= 4; ++n) {
        if (!compare(encode_tdas(w, n), "W sink at " + std::to_string(n))) return false;
        if (!compare(encode_tda_baseline(w, n), "W baseline at " + std::to_string(n)))
            return false;
    }
    {
        const CombinatorRule& rule = *find_builtin_rule("P");
        CnfInstance pinned = encode_tdas(rule, 4);
        pin_transitions(pinned, parse_automaton_file(fixture_path("P")));
        if (!compare(pinned, "pinned P instance")) return false;
    }
    std::uniform_int_distribution<int> nvars(6, 14), nclauses(15, 60), width(1, 3);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 40; ++i) {
        CnfInstance inst;
        inst.rule = *find_builtin_rule("P");
        inst.method = "random";
        inst.state_count = 2;
        int v = nvars(rng);
        inst.variable_count = v;
        std::uniform_int_distribution<int> var(1, v);
        int m = nclauses(rng);
        for (int c = 0; c < m; ++c) {
            std::vector<int> lits;
            int k = width(rng);
            for (int l = 0; l < k; ++l) lits.push_back(coin(rng) ? var(rng) : -var(rng));
            inst.add_clause(lits);
        }
        if (!compare(inst, "random instance " + std::to_string(i))) return false;
    }

    note = "absorption and closure on " + std::to_string(kPropertyCases) + "+" +
           std::to_string(steps_checked) + " cases; 7 automata pinned; " +
           std::to_string(agreed) + " instances agreed across solvers";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 64;
        }
    }

    struct Entry {
        int id;
        const char* name;
        std::function<bool(Ctx&, std::string&)> run;
    };
    const std::vector<Entry> entries = {
        {1, "shipped-certificates", criterion_certificates},
        {2, "found-state-counts", criterion_state_counts},
        {3, "end-to-end-soundness", criterion_soundness},
        {4, "counterexample-minimality", criterion_minimality},
        {5, "baseline-parity", criterion_baseline},
        {6, "negative-results", criterion_negative},
        {7, "model-oracle-agreement", criterion_agreement},
        {8, "encoding-size-sanity", criterion_sizes},
        {9, "property-suites", criterion_properties},
    };

    Ctx ctx;
    int failures = 0, ran = 0;
    for (const Entry& entry : entries) {
        if (!only.empty() && std::find(only.begin(), only.end(), entry.id) == only.end())
            continue;
        ++ran;
        std::string note;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = entry.run(ctx, note);
        } catch (const std::exception& e) {
            note = std::string("unexpected error: ") + e.what();
        }
        double elapsed = seconds_since(t0);
        if (!ok) ++failures;
        std::printf("%s  %d  %-26s %7.2fs  %s\n", ok ? "PASS" : "FAIL", entry.id, entry.name,
                    elapsed, note.c_str());
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "no matching criteria\n");
        return 64;
    }
    return failures == 0 ? 0 : 1;
}

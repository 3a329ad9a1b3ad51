#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "nonterm/automaton.hpp"
#include "nonterm/errors.hpp"
#include "nonterm/term.hpp"
#include "nonterm/verify.hpp"

using namespace nonterm;

static std::string fixture(const char* name) {
    return std::string(NONTERM_FIXTURE_DIR) + "/automata/" + name;
}

TEST_CASE("shipped certificates verify") {
    for (const char* name : {"P", "P3", "D1", "D2", "Phi", "Phi2", "S1", "S2"}) {
        const CombinatorRule* rule = find_builtin_rule(name);
        REQUIRE(rule != nullptr);
        TreeAutomaton a = parse_automaton_file(fixture((std::string(name) + ".ta").c_str()));
        VerificationReport report = verify_tdas(a, *rule);
        INFO("combinator ", name, "\n", report.summary());
        CHECK(report.passed());
        REQUIRE(report.conditions.size() == 4);
        CHECK(report.find("final-sink") != nullptr);
        CHECK(report.find("reachability") != nullptr);
        CHECK(report.find("nf-empty") != nullptr);
        CHECK(report.find("closure") != nullptr);
    }
}

TEST_CASE("a complete two-state certificate for self-application") {
    // W x -> x x loops on W W; the certificate accepts exactly the terms
    // with W W somewhere on the left spine of every innermost residue.
    CombinatorRule w = parse_rule("W x -> x x");
    TreeAutomaton a = parse_automaton(
        "states 2\n"
        "final 2\n"
        "sink 2\n"
        "Z -> 1\n"
        "A(1,1) -> 2\n");
    CHECK(verify_tdas(a, w).passed());
    auto t = smallest_accepted_term(a, w);
    REQUIRE(t.has_value());
    CHECK(print_term(*t, w) == "W W");
}

TEST_CASE("normal form intersection produces a witness") {
    const CombinatorRule& rule = *find_builtin_rule("P");
    TreeAutomaton good = parse_automaton_file(fixture("P.ta"));
    CHECK_FALSE(nf_intersection_witness(good, rule).has_value());

    // Let the leaf reach the final state: the automaton now accepts Z
    // itself, which is normal.
    TreeAutomaton bad = good;
    bad.leaf_targets |= state_bit(4);
    auto witness = nf_intersection_witness(bad, rule);
    REQUIRE(witness.has_value());
    CHECK(is_normal_form(*witness, rule));
    CHECK(accepts(bad, *witness));
    CHECK((*witness)->leaf_count() == 1);

    VerificationReport report = verify_tdas(bad, rule);
    CHECK_FALSE(report.passed());
    const ConditionResult* nf = report.find("nf-empty");
    REQUIRE(nf != nullptr);
    CHECK_FALSE(nf->passed);
    CHECK(nf->detail.find("P") != std::string::npos);
}

TEST_CASE("closure violations are reported with an assignment") {
    CombinatorRule w = parse_rule("W x -> x x");
    // A(1,2) -> 3 lets the lhs reach the sink from x := 2 while the rhs
    // x x has no run at all.
    TreeAutomaton a = parse_automaton(
        "states 3\n"
        "final 3\n"
        "sink 3\n"
        "Z -> 1\n"
        "A(1,1) -> 2\n"
        "A(1,2) -> 3\n");
    VerificationReport report = verify_tdas(a, w);
    CHECK_FALSE(report.passed());
    CHECK(report.find("final-sink")->passed);
    CHECK(report.find("reachability")->passed);
    CHECK(report.find("nf-empty")->passed);
    const ConditionResult* closure = report.find("closure");
    REQUIRE(closure != nullptr);
    CHECK_FALSE(closure->passed);

    auto witness = closure_check(a, w, ClosureVariant::InnermostSink);
    REQUIRE(witness.has_value());
    CHECK(witness->q == 3);
    CHECK(witness->var_states == std::vector<int>{2});
    CHECK(witness->to_string() == "state 3 under [x1:=2]");
}

TEST_CASE("strict closure is stronger than innermost closure") {
    const CombinatorRule& rule = *find_builtin_rule("D1");
    TreeAutomaton a = parse_automaton_file(fixture("D1.ta"));
    CHECK_FALSE(closure_check(a, rule, ClosureVariant::InnermostSink).has_value());
    // Assignments that touch the sink can break the unrestricted variants:
    // the rhs duplicates arguments into fresh applications whose runs may
    // be empty.
    CHECK(closure_check(a, rule, ClosureVariant::Strict).has_value());
    CHECK(closure_check(a, rule, ClosureVariant::EscapeToFinal).has_value());
}

TEST_CASE("innermost closure requires a sink certificate shape") {
    CombinatorRule w = parse_rule("W x -> x x");
    TreeAutomaton two_final = parse_automaton(
        "states 2\n"
        "final 1,2\n"
        "Z -> 1\n"
        "A(1,1) -> 2\n");
    CHECK_THROWS_AS(closure_check(two_final, w, ClosureVariant::InnermostSink), InvalidInput);
    TreeAutomaton not_sink = parse_automaton(
        "states 2\n"
        "final 2\n"
        "Z -> 1\n"
        "A(1,1) -> 2\n");
    CHECK_THROWS_AS(closure_check(not_sink, w, ClosureVariant::InnermostSink), InvalidInput);
}

TEST_CASE("verifying without the sink requirement") {
    CombinatorRule w = parse_rule("W x -> x x");
    // Final state 2 is not a sink (A(2,1) escapes back to 1) but every
    // lhs run escapes to the final state, which is the weaker closure.
    TreeAutomaton a = parse_automaton(
        "states 2\n"
        "final 2\n"
        "Z -> 1\n"
        "A(1,1) -> 2\n"
        "A(1,2) -> 2\n"
        "A(2,1) -> 1|2\n"
        "A(2,2) -> 2\n");
    CHECK(verify_tda(a, w).passed());

    VerificationReport strict = verify_tdas(a, w);
    CHECK_FALSE(strict.passed());
    CHECK_FALSE(strict.find("final-sink")->passed);
    // The sink-based closure check cannot run on this shape.
    CHECK_FALSE(strict.find("closure")->passed);
    CHECK(strict.find("closure")->detail.find("skipped") != std::string::npos);
}

TEST_CASE("verify_tda catches unreachable final states") {
    CombinatorRule w = parse_rule("W x -> x x");
    TreeAutomaton a = parse_automaton(
        "states 2\n"
        "final 2\n"
        "Z -> 1\n"
        "A(1,1) -> 1\n");
    VerificationReport report = verify_tda(a, w);
    CHECK_FALSE(report.passed());
    CHECK_FALSE(report.find("final-reachable")->passed);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chp/axioms.hh"
#include "chp/kernel.hh"
#include "chp/textio.hh"

using namespace chp;

namespace {

CheckReport run(const std::string& text) { return check_proof(parse_proof(text)); }

Decls rename_decls() {
    Parser p("real x, y; trace h, g; chan ch, dh; pred pc(trace);");
    p.parse_decls();
    return p.decls();
}

}  // namespace

TEST_CASE("axiom lookup and uniform substitution instantiate assign") {
    CheckReport r = run(
        "real x, y;\n"
        "func f(): real poly;\n"
        "pred p(real);\n"
        "step a1 axiom assign\n"
        "step u1 us a1 { f -> y + 1, p(.) -> . >= 2 }\n"
        "qed [x := y + 1] x >= 2 <-> y + 1 >= 2\n");
    CHECK(r.proved());
    CHECK(r.clean());
    CHECK(print_formula(r.conclusion) == "[x := y + 1] x >= 2 <-> y + 1 >= 2");
}

TEST_CASE("substitution clashes surface as step failures") {
    // The replacement for p reads x, which the assignment binds.
    CheckReport r = run(
        "real x, y;\n"
        "func f(): real poly;\n"
        "pred p(real);\n"
        "step a1 axiom assign\n"
        "step u1 us a1 { f -> y + 1, p(.) -> . >= x }\n"
        "qed [x := y + 1] x >= x <-> y + 1 >= x\n");
    CHECK(!r.proved());
    CHECK(r.failStep == "u1");
    CHECK(r.reason.find("clash") != std::string::npos);
}

TEST_CASE("modus ponens requires an exact antecedent") {
    CheckReport good = run(
        "real x;\n"
        "step h1 hyp x >= 0 -> x + 1 >= 0\n"
        "step h2 hyp x >= 0\n"
        "step m mp h1 h2\n"
        "qed x + 1 >= 0\n");
    CHECK(good.proved());
    CHECK(good.hypotheses.size() == 2);
    CHECK(!good.clean());

    CheckReport bad = run(
        "real x, y;\n"
        "step h1 hyp x >= 0 -> x + 1 >= 0\n"
        "step h2 hyp y >= 0\n"
        "step m mp h1 h2\n"
        "qed x + 1 >= 0\n");
    CHECK(!bad.proved());
    CHECK(bad.failStep == "m");
    CHECK(bad.reason.find("mismatch") != std::string::npos);
}

TEST_CASE("rule instantiation with the identity substitution reproduces the rule") {
    const AxiomEntry& acg = get_axiom("acG");
    CheckReport r = run(
        "prog a;\n"
        "spacepred P;\n"
        "spacepred A;\n"
        "spacepred C;\n"
        "setvar Cs : chan;\n"
        "setvar Vs : var;\n"
        "setvar Hs : var;\n"
        "step h hyp C{Cs}{Hs & TVar} & P{Cs}{Vs}\n"
        "step g rule acG { } h\n"
        "qed [a]{A{Cs}{Hs & TVar}, C{Cs}{Hs & TVar}} P{Cs}{Vs}\n");
    CHECK(r.proved());
    CHECK(syntactic_eq(r.conclusion, acg.conclusion));
}

TEST_CASE("rule instantiation rejects wrong premises and arities") {
    CheckReport wrong = run(
        "real x;\n"
        "prog a;\n"
        "spacepred P;\n"
        "spacepred A;\n"
        "spacepred C;\n"
        "setvar Cs : chan;\n"
        "setvar Vs : var;\n"
        "setvar Hs : var;\n"
        "step h hyp x >= 0\n"
        "step g rule acG { } h\n"
        "qed [a]{A{Cs}{Hs & TVar}, C{Cs}{Hs & TVar}} P{Cs}{Vs}\n");
    CHECK(!wrong.proved());
    CHECK(wrong.failStep == "g");

    CheckReport arity = run(
        "real x;\n"
        "step h hyp x >= 0\n"
        "step g rule MP { } h\n"
        "qed x >= 0\n");
    CHECK(!arity.proved());
    CHECK(arity.reason.find("premise") != std::string::npos);
}

TEST_CASE("axiom and rule step kinds are not interchangeable") {
    CheckReport r1 = run("real x;\nstep s axiom acG\nqed x >= 0\n");
    CHECK(!r1.proved());
    CHECK(r1.reason.find("rule") != std::string::npos);
    CheckReport r2 = run("real x;\nstep s rule assign { }\nqed x >= 0\n");
    CHECK(!r2.proved());
    CHECK(r2.reason.find("axiom") != std::string::npos);
}

TEST_CASE("uniform renaming transposes variables and channels globally") {
    Decls d = rename_decls();
    Atom x = Atom::real("x"), y = Atom::real("y");
    FormulaPtr f = parse_formula("[x := 5] x = 5", d);
    CHECK(print_formula(uniform_rename(f, x, y)) == "[y := 5] y = 5");

    FormulaPtr g = parse_formula("[ch(h)?x] pc({ch}, h)", d);
    CHECK(print_formula(uniform_rename(g, Atom::chan("ch"), Atom::chan("dh"))) ==
          "[dh(h)?x] pc({dh}, h)");

    // Identity transposition.
    CHECK(syntactic_eq(uniform_rename(f, x, x), f));

    // Primed twins move with their base variables.
    FormulaPtr pr = parse_formula("(x)' >= (y)'", d);
    CHECK(print_formula(uniform_rename(pr, x, y)) == "(y)' >= (x)'");
}

TEST_CASE("uniform renaming reaches set annotations") {
    Decls d;
    {
        Parser p("real x, y; trace h; chan ch, dh; prog a; spacepred P;");
        p.parse_decls();
        d = p.decls();
    }
    FormulaPtr f = parse_formula("[a{{ch}}{{x, h}}] P{{ch}}{{x}}", d);
    FormulaPtr r = uniform_rename(f, Atom::chan("ch"), Atom::chan("dh"));
    CHECK(syntactic_eq(r, parse_formula("[a{{dh}}{{x, h}}] P{{dh}}{{x}}", d)));
    FormulaPtr r2 = uniform_rename(f, Atom::real("x"), Atom::real("y"));
    CHECK(syntactic_eq(r2, parse_formula("[a{{ch}}{{y, h}}] P{{ch}}{{y}}", d)));
}

TEST_CASE("uniform renaming is an involution") {
    Decls d = rename_decls();
    for (const char* s :
         {"[x := 5] x = 5", "[ch(h)?x] pc({ch}, h)", "forall x (x >= y -> x + 1 >= y)",
          "[ch(h)!x ; dh(h)!y] h down {ch} = h down {dh}", "(x)' >= (y)'"}) {
        CAPTURE(s);
        FormulaPtr f = parse_formula(s, d);
        CHECK(syntactic_eq(uniform_rename(uniform_rename(f, Atom::real("x"), Atom::real("y")),
                                          Atom::real("x"), Atom::real("y")),
                           f));
        CHECK(syntactic_eq(
            uniform_rename(uniform_rename(f, Atom::chan("ch"), Atom::chan("dh")),
                           Atom::chan("ch"), Atom::chan("dh")),
            f));
    }
}

TEST_CASE("uniform renaming rejects mismatched pairs and the clock") {
    Decls d = rename_decls();
    FormulaPtr f = parse_formula("x >= 0", d);
    CHECK_THROWS_AS((void)uniform_rename(f, Atom::real("x"), Atom::trace("h")), sort_error);
    CHECK_THROWS_AS((void)uniform_rename(f, Atom::real("x"), Atom::chan("ch")), sort_error);
    CHECK_THROWS_AS((void)uniform_rename(f, Atom::real("x"), Atom::mu()), sort_error);
    CHECK_THROWS_AS((void)uniform_rename(f, Atom::real("x", true), Atom::real("y")),
                    sort_error);
}

TEST_CASE("tautology closure works over opaque atoms") {
    Decls d = rename_decls();
    auto pf = [&](const char* s) { return parse_formula(s, d); };
    CHECK(taut_entails({pf("x >= 0 -> y >= 0"), pf("x >= 0")}, pf("y >= 0")));
    CHECK(taut_entails({}, pf("x >= 0 | !(x >= 0)")));
    CHECK(!taut_entails({}, pf("x >= 0")));
    // Distinct modal atoms stay distinct.
    CHECK(!taut_entails({pf("[x := 5] x = 5")}, pf("[x := 4] x = 4")));
    // Truth-conjunct padding is propositionally transparent, including inside
    // contract and postcondition slots.
    CHECK(taut_entails({pf("[x := 5] (x = 5 & true)")}, pf("[x := 5] x = 5")));
    CHECK(taut_entails({pf("[x := 5] x = 5")}, pf("[x := 5] (x = 5 & true)")));
}

TEST_CASE("set, trace, and arithmetic discharge steps") {
    CheckReport sf = run(
        "chan ch, dh;\n"
        "step s setfact ch in {ch, dh}\n"
        "qed ch in {ch, dh}\n");
    CHECK(sf.proved());
    CHECK(sf.clean());

    CheckReport sfBad = run(
        "chan ch, dh;\n"
        "step s setfact dh in {ch}\n"
        "qed dh in {ch}\n");
    CHECK(!sfBad.proved());

    CheckReport tf = run(
        "chan ch; trace h;\n"
        "step s tracefact val((h . <ch, 4, 2>) down {ch}) = val(h down {ch} . <ch, 4, 2>)\n"
        "qed val((h . <ch, 4, 2>) down {ch}) = val(h down {ch} . <ch, 4, 2>)\n");
    CHECK(tf.proved());

    CheckReport ar = run(
        "real x;\n"
        "step s arith 4 >= 2\n"
        "qed 4 >= 2\n");
    CHECK(ar.proved());
    CHECK(ar.tainted == std::vector<std::string>{"s"});
    CHECK(!ar.clean());

    CheckReport arBad = run(
        "trace h;\n"
        "step s arith len(h) >= 0\n"
        "qed len(h) >= 0\n");
    CHECK(!arBad.proved());
    CHECK(arBad.reason.find("oracle") != std::string::npos);
}

TEST_CASE("bundled monotonicity derivation replays and registers a rule") {
    CheckReport r = replay_derived("acMono");
    CHECK(r.proved());
    CHECK(r.hypotheses.size() == 3);
    CHECK(r.tainted.empty());

    // The registered rule is immediately usable through RuleInst.
    CheckReport use = run(
        "real x;\n"
        "prog a;\n"
        "spacepred A1;\nspacepred A2;\nspacepred C1;\nspacepred C2;\n"
        "spacepred P1;\nspacepred P2;\n"
        "step t1 taut true -> true\n"
        "step t2 taut x = 1 -> (x = 1 | x >= 2)\n"
        "step r rule acMono { A1 -> (true), A2 -> (true), C1 -> (true), C2 -> (true), "
        "P1 -> (x = 1), P2 -> (x = 1 | x >= 2) } t1 t1 t2\n"
        "qed [a]{true, true} x = 1 -> [a]{true, true} (x = 1 | x >= 2)\n");
    CHECK(use.proved());
    CHECK(use.clean());
}

TEST_CASE("bundled box-distribution derivation replays cleanly") {
    CheckReport r = replay_derived("acBoxesDist");
    CHECK(r.proved());
    CHECK(r.clean());

    // Registered as a derived axiom: an axiom step followed by US specializes it.
    CheckReport use = run(
        "real x, y;\n"
        "prog a;\n"
        "spacepred A;\nspacepred C1;\nspacepred C2;\nspacepred P1;\nspacepred P2;\n"
        "step b axiom acBoxesDist\n"
        "step u us b { A -> (true), C1 -> (true), C2 -> (true), P1 -> (x >= 0), "
        "P2 -> (y >= 0) }\n"
        "qed [a]{true, true & true} (x >= 0 & y >= 0) <-> [a]{true, true} x >= 0 & "
        "[a]{true, true} y >= 0\n");
    CHECK(use.proved());
}

TEST_CASE("replay of the derived scripts is deterministic") {
    for (const char* id : {"acMono", "acBoxesDist"}) {
        CAPTURE(id);
        ProofScript sc = parse_proof(derived_script_text(id));
        CheckReport a = check_proof(sc);
        CheckReport b = check_proof(sc);
        CHECK(a.proved());
        CHECK(b.proved());
        CHECK(syntactic_eq(a.conclusion, b.conclusion));
        CHECK(a.tainted == b.tainted);
        CHECK(a.hypotheses == b.hypotheses);
    }
}

TEST_CASE("mutating any step of a passing script never silently proves the claim") {
    for (const char* id : {"acMono", "acBoxesDist"}) {
        CAPTURE(id);
        ProofScript original = parse_proof(derived_script_text(id));
        CheckReport base = check_proof(original);
        REQUIRE(base.proved());

        // Drop each step in turn.
        for (size_t i = 0; i < original.steps.size(); i++) {
            ProofScript m = original;
            m.steps.erase(m.steps.begin() + static_cast<long>(i));
            CheckReport r = check_proof(m);
            CAPTURE(i);
            CHECK((!r.proved() || !syntactic_eq(r.conclusion, base.conclusion)));
        }
        // Negate each stated goal in turn.
        for (size_t i = 0; i < original.steps.size(); i++) {
            if (!original.steps[i].goal) continue;
            ProofScript m = original;
            m.steps[i].goal = Formula::lnot(m.steps[i].goal);
            CheckReport r = check_proof(m);
            CAPTURE(i);
            CHECK((!r.proved() || !syntactic_eq(r.conclusion, base.conclusion)));
        }
        // Swap the claim.
        ProofScript m = original;
        m.claim = Formula::lnot(m.claim);
        CHECK(!check_proof(m).proved());
    }
}

TEST_CASE("scripts with malformed structure fail with located reasons") {
    CheckReport dup = run(
        "real x;\n"
        "step s hyp x >= 0\n"
        "step s hyp x >= 1\n"
        "qed x >= 1\n");
    CHECK(!dup.proved());
    CHECK(dup.reason.find("duplicate") != std::string::npos);

    CheckReport forward = run(
        "real x;\n"
        "step m mp later later\n"
        "step later hyp x >= 0\n"
        "qed x >= 0\n");
    CHECK(!forward.proved());
    CHECK(forward.failStep == "m");

    CheckReport unknown = run("real x;\nstep s axiom nosuch\nqed x >= 0\n");
    CHECK(!unknown.proved());
    CHECK(unknown.reason.find("unknown axiom") != std::string::npos);

    CheckReport claimMismatch = run(
        "real x;\n"
        "step s hyp x >= 0\n"
        "qed x >= 1\n");
    CHECK(!claimMismatch.proved());
    CHECK(claimMismatch.reason.find("claim") != std::string::npos);
}

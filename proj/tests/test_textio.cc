#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chp/statics.hh"
#include "chp/textio.hh"

using namespace chp;

namespace {

const char* kHeader =
    "real x, y, z; int n, m; trace h, g; chan ch, dh, gh;\n"
    "func f(real): real; func c0(): real poly; func idx(int): int;\n"
    "func tr(trace): trace;\n"
    "pred p(trace); pred q(real) folr; pred r() folr;\n"
    "spacepred P; spacepred Q;\n"
    "prog a; prog b;\n"
    "setvar C : chan; setvar V : var;\n";

Decls header_decls() {
    Parser p(kHeader);
    p.parse_decls();
    return p.decls();
}

FormulaPtr pf(const std::string& s) {
    Decls d = header_decls();
    return parse_formula(s, d);
}
TermPtr pt(const std::string& s) {
    Decls d = header_decls();
    return parse_term(s, d);
}
ProgramPtr pp(const std::string& s) {
    Decls d = header_decls();
    return parse_program(s, d);
}

void roundtrip_t(const std::string& s) {
    TermPtr t = pt(s);
    std::string printed = print_term(t);
    CAPTURE(s);
    CAPTURE(printed);
    CHECK(syntactic_eq(t, pt(printed)));
}
void roundtrip_f(const std::string& s) {
    FormulaPtr f = pf(s);
    std::string printed = print_formula(f);
    CAPTURE(s);
    CAPTURE(printed);
    CHECK(syntactic_eq(f, pf(printed)));
}
void roundtrip_p(const std::string& s) {
    ProgramPtr p = pp(s);
    std::string printed = print_program(p);
    CAPTURE(s);
    CAPTURE(printed);
    CHECK(syntactic_eq(p, pp(printed)));
}

}  // namespace

TEST_CASE("terms parse and print canonically") {
    CHECK(print_term(pt("x+ (y *z)")) == "x + y * z");
    CHECK(print_term(pt("(x + y) * z")) == "(x + y) * z");
    CHECK(print_term(pt("1/2 + x")) == "1/2 + x");
    CHECK(print_term(pt("-3 * x")) == "-3 * x");
    CHECK(print_term(pt("val(h down {ch})")) == "val(h down {ch})");
    CHECK(print_term(pt("h . <ch, x, mu>")) == "h . <ch, x, mu>");
    CHECK(print_term(pt("(h . g) down {ch, dh}")) == "(h . g) down {ch,dh}");
    CHECK(print_term(pt("h[n + 1]")) == "h[n + 1]");
    CHECK(print_term(pt("(x*y)'")) == "(x * y)'");
    CHECK(print_term(pt("len(h)")) == "len(h)");
    CHECK(print_term(pt("f(x + 1)")) == "f(x + 1)");
    CHECK(print_term(pt("f({ch}, x)")) == "f({ch}, x)");
    CHECK(print_term(pt("c0")) == "c0");
    CHECK(print_term(pt("eps")) == "eps");
}

TEST_CASE("term sort checking through the parser") {
    CHECK(pt("n + 1")->sort == Sort::Int);
    CHECK(pt("n + 1")->kind == Term::Kind::IntPlus);
    CHECK(pt("x + 1")->kind == Term::Kind::Plus);
    CHECK(pt("chanof(h)")->sort == Sort::Channel);
    CHECK_THROWS(pt("x + h"));
    CHECK_THROWS(pt("val(x)"));
    CHECK_THROWS(pt("undeclared"));
}

TEST_CASE("term round trips") {
    for (const char* s :
         {"x + y * z + 1", "x' + mu'", "(x)'", "stamp(tr(h) down {ch})",
          "h . g . tr(g)", "(h down C) down (C & {ch})", "h[0][1]",
          "val(h down (~{dh}))", "idx(n + -2)", "f({ch} | C, x * x)",
          "<ch, 4, mu> . eps"})
        roundtrip_t(s);
}

TEST_CASE("formulas parse and print canonically") {
    CHECK(print_formula(pf("x >= 0 & y >= 0 -> x + y >= 0")) ==
          "x >= 0 & y >= 0 -> x + y >= 0");
    CHECK(print_formula(pf("!(x = 1)")) == "!(x = 1)");
    CHECK(print_formula(pf("true")) == "true");
    CHECK(print_formula(pf("false")) == "false");
    CHECK(print_formula(pf("x <= y")) == "y >= x");
    CHECK(print_formula(pf("forall x x >= 0")) == "forall x x >= 0");
    CHECK(print_formula(pf("exists x x >= 0")) == "exists x x >= 0");
    CHECK(print_formula(pf("[a] r()")) == "[a] r");
    CHECK(print_formula(pf("<a> r()")) == "<a> r");
    CHECK(print_formula(pf("h pre g")) == "h pre g");
    CHECK(print_formula(pf("chanof(h) in {ch}")) == "chanof(h) in {ch}");
    CHECK(print_formula(pf("{ch} = C")) == "{ch} = C");
    CHECK(print_formula(pf("P{C}{RVar}")) == "P{C}{RVar}");
    CHECK(print_formula(pf("P")) == "P");
}

TEST_CASE("derived connectives expand to the core") {
    CHECK(syntactic_eq(pf("p(h) | q(x)"), Formula::lor(pf("p(h)"), pf("q(x)"))));
    CHECK(syntactic_eq(pf("p(h) -> q(x)"), Formula::imply(pf("p(h)"), pf("q(x)"))));
    CHECK(syntactic_eq(pf("p(h) <-> q(x)"), Formula::equiv(pf("p(h)"), pf("q(x)"))));
    CHECK(syntactic_eq(pf("true"), Formula::truth()));
    CHECK(syntactic_eq(pf("<a> r()"),
                       Formula::diamond(pp("a"), pf("r()"))));
    // implication is right-associative, equivalence groups left
    CHECK(syntactic_eq(pf("r() -> r() -> r()"),
                       Formula::imply(pf("r()"), Formula::imply(pf("r()"), pf("r()")))));
}

TEST_CASE("formula round trips") {
    for (const char* s :
         {"[ch(h)!4 || ch(h)?x] 4 = x",
          "[ch(h)!4 || ch(h)?x] 4 = val(h down {ch})",
          "[a]{P, Q} p(h)", "<a>{P, Q} p(h)",
          "[x := x + 1 ; a*] q(x)",
          "forall x (q(x) -> exists y y >= x)",
          "p(h) & (q(x) | r()) <-> !r()",
          "[{x' = 1, y' = x & q(x)}] q(y)",
          "[(ch(h)!x ; a) || (ch(g)?y ; b)] val(h down {ch}) = y",
          "P{~{ch}}{RVar \\ {x}} -> [a{~{}}{RVar | TVar}] P",
          "len(h down C) >= 0",
          "h down (C | {ch}) pre g",
          "!(h pre g)", "!p(h)",
          "q(1/2) & x >= -1"})
        roundtrip_f(s);
}

TEST_CASE("programs parse and print canonically") {
    CHECK(print_program(pp("x := x + 1")) == "x := x + 1");
    CHECK(print_program(pp("x := *")) == "x := *");
    CHECK(print_program(pp("?x >= 0")) == "?x >= 0");
    CHECK(print_program(pp("?(q(x) & r())")) == "?(q(x) & r)");
    CHECK(print_program(pp("ch(h)!x + 1")) == "ch(h)!x + 1");
    CHECK(print_program(pp("ch(h)?x")) == "ch(h)?x");
    CHECK(print_program(pp("a ; b ++ a")) == "a ; b ++ a");
    CHECK(print_program(pp("a ; (b ++ a)")) == "a ; (b ++ a)");
    CHECK(print_program(pp("(x := 1)*")) == "(x := 1)*");
    CHECK(print_program(pp("a*")) == "a*");
    CHECK(print_program(pp("a || b ; a")) == "a || b ; a");
    CHECK(print_program(pp("{x' = 1 & true}")) == "{x' = 1 & true}");
    CHECK(print_program(pp("a{~{}}{RVar | TVar}")) == "a");
    CHECK(print_program(pp("a{{ch}}{{x} | TVar}")) == "a{{ch}}{TVar | {x}}");
}

TEST_CASE("program round trips") {
    for (const char* s :
         {"x := 1 ; ch(h)!x ; {x' = x & x >= 0}",
          "(ch(h)!4 ++ dh(h)!5)* || gh(g)?z",
          "?(q(x) -> r()) ; x := *",
          "a{C}{V} ; b{{ch}}{RVar}",
          "{x' = y, y' = -1 * x & q(x) & q(y)}",
          "(a ; b)* ; ?true"})
        roundtrip_p(s);
}

TEST_CASE("operator precedence in programs") {
    // '||' binds loosest, then '++', then ';', then '*'
    ProgramPtr p = pp("a ; b ++ a ; b || a");
    CHECK(p->kind == Program::Kind::Par);
    CHECK(p->p1->kind == Program::Kind::Choice);
    CHECK(p->p1->p1->kind == Program::Kind::Seq);
    ProgramPtr st = pp("a ; b*");
    CHECK(st->kind == Program::Kind::Seq);
    CHECK(st->p2->kind == Program::Kind::Star);
}

TEST_CASE("substitution parsing") {
    Decls d = header_decls();
    Substitution s = parse_substitution(
        "f(.) -> . + 1, p(.) -> len(.) >= 0\n"
        "a -> x := 1 ; ch(h)!x\n"
        "C -> {ch, dh}, P -> q(x)", d);
    REQUIRE(s.funcs.count("f"));
    CHECK(print_term(s.funcs.at("f")) == ". + 1");
    REQUIRE(s.preds.count("p"));
    CHECK(print_formula(s.preds.at("p")) == "len(.) >= 0");
    REQUIRE(s.progs.count("a"));
    CHECK(print_program(s.progs.at("a")) == "x := 1 ; ch(h)!x");
    REQUIRE(s.setVars.count("C"));
    CHECK(print_set(s.setVars.at("C")) == "{ch,dh}");
    REQUIRE(s.spacePreds.count("P"));

    // dotted replacement with two arguments, index selects the argument sort
    Decls d2 = header_decls();
    Parser extra("pred p2(real, real);", d2);
    extra.parse_decls();
    d2 = extra.decls();
    Substitution s2 = parse_substitution("p2(.,.) -> .0 >= .1", d2);
    CHECK(print_formula(s2.preds.at("p2")) == ". >= .1");

    // dots are rejected outside substitution replacements
    Decls d3 = header_decls();
    CHECK_THROWS_AS(parse_term(". + 1", d3), parse_error);
}

TEST_CASE("proof script parsing") {
    ProofScript sc = parse_proof(
        "real x; chan ch; trace h; pred q(real) folr; prog a;\n"
        "step s1 axiom assign\n"
        "step s2 us s1 { q(.) -> . >= 0 }\n"
        "step s3 taut q(x) -> q(x)\n"
        "step s4 mp s3 s2\n"
        "step s5 rename s2 x <-> x\n"
        "step s6 hyp q(x)\n"
        "step s7 arith x + 0 = x\n"
        "step s8 tracefact h down {ch} = h down {ch}\n"
        "qed q(x)\n");
    REQUIRE(sc.steps.size() == 8);
    CHECK(sc.steps[0].kind == ProofStep::Kind::Axiom);
    CHECK(sc.steps[0].name == "assign");
    CHECK(sc.steps[1].kind == ProofStep::Kind::US);
    CHECK(sc.steps[1].ref1 == "s1");
    CHECK(sc.steps[1].sigma.preds.count("q"));
    CHECK(sc.steps[3].kind == ProofStep::Kind::MP);
    CHECK(sc.steps[3].ref2 == "s2");
    CHECK(sc.steps[4].kind == ProofStep::Kind::Rename);
    CHECK(sc.steps[5].kind == ProofStep::Kind::Hyp);
    CHECK(sc.steps[6].kind == ProofStep::Kind::Arith);
    CHECK(sc.steps[7].kind == ProofStep::Kind::TraceFact);
    CHECK(sc.claim != nullptr);
    CHECK(print_formula(sc.claim) == "q(x)");
}

TEST_CASE("parse errors carry locations") {
    Decls d = header_decls();
    try {
        parse_formula("x >= (y +", d);
        FAIL("expected a parse error");
    } catch (const parse_error& e) {
        CHECK(e.diag.line == 1);
        CHECK(e.diag.col >= 9);
    }
    CHECK_THROWS_AS(pf("x >="), parse_error);
    CHECK_THROWS_AS(pp("x := "), parse_error);
    CHECK_THROWS_AS(pf(""), parse_error);
}

TEST_CASE("printed output re-sort-checks") {
    FormulaPtr f = pf("[ch(h)!4 || ch(h)?x]{p(h), q(x)} val(h down {ch}) = x");
    sort_check(f);
    FormulaPtr g = pf(print_formula(f));
    sort_check(g);
    CHECK(syntactic_eq(f, g));
}

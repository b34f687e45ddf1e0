// Acceptance suite: one pass/fail line per criterion, covering the clash
// fixtures, the bundled golden derivations, the derived-rule replays, the
// substitution property corpus, oracle validation of axiom instances, the
// trace and set algebra, statics-vs-semantics properties, and mutation
// resistance of the proof checker.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chp/axioms.hh"
#include "chp/kernel.hh"
#include "chp/oracle.hh"
#include "chp/statics.hh"
#include "chp/textio.hh"
#include "chp/usubst.hh"
#include "support.hh"

using namespace chp;

namespace {

// Runs one criterion body, prints exactly one pass/fail line, and reports
// each collected failure through doctest.
struct Criterion {
    int num;
    std::string title;
    std::vector<std::string> failures;

    Criterion(int n, std::string t) : num(n), title(std::move(t)) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }

    void run(const std::function<void(Criterion&)>& body) {
        try {
            body(*this);
        } catch (const std::exception& e) {
            failures.push_back(std::string("unexpected exception: ") + e.what());
        }
        std::printf("criterion %2d  %-58s %s\n", num, title.c_str(),
                    failures.empty() ? "PASS" : "FAIL");
        std::fflush(stdout);
        for (const std::string& f : failures) FAIL_CHECK("criterion " << num << ": " << f);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string proof_path(const char* name) {
    return std::string(CHP_SOURCE_DIR) + "/proofs/" + name;
}

// The property corpus shared by the three substitution criteria.
const support::CorpusStats& corpus() {
    static support::CorpusStats st = support::run_corpus(2026, 1000);
    return st;
}

OracleConfig real_config() {
    OracleConfig cfg;
    std::vector<Value> dom;
    for (int k : {-1, 0, 1, 4}) dom.push_back(Value::real(Rat(k)));
    for (const char* v : {"x", "y", "z"}) cfg.domains[Atom::real(v)] = dom;
    return cfg;
}

Comm comm(const char* ch, int value, int stamp) {
    return Comm{Atom::chan(ch), Rat(value), Rat(stamp)};
}

FormulaPtr instantiate(const std::string& axiomId, const Substitution& sigma) {
    return usub_formula(sigma, Taboo::none(), get_axiom(axiomId).conclusion);
}

// ---------------------------------------------------------------------------
// Mutation machinery

// Step ids that transitively feed the final step (mutating any of them must
// break the proof or change its conclusion).
std::set<std::string> used_ids(const ProofScript& s) {
    std::map<std::string, const ProofStep*> byId;
    for (const ProofStep& st : s.steps) byId[st.id] = &st;
    std::set<std::string> used;
    std::vector<std::string> work{s.steps.back().id};
    while (!work.empty()) {
        std::string id = work.back();
        work.pop_back();
        if (!used.insert(id).second) continue;
        auto it = byId.find(id);
        if (it == byId.end()) continue;
        const ProofStep* st = it->second;
        if (!st->ref1.empty()) work.push_back(st->ref1);
        if (!st->ref2.empty()) work.push_back(st->ref2);
        for (const std::string& r : st->refs) work.push_back(r);
    }
    return used;
}

void mutate_script(const std::string& name, const std::string& text, Criterion& c,
                   std::mt19937& rng) {
    ProofScript orig = parse_proof(text);
    CheckReport base = check_proof(orig);
    c.expect(base.proved(), name + ": baseline script does not replay");
    std::set<std::string> used = used_ids(orig);
    std::vector<size_t> candidates;
    for (size_t i = 0; i < orig.steps.size(); i++)
        if (used.count(orig.steps[i].id)) candidates.push_back(i);
    c.expect(!candidates.empty(), name + ": no mutable steps");
    if (candidates.empty()) return;

    std::vector<std::string> ids = axiom_ids();
    for (int trial = 0; trial < 50; trial++) {
        ProofScript m = orig;
        unsigned what = rng() % 10;
        if (what == 0) {
            m.claim = Formula::lnot(m.claim);
        } else if (what == 1) {
            size_t at = candidates[rng() % candidates.size()];
            m.steps.erase(m.steps.begin() + static_cast<long>(at));
        } else {
            ProofStep& st = m.steps[candidates[rng() % candidates.size()]];
            switch (st.kind) {
                case ProofStep::Kind::Axiom:
                case ProofStep::Kind::RuleInst: {
                    std::string other;
                    do {
                        other = ids[rng() % ids.size()];
                    } while (other == st.name);
                    st.name = other;
                    break;
                }
                case ProofStep::Kind::US:
                    if (st.sigma.empty())
                        m.claim = Formula::lnot(m.claim);
                    else
                        st.sigma = Substitution{};
                    break;
                case ProofStep::Kind::MP:
                    std::swap(st.ref1, st.ref2);
                    break;
                case ProofStep::Kind::Taut:
                case ProofStep::Kind::SetFact:
                case ProofStep::Kind::TraceFact:
                case ProofStep::Kind::Arith:
                case ProofStep::Kind::Hyp:
                    st.goal = Formula::lnot(st.goal);
                    break;
                case ProofStep::Kind::Rename:
                    m.claim = Formula::lnot(m.claim);
                    break;
            }
        }
        CheckReport rep;
        try {
            rep = check_proof(m);
        } catch (const std::exception&) {
            continue;  // rejected
        }
        bool silent = rep.proved() && syntactic_eq(rep.conclusion, orig.claim);
        c.expect(!silent,
                 name + ": mutation " + std::to_string(trial) + " silently proved the claim");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Parallel-injection clash fixtures

TEST_CASE("clash fixtures") {
    Criterion(1, "parallel-injection clash fixtures").run([](Criterion& c) {
        const FormulaPtr axiom = get_axiom("acDropComp").conclusion;
        Decls d = support::test_decls();

        bool clashed = false;
        try {
            usub_formula(support::dropcomp_sigma_clash_chan(), Taboo::none(), axiom);
        } catch (const clash_error& e) {
            clashed = true;
            c.expect(e.clash.detail.find("ch") != std::string::npos,
                     "channel clash does not name ch: " + e.clash.detail);
        }
        c.expect(clashed, "jointly free channel did not clash");

        FormulaPtr inst = usub_formula(support::dropcomp_sigma_ok(), Taboo::none(), axiom);
        FormulaPtr expected = parse_formula(
            "[ch(h)?x ; gh(h)!1]{true, true} ((len(h down {ch}) >= 1 & "
            "len(h down {dh}) >= 1) & 0 >= y) -> "
            "[(ch(h)?x ; gh(h)!1) || ch(h)!2]{true, true} ((len(h down {ch}) >= 1 & "
            "len(h down {dh}) >= 1) & 0 >= y)",
            d);
        c.expect(syntactic_eq(inst, expected), "joint-communication instance mismatch");
        c.expect(check_wellformed(inst).empty(), "instance fails well-formedness");

        FormulaPtr half =
            usub_formula(support::dropcomp_sigma_sets_only(), Taboo::none(), axiom);
        c.expect(print_formula(half).find("~{dh}") != std::string::npos,
                 "half instantiation does not print the normalized bound ~{dh}");

        bool varClash = false;
        try {
            usub_formula(support::dropcomp_sigma_clash_var(), Taboo::none(), axiom);
        } catch (const clash_error&) {
            varClash = true;
        }
        c.expect(varClash, "doubly bound variable did not clash");
    });
}

// ---------------------------------------------------------------------------
// 2. Golden derivation replay

TEST_CASE("golden derivation") {
    Criterion(2, "parallel value-exchange derivation replays").run([](Criterion& c) {
        std::string mainText = slurp(proof_path("par_exchange.proof"));
        std::string sideText = slurp(proof_path("send_value.proof"));
        c.expect(!mainText.empty() && !sideText.empty(), "bundled proof scripts missing");

        ProofScript mainS = parse_proof(mainText);
        ProofScript sideS = parse_proof(sideText);
        CheckReport mr = check_proof(mainS);
        CheckReport sr = check_proof(sideS);

        c.expect(mr.proved(), "main script failed at step " + mr.failStep + ": " + mr.reason);
        c.expect(mr.hypotheses.size() == 1, "main script should carry exactly one hypothesis");
        c.expect(mr.conclusion &&
                     print_formula(mr.conclusion) == "[ch(h)!4 || ch(h)?x] 4 = x",
                 "main conclusion mismatch");
        for (const char* needed : {"rule acMono", "acBoxesDist", "acDropComp", " us ", " mp "})
            c.expect(mainText.find(needed) != std::string::npos,
                     std::string("main script does not use ") + needed);

        FormulaPtr hypF;
        if (mr.hypotheses.size() == 1)
            for (const ProofStep& st : mainS.steps)
                if (st.kind == ProofStep::Kind::Hyp && st.id == mr.hypotheses[0])
                    hypF = st.goal;
        c.expect(hypF && syntactic_eq(hypF, sideS.claim),
                 "hypothesis is not the claim of the discharge script");

        c.expect(sr.proved(), "discharge script failed at step " + sr.failStep + ": " +
                                  sr.reason);
        c.expect(sr.hypotheses.empty(), "discharge script must be hypothesis-free");
        for (const char* needed : {"axiom send", "axiom acCom"})
            c.expect(sideText.find(needed) != std::string::npos,
                     std::string("discharge script does not use ") + needed);
    });
}

// ---------------------------------------------------------------------------
// 3. Derived rules

TEST_CASE("derived rules replay") {
    Criterion(3, "monotonicity and box-distribution replays").run([](Criterion& c) {
        const std::set<std::string> allowed = {"acG",  "acModalMP", "assumptionWeak",
                                               "acWeak", "acMono",  "MP"};
        for (const char* id : {"acMono", "acBoxesDist"}) {
            CheckReport r = replay_derived(id);
            c.expect(r.proved(),
                     std::string(id) + " replay failed at " + r.failStep + ": " + r.reason);
            c.expect(r.tainted.empty(), std::string(id) + " replay is tainted");
            ProofScript s = parse_proof(derived_script_text(id));
            for (const ProofStep& st : s.steps)
                if (st.kind == ProofStep::Kind::Axiom || st.kind == ProofStep::Kind::RuleInst)
                    c.expect(allowed.count(st.name) == 1,
                             std::string(id) + " uses unexpected entry " + st.name);
        }
    });
}

// ---------------------------------------------------------------------------
// 4-6. Substitution property corpus

TEST_CASE("output taboo property") {
    Criterion(4, "output taboo covers taboo, binds, and channels").run([](Criterion& c) {
        const support::CorpusStats& st = corpus();
        c.expect(st.generated == 1000, "corpus under-generated: " +
                                           std::to_string(st.generated));
        c.expect(st.successes >= 200, "too few successful substitutions: " +
                                          std::to_string(st.successes));
        c.expect(st.outputTabooBad == 0,
                 std::to_string(st.outputTabooBad) + " output-taboo violations");
    });
}

TEST_CASE("well-formed outputs property") {
    Criterion(5, "substitution outputs stay well-formed").run([](Criterion& c) {
        c.expect(corpus().wellformedBad == 0,
                 std::to_string(corpus().wellformedBad) + " well-formedness violations");
    });
}

TEST_CASE("taboo independence property") {
    Criterion(6, "results independent of taboo; loops stable").run([](Criterion& c) {
        c.expect(corpus().independenceBad == 0,
                 std::to_string(corpus().independenceBad) + " taboo-dependence violations");

        // The loop clause's second pass runs under the output taboo; feeding
        // that taboo back in as the input taboo must reproduce the result.
        Decls d = support::test_decls();
        Substitution s = support::subst("q -> (y >= 0)");
        ProgramPtr star = parse_program("(?q() ; x := 1)*", d);
        ProgSubstResult r1 =
            usub_program(s, Taboo::none(), GroundSet::empty(Universe::Vars), star);
        ProgSubstResult r2 = usub_program(s, r1.out, GroundSet::empty(Universe::Vars), star);
        c.expect(syntactic_eq(r1.prog, r2.prog),
                 "loop substitution unstable under its own output taboo");
    });
}

// ---------------------------------------------------------------------------
// 7. Oracle validity of discrete axiom instances

TEST_CASE("axiom instances valid on samples") {
    Criterion(7, "discrete axiom instances valid on sampled states").run([](Criterion& c) {
        OracleConfig cfg = real_config();
        std::vector<State> grid =
            state_grid(cfg, {Atom::real("x"), Atom::real("y"), Atom::real("z")});
        c.expect(grid.size() == 64, "default grid size is not 64");

        struct Inst {
            const char* id;
            const char* sigma;
        };
        const std::vector<Inst> instances = {
            {"assign", "f -> y * y + 1, p -> (. >= y)"},
            {"nondetAssign", "P -> (x * x >= y), Cs -> ~{}, Vs -> ~{}"},
            {"test", "q -> (x >= 0), P -> (y = 1), Cs -> ~{}, Vs -> ~{}"},
            {"boxesDual",
             "a -> ch(h)!x, P -> (val(h down {ch}) >= y), Cs -> ~{}, Vs -> ~{}"},
            {"acComposition",
             "a -> ch(h)!x, b -> mu := mu + 1 ; ch(h)!y, A -> (val(h) >= 0), "
             "C -> (stamp(h) >= 0), P -> (len(h down {ch}) >= 2), Cs -> ~{}, Vs -> ~{}, "
             "Hs -> ~{}"},
            {"acChoice",
             "a -> x := 1, b -> ch(h)!2, A -> (val(h) >= 0), C -> (val(h) = 2), "
             "P -> (x >= 0), Cs -> ~{}, Vs -> ~{}, Hs -> ~{}"},
            {"acNoCom",
             "a -> x := y ++ y := x * x, A -> (val(h) >= 1), C -> (val(h) >= 0), "
             "P -> (y >= 0), Cs -> ~{}, Vs -> ~{}, Hs -> ~{}"},
            {"acWeak",
             "a -> ch(h)?x, A -> (val(h) >= 1), C -> (stamp(h) >= 0), P -> (x >= 1), "
             "Cs -> ~{}, Vs -> ~{}, Hs -> ~{}"},
            {"acCom",
             "f -> y + 1, qa -> (val(.) >= 0), qc -> (len(.) >= 0), pa -> (val(.) >= y)"},
            {"comDual",
             "qa -> (len(.) >= 0), qc -> (stamp(.) >= 0), pr -> (val(.0) = .1)"},
            {"acModalMP",
             "a -> ch(h)?x, A -> (val(h) >= 0), C1 -> (len(h) >= 0), "
             "C2 -> (stamp(h) >= 0), P1 -> (x >= 0), P2 -> (x * x >= 0), Cs -> ~{}, "
             "Vs -> ~{}, Hs -> ~{}"},
            {"assumptionWeak",
             "a -> ch(h)?x, A -> (val(h) >= 0), A1 -> (len(h) >= 0), A2 -> (val(h) >= 0), "
             "C1 -> (stamp(h) >= 0), C2 -> (len(h) >= 0), P -> (x >= 0), Cs -> ~{}, "
             "Vs -> ~{}, Hs -> ~{}"},
            {"parComm",
             "a -> ch(h)!4, b -> ch(h)?x, A -> (val(h) >= 0), C -> (len(h) >= 0), "
             "P -> (4 = x), Ca -> {ch}, Va -> {h}, Cp -> {ch}, Cs -> ~{}, Vs -> ~{}, "
             "Hs -> ~{}"},
            {"eqSubR", "e1 -> x, e2 -> y, p -> (. >= z)"},
        };

        int covered = 0;
        Interp I;
        for (const Inst& in : instances) {
            FormulaPtr inst = instantiate(in.id, support::subst(in.sigma));
            c.expect(check_wellformed(inst).empty(),
                     std::string(in.id) + ": instance not well-formed");
            SampleReport rep = validate_on_samples(I, inst, cfg, grid);
            c.expect(rep.valid, std::string(in.id) + ": " + rep.note);
            covered++;
        }

        // send quantifies over the recorder's successor trace; its sample
        // domain must contain the appended trace for every sampled payload.
        {
            OracleConfig scfg = cfg;
            std::vector<Value> traces = {Value::trace({})};
            for (int k : {-1, 0, 1, 4}) traces.push_back(Value::trace({comm("ch", k, 0)}));
            scfg.domains[Atom::trace("h0")] = traces;
            FormulaPtr inst =
                instantiate("send", support::subst("f -> y, pc -> (val(.) >= y)"));
            SampleReport rep = validate_on_samples(Interp{}, inst, scfg, grid);
            c.expect(rep.valid, std::string("send: ") + rep.note);
            covered++;
        }

        // The parallel-injection instance reuses the joint-communication
        // fixture of criterion 1.
        {
            FormulaPtr inst = usub_formula(support::dropcomp_sigma_ok(), Taboo::none(),
                                           get_axiom("acDropComp").conclusion);
            SampleReport rep = validate_on_samples(Interp{}, inst, cfg, grid);
            c.expect(rep.valid, std::string("acDropComp: ") + rep.note);
            covered++;
        }

        // The trace-substitution schema needs trace-valued sample domains.
        {
            OracleConfig tcfg;
            std::vector<Value> reals;
            for (int k : {-1, 0, 1, 4}) reals.push_back(Value::real(Rat(k)));
            tcfg.domains[Atom::real("x")] = reals;
            std::vector<Value> traces = {
                Value::trace({}), Value::trace({comm("ch", 1, 0)}),
                Value::trace({comm("dh", 2, 0)}),
                Value::trace({comm("ch", 1, 0), comm("dh", 2, 1)})};
            tcfg.domains[Atom::trace("h")] = traces;
            tcfg.domains[Atom::trace("h0")] = traces;
            std::vector<State> tgrid = state_grid(
                tcfg, {Atom::trace("h"), Atom::trace("h0"), Atom::real("x")});
            c.expect(tgrid.size() == 64, "trace grid size is not 64");
            FormulaPtr inst = instantiate(
                "eqSubT", support::subst("tf1 -> h, tf2 -> h0, pc -> (len(.) >= 1)"));
            SampleReport rep = validate_on_samples(Interp{}, inst, tcfg, tgrid);
            c.expect(rep.valid, std::string("eqSubT: ") + rep.note);
            covered++;
        }

        c.expect(covered >= 12, "fewer than 12 instances covered");
    });
    std::printf("  note: gtime, acIteration, acInduction are exempt "
                "(continuous dynamics and unbounded iteration are outside the "
                "executable fragment)\n");
}

// ---------------------------------------------------------------------------
// 8. Trace-algebra instances against the oracle

TEST_CASE("trace axiom instances") {
    Criterion(8, "trace axioms hold on random ground instances").run([](Criterion& c) {
        std::mt19937 rng(91);
        auto rint = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
        auto rand_item = [&](int stamp) {
            const char* chs[] = {"ch", "dh"};
            return Term::comm_item(Term::chan_lit(Atom::chan(chs[rint(2)])),
                                   Term::real_lit(Rat(rint(3))), Term::real_lit(Rat(stamp)));
        };
        auto rand_trace = [&]() {
            int n = rint(4);
            if (n == 0) return Term::empty_trace();
            TermPtr t = rand_item(0);
            for (int i = 1; i < n; i++) t = Term::concat(t, rand_item(i));
            return t;
        };
        auto rand_chanset = [&]() {
            std::vector<Atom> as;
            if (rint(2)) as.push_back(Atom::chan("ch"));
            if (rint(2)) as.push_back(Atom::chan("dh"));
            GroundSet g = GroundSet::finite(Universe::Chans, std::move(as));
            return SetExpr::make(rint(4) == 0 ? set_complement(g) : g);
        };

        const std::vector<std::string> traceAxioms = {
            "concatDist", "projCut",  "projNeutral", "val",        "time",
            "chan",       "concatAssoc", "concatNeutral", "projIn", "projNotIn",
            "nonNegative", "unroll",  "accessBase",  "accessInd"};

        Interp I;
        OracleConfig cfg;
        int samples = 0;
        for (const std::string& id : traceAxioms) {
            for (int round = 0; round < 40; round++) {
                Substitution s;
                for (const char* tf : {"tf", "tf1", "tf2", "tf3"}) s.funcs[tf] = rand_trace();
                s.funcs["e1"] = Term::real_lit(Rat(rint(3)));
                s.funcs["e2"] = Term::real_lit(Rat(rint(3)));
                s.funcs["nf"] = Term::int_lit(Int(rint(3)));
                s.setVars["Cs"] = rand_chanset();
                s.setVars["Cp"] = rand_chanset();
                FormulaPtr inst = instantiate(id, s);
                bool ok = eval_formula(I, State{}, inst, cfg);
                c.expect(ok, id + " instance false: " + print_formula(inst));
                samples++;
                if (!ok) break;
            }
        }
        c.expect(samples >= 500, "fewer than 500 instances sampled");

        // The normalizer agrees with evaluation on random trace terms.
        State v;
        v.m[Atom::trace("h")] = Value::trace({comm("ch", 1, 0), comm("dh", 2, 1)});
        v.m[Atom::trace("h0")] = Value::trace({comm("dh", 0, 0)});
        for (int round = 0; round < 600; round++) {
            TermPtr t;
            switch (rint(5)) {
                case 0: t = rand_trace(); break;
                case 1: t = Term::mkvar(Atom::trace("h")); break;
                case 2: t = Term::concat(Term::mkvar(Atom::trace(rint(2) ? "h" : "h0")),
                                         rand_trace()); break;
                case 3: t = Term::proj(rand_trace(), rand_chanset()); break;
                default:
                    t = Term::at(rand_trace(), Term::int_lit(Int(rint(3))));
            }
            if (rint(2)) t = Term::proj(t, rand_chanset());
            TermPtr obs;
            switch (rint(5)) {
                case 0: obs = Term::val(t); break;
                case 1: obs = Term::stamp(t); break;
                case 2: obs = Term::len(t); break;
                case 3: obs = Term::chan_of(t); break;
                default: obs = t;
            }
            Value direct = eval_term(I, v, obs);
            Value simplified = eval_term(I, v, trace_simplify(obs));
            c.expect(direct == simplified,
                     "normalizer disagrees with evaluation on " + print_term(obs));
            if (!(direct == simplified)) break;
        }
    });
}

// ---------------------------------------------------------------------------
// 9. Statics versus semantics

TEST_CASE("statics versus semantics") {
    Criterion(9, "bound effect and coincidence on sampled runs").run([](Criterion& c) {
        support::Gen g(77);
        Interp I;
        OracleConfig cfg;
        std::vector<Value> dom;
        for (int k : {-1, 0, 1, 2}) dom.push_back(Value::real(Rat(k)));
        for (const char* vn : {"x", "y", "z"}) cfg.domains[Atom::real(vn)] = dom;

        const std::vector<Atom> pool = {Atom::real("x"),  Atom::real("y"), Atom::real("z"),
                                        Atom::trace("h"), Atom::trace("h0")};
        auto rand_state = [&]() {
            State v;
            for (const char* vn : {"x", "y", "z"})
                v.m[Atom::real(vn)] = Value::real(Rat(g.pick(5) - 2));
            v.m[Atom::mu()] = Value::real(Rat(g.pick(2)));
            if (g.coin()) v.m[Atom::trace("h")] = Value::trace({comm("ch", 1, 0)});
            if (g.coin()) v.m[Atom::trace("h0")] = Value::trace({comm("dh", 2, 0)});
            return v;
        };
        // Modifies every pool atom outside `keep` (the clock stays shared:
        // communication timestamps read it semantically).
        auto perturb = [&](const State& v, const GroundSet& keep) {
            State w = v;
            for (const Atom& a : pool) {
                if (member(a, keep)) continue;
                if (a.sort == Sort::Real)
                    w.m[a] = Value::real(v.get(a).numeric() + 7);
                else {
                    TraceVal t = v.get(a).tr;
                    t.push_back(comm("gh", 3, 9));
                    w.m[a] = Value::trace(t);
                }
            }
            return w;
        };

        int samples = 0;

        // Bound effect: complete runs only change what the program binds, all
        // events stay on the program's channels, and recorders are bound.
        for (int round = 0; round < 300; round++) {
            ProgramPtr p = g.concrete_program(g.pick(3));
            ProgStatics st = statics_program(p);
            c.expect(subset_eq(st.mbv, st.bv), "mbv not contained in bv");
            State v = rand_state();
            Denotation den = denote_program(I, v, p, cfg);
            auto bad = denotation_violation(v, den);
            c.expect(!bad, "denotation violation: " + (bad ? *bad : ""));
            for (const Computation& run : den.comps) {
                for (const Event& ev : run.trace) {
                    c.expect(member(ev.c.channel, st.cn),
                             "event outside cn for " + print_program(p));
                    c.expect(member(ev.recorder, st.bv),
                             "recorder outside bv for " + print_program(p));
                }
                if (!run.final) continue;
                for (const Atom& a : pool)
                    if (!member(a, st.bv))
                        c.expect(run.final->get(a) == v.get(a),
                                 "unbound " + atom_text(a) + " changed by " +
                                     print_program(p));
            }
            samples++;
        }

        // Coincidence for terms and formulas: agreement on the free variables
        // determines the value.
        Decls d = support::test_decls();
        std::vector<TermPtr> traceTerms = {
            parse_term("val(h down {ch}) + stamp(h0) * 2", d),
            parse_term("stamp(h) + x", d),
        };
        for (int round = 0; round < 150; round++) {
            TermPtr t = (round % 3 == 0) ? traceTerms[g.pick(2)] : g.poly(3);
            State v = rand_state();
            State w = perturb(v, statics_term(t).fv);
            c.expect(eval_term(I, v, t) == eval_term(I, w, t),
                     "term coincidence fails for " + print_term(t));
            samples++;
        }
        std::vector<FormulaPtr> boxed = {
            parse_formula("[ch(h)!x ; ch(h)?y] val(h down {ch}) >= z", d),
            parse_formula("[x := * ; ?x >= y] x >= y", d),
        };
        for (int round = 0; round < 150; round++) {
            FormulaPtr f;
            switch (round % 3) {
                case 0: f = boxed[g.pick(2)]; break;
                case 1: f = Formula::box(g.concrete_program(1), g.folr(1)); break;
                default: f = g.folr(2);
            }
            State v = rand_state();
            State w = perturb(v, statics_formula(f).fv);
            c.expect(eval_formula(I, v, f, cfg) == eval_formula(I, w, f, cfg),
                     "formula coincidence fails for " + print_formula(f));
            samples++;
        }

        // Coincidence for programs: initial agreement on the free variables
        // yields the same traces and the same finals on fv and must-binds.
        for (int round = 0; round < 150; round++) {
            ProgramPtr p = g.concrete_program(g.pick(3));
            ProgStatics st = statics_program(p);
            GroundSet key = set_union(st.fv, st.mbv);
            State v = rand_state();
            State w = perturb(v, st.fv);
            auto shrink = [&](const Denotation& den) {
                std::set<std::pair<RecTrace, std::vector<Value>>> out;
                for (const Computation& run : den.comps) {
                    std::vector<Value> finals;
                    if (run.final)
                        for (const Atom& a : pool)
                            if (member(a, key)) finals.push_back(run.final->get(a));
                    out.insert({run.trace, std::move(finals)});
                }
                return out;
            };
            c.expect(shrink(denote_program(I, v, p, cfg)) ==
                         shrink(denote_program(I, w, p, cfg)),
                     "program coincidence fails for " + print_program(p));
            samples++;
        }

        c.expect(samples >= 500, "fewer than 500 samples");
    });
}

// ---------------------------------------------------------------------------
// 10. Set algebra, exhaustively over a five-channel pool

TEST_CASE("set suite") {
    Criterion(10, "set axioms exhaustive over a five-channel pool").run([](Criterion& c) {
        const std::vector<Atom> pool = {Atom::chan("ch"), Atom::chan("dh"), Atom::chan("gh"),
                                        Atom::chan("kh"), Atom::chan("lh")};
        std::vector<GroundSet> sets;
        for (unsigned mask = 0; mask < 32; mask++) {
            std::vector<Atom> as;
            for (size_t i = 0; i < pool.size(); i++)
                if (mask & (1u << i)) as.push_back(pool[i]);
            GroundSet fin = GroundSet::finite(Universe::Chans, as);
            sets.push_back(fin);
            sets.push_back(set_complement(fin));
        }
        c.expect(sets.size() == 64, "set pool size is not 64");

        auto with_elem = [&](const Atom& e) {
            Substitution s;
            s.funcs["cf"] = Term::chan_lit(e);
            return s;
        };

        // Membership unrolling: bottom, top, singleton, and difference.
        for (const Atom& e : pool) {
            c.expect(decide_set_formula(instantiate("inBot", with_elem(e))) == Tri::True,
                     "inBot fails for " + atom_text(e));
            c.expect(decide_set_formula(instantiate("inTop", with_elem(e))) == Tri::True,
                     "inTop fails for " + atom_text(e));
            for (const Atom& base : pool) {
                FormulaPtr schema = get_axiom("inSingleton").conclusion;
                if (!(base == Atom::chan("ch")))
                    schema = uniform_rename(schema, Atom::chan("ch"), base);
                for (const GroundSet& s : sets) {
                    Substitution sig = with_elem(e);
                    sig.setVars["Cs"] = SetExpr::make(s);
                    FormulaPtr inst = usub_formula(sig, Taboo::none(), schema);
                    if (decide_set_formula(inst) != Tri::True) {
                        c.expect(false, "inSingleton fails: " + print_formula(inst));
                        return;
                    }
                }
            }
            for (const GroundSet& s1 : sets)
                for (const GroundSet& s2 : sets) {
                    Substitution sig = with_elem(e);
                    sig.setVars["Cs"] = SetExpr::make(s1);
                    sig.setVars["Cp"] = SetExpr::make(s2);
                    FormulaPtr inst = instantiate("inMinus", sig);
                    if (decide_set_formula(inst) != Tri::True) {
                        c.expect(false, "inMinus fails: " + print_formula(inst));
                        return;
                    }
                }
        }

        // Extensionality: structural equality of normalized sets coincides
        // with pointwise membership over the pool plus an off-pool witness,
        // and the quantified axiom instance evaluates true under a trace
        // domain covering those channels.
        Interp I;
        OracleConfig cfg;
        std::vector<Value> hdom = {Value::trace({})};
        for (const Atom& ch : pool) hdom.push_back(Value::trace({Comm{ch, Rat(0), Rat(0)}}));
        hdom.push_back(Value::trace({Comm{Atom::chan("zh"), Rat(0), Rat(0)}}));
        cfg.domains[Atom::trace("h")] = hdom;
        std::vector<Atom> probes = pool;
        probes.push_back(Atom::chan("zh"));
        for (const GroundSet& s1 : sets)
            for (const GroundSet& s2 : sets) {
                bool pointwise = true;
                for (const Atom& a : probes)
                    if (member(a, s1) != member(a, s2)) pointwise = false;
                if ((s1 == s2) != pointwise) {
                    c.expect(false, "extensionality mismatch for " + ground_text(s1) +
                                        " vs " + ground_text(s2));
                    return;
                }
                Substitution sig;
                sig.setVars["Cs"] = SetExpr::make(s1);
                sig.setVars["Cp"] = SetExpr::make(s2);
                FormulaPtr inst = instantiate("setExt", sig);
                if (!eval_formula(I, State{}, inst, cfg)) {
                    c.expect(false, "setExt instance false: " + print_formula(inst));
                    return;
                }
            }
    });
}

// ---------------------------------------------------------------------------
// 11. Mutation resistance

TEST_CASE("mutation resistance") {
    Criterion(11, "mutated scripts never silently prove their claim").run([](Criterion& c) {
        replay_derived("acMono");
        replay_derived("acBoxesDist");
        std::mt19937 rng(4242);
        mutate_script("par_exchange", slurp(proof_path("par_exchange.proof")), c, rng);
        mutate_script("send_value", slurp(proof_path("send_value.proof")), c, rng);
        mutate_script("acMono", derived_script_text("acMono"), c, rng);
        mutate_script("acBoxesDist", derived_script_text("acBoxesDist"), c, rng);
    });
}

// Shared fixtures and random-corpus generation for the substitution and
// acceptance suites: the parallel-injection clash scenarios and a generator
// of well-formed programs, substitutions, and taboos.

#ifndef TESTS_SUPPORT_HH
#define TESTS_SUPPORT_HH

#include <random>
#include <string>
#include <vector>

#include "chp/axioms.hh"
#include "chp/statics.hh"
#include "chp/textio.hh"
#include "chp/usubst.hh"

namespace support {

using namespace chp;

// The reserved axiom symbol table plus the extra channels and variables the
// fixtures and generators mention.
inline Decls test_decls() {
    Decls d = axiom_decls();
    if (!d.lookup_chan("dh")) d.declare_chan("dh");
    if (!d.lookup_chan("gh")) d.declare_chan("gh");
    if (!d.lookup_var("z", false)) d.declare_var("z", Sort::Real);
    return d;
}

inline Substitution subst(const std::string& bindings) {
    Decls d = test_decls();
    Substitution s = parse_substitution(bindings, d);
    validate_substitution(s, d);
    return s;
}

// The three parallel-injection instantiation scenarios: (a) clashes on the
// jointly-free channel ch, (b) succeeds because the ch-communication is joint,
// (c) clashes on the doubly-bound state variable x.
inline const char* kDropCompPsi =
    "(len(h down {ch}) >= 1 & len(h down {dh}) >= 1) & 0 >= y";

inline Substitution dropcomp_sigma_clash_chan() {
    return subst(std::string("a -> gh(h)!1, b -> ch(h)!2, A -> true, C -> true, P -> (") +
                 kDropCompPsi +
                 "), Ca -> {gh}, Cs -> {ch, dh}, Vs -> {h, y}, Va -> {h}, Hs -> ~{}");
}

inline Substitution dropcomp_sigma_ok() {
    return subst(std::string("a -> ch(h)?x ; gh(h)!1, b -> ch(h)!2, A -> true, C -> true, "
                             "P -> (") +
                 kDropCompPsi +
                 "), Ca -> {ch, gh}, Cs -> {ch, dh}, Vs -> {h, x, y}, Va -> {h, x}, "
                 "Hs -> ~{}");
}

inline Substitution dropcomp_sigma_clash_var() {
    return subst(
        "a -> x := y, b -> x := 0, A -> true, C -> true, P -> (y = x), "
        "Ca -> {}, Cs -> {}, Vs -> {x, y}, Va -> {x}, Hs -> ~{}");
}

// Only the set and contract bindings, leaving the program constants abstract;
// applying this to the axiom yields the half-instantiated formula whose
// annotations print in normalized form (e.g. ~{dh}).
inline Substitution dropcomp_sigma_sets_only() {
    return subst(std::string("A -> true, C -> true, P -> (") + kDropCompPsi +
                 "), Ca -> {ch, gh}, Cs -> {ch, dh}, Vs -> {h, x, y}, Va -> {h, x}, "
                 "Hs -> ~{}");
}

// ---------------------------------------------------------------------------
// Random corpus

struct Gen {
    std::mt19937 rng;
    Decls decls = test_decls();

    explicit Gen(unsigned seed) : rng(seed) {}

    int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }
    bool coin() { return pick(2) == 0; }

    Atom rv() {
        static const char* names[] = {"x", "y", "z"};
        return Atom::real(names[pick(3)]);
    }
    Atom tv() { return coin() ? Atom::trace("h") : Atom::trace("h0"); }
    Atom cv() {
        static const char* names[] = {"ch", "dh", "gh"};
        return Atom::chan(names[pick(3)]);
    }

    GroundSet var_subset() {
        std::vector<Atom> as;
        if (coin()) as.push_back(Atom::real("x"));
        if (coin()) as.push_back(Atom::real("y"));
        if (coin()) as.push_back(Atom::trace("h"));
        return GroundSet::finite(Universe::Vars, std::move(as));
    }
    GroundSet chan_subset() {
        std::vector<Atom> as;
        if (coin()) as.push_back(Atom::chan("ch"));
        if (coin()) as.push_back(Atom::chan("dh"));
        GroundSet g = GroundSet::finite(Universe::Chans, std::move(as));
        return pick(4) == 0 ? set_complement(g) : g;
    }
    Taboo taboo() {
        if (pick(3) == 0) return Taboo::none();
        return Taboo{var_subset(), chan_subset()};
    }

    TermPtr poly(int d) {
        if (d <= 0 || pick(3) == 0)
            return coin() ? Term::mkvar(rv()) : Term::real_lit(Rat(pick(5) - 2));
        return coin() ? Term::plus(poly(d - 1), poly(d - 1))
                      : Term::times(poly(d - 1), poly(d - 1));
    }
    FormulaPtr folr(int d) {
        if (d <= 0 || pick(3) == 0)
            return coin() ? Formula::geq(poly(1), poly(1)) : Formula::eq(poly(1), poly(1));
        switch (pick(3)) {
            case 0: return Formula::lnot(folr(d - 1));
            case 1: return Formula::land(folr(d - 1), folr(d - 1));
            default: return Formula::forall(rv(), folr(d - 1));
        }
    }

    // Symbol-free discrete programs, used as program-constant replacements.
    ProgramPtr concrete_program(int d) {
        if (d <= 0) {
            switch (pick(4)) {
                case 0: return Program::assign(rv(), poly(1));
                case 1: return Program::random(rv());
                case 2: return Program::send(cv(), tv(), poly(1));
                default: return Program::receive(cv(), tv(), rv());
            }
        }
        switch (pick(3)) {
            case 0: return Program::seq(concrete_program(d - 1), concrete_program(d - 1));
            case 1: return Program::choice(concrete_program(d - 1), concrete_program(d - 1));
            default: return Program::test(folr(1));
        }
    }

    // Random substitution over the reserved symbols; program-constant
    // replacements are recorded so annotation sites can be made compatible.
    Substitution substitution() {
        Substitution s;
        if (coin()) s.funcs["f"] = poly(2);
        if (coin()) s.preds["q"] = folr(2);
        if (coin())
            s.preds["p"] = Formula::geq(Term::dot(0, Sort::Real),
                                        coin() ? poly(1) : Term::real_lit(Rat(0)));
        if (coin()) s.progs["a"] = concrete_program(pick(3));
        if (coin()) s.progs["b"] = concrete_program(pick(3));
        return s;
    }

    TermPtr maybe_symbolic_poly(int d) {
        if (pick(4) == 0)
            return Term::func(decls, "f", SetExpr::make(GroundSet::empty(Universe::Chans)),
                              {});
        return poly(d);
    }
    FormulaPtr maybe_symbolic_test() {
        // Only the FOLR-restricted predicate may appear inside tests.
        if (pick(3) == 0)
            return Formula::pred(decls, "q", SetExpr::make(GroundSet::empty(Universe::Chans)),
                                 {});
        return folr(1);
    }

    // Annotation that is guaranteed to contain what the replacement binds and
    // writes, so instantiation never fails on the containment check alone.
    ProgramPtr prog_const(const Substitution& s, const char* name) {
        GroundSet vs = var_subset();
        GroundSet cs = chan_subset();
        auto it = s.progs.find(name);
        if (it != s.progs.end()) {
            ProgStatics st = statics_program(it->second);
            vs = set_union(vs, st.bv);
            cs = set_union(cs, st.cn);
        }
        return Program::prog_const(decls, name, SetExpr::make(cs), SetExpr::make(vs));
    }

    ProgramPtr program(const Substitution& s, int d) {
        if (d <= 0 || pick(4) == 0) {
            switch (pick(7)) {
                case 0: return Program::assign(rv(), maybe_symbolic_poly(1));
                case 1: return Program::random(rv());
                case 2: return Program::test(maybe_symbolic_test());
                case 3: return Program::send(cv(), tv(), maybe_symbolic_poly(1));
                case 4: return Program::receive(cv(), tv(), rv());
                case 5: return prog_const(s, "a");
                default: return prog_const(s, "b");
            }
        }
        switch (pick(5)) {
            case 0: return Program::seq(program(s, d - 1), program(s, d - 1));
            case 1: return Program::choice(program(s, d - 1), program(s, d - 1));
            case 2: return Program::star(program(s, d - 1));
            case 3: return Program::par(program(s, d - 1), program(s, d - 1));
            default:
                return Program::ode({{rv(), poly(1)}}, folr(1));
        }
    }
};

// One generated triple per the property suites' corpus description.
struct Triple {
    Substitution sigma;
    ProgramPtr prog;  // well-formed by construction filter
    Taboo z;
    GroundSet context;
};

struct CorpusStats {
    int generated = 0;      // well-formed triples produced
    int successes = 0;      // usub_program applications that did not clash
    int outputTabooBad = 0; // W missing part of Z u bv u cn
    int wellformedBad = 0;  // output rejected by check_wellformed
    int independenceBad = 0;// different taboo/context runs disagreed
};

// Drives the substitution property checks over `count` well-formed triples.
inline CorpusStats run_corpus(unsigned seed, int count) {
    Gen g(seed);
    CorpusStats st;
    int guard = 0;
    while (st.generated < count && guard < count * 60) {
        guard++;
        Substitution sigma = g.substitution();
        ProgramPtr p = g.program(sigma, 2 + g.pick(4));  // depth up to 5
        if (!check_wellformed(p).empty()) continue;
        Taboo z = g.taboo();
        GroundSet b = g.coin() ? GroundSet::empty(Universe::Vars) : g.var_subset();
        st.generated++;

        ProgSubstResult res;
        try {
            res = usub_program(sigma, z, b, p);
        } catch (const clash_error&) {
            continue;
        }
        st.successes++;

        ProgStatics out = statics_program(res.prog);
        if (!subset_eq(set_union(z.vars, out.bv), res.out.vars) ||
            !subset_eq(set_union(z.chans, out.cn), res.out.chans))
            st.outputTabooBad++;
        if (!check_wellformed(res.prog).empty()) st.wellformedBad++;

        // A second run under a different taboo/context pair must either clash
        // or reproduce the result exactly.
        Taboo z2 = g.taboo();
        GroundSet b2 = g.var_subset();
        try {
            ProgSubstResult res2 = usub_program(sigma, z2, b2, p);
            if (!syntactic_eq(res.prog, res2.prog)) st.independenceBad++;
        } catch (const clash_error&) {
        }
        // In particular the empty taboo/context run is the weakest one.
        try {
            ProgSubstResult res3 =
                usub_program(sigma, Taboo::none(), GroundSet::empty(Universe::Vars), p);
            if (!syntactic_eq(res.prog, res3.prog)) st.independenceBad++;
        } catch (const clash_error&) {
            st.independenceBad++;  // weakening the taboo must not introduce clashes
        }
    }
    return st;
}

}  // namespace support

#endif

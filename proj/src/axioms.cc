#include "chp/axioms.hh"

#include <map>
#include <optional>
#include <stdexcept>

#include "chp/statics.hh"
#include "chp/textio.hh"

namespace chp {

namespace {

// ---------------------------------------------------------------------------
// Reserved symbol table.
//
// Conventions shared by the stored formulas:
//   - postconditions are space predicates P{Cs}{Vs} over set variables,
//     assumptions/commitments are space predicates over {Cs}{Hs & TVar} so
//     that any replacement reads traces only;
//   - f() is the polynomial function slot of assignment/send, q() the
//     first-order-real test condition;
//   - pc/pa/pr/qa/qc are the applied communication predicates chi(ch, h);
//   - e1/e2/nf/tf1..tf3/cf are the scalar, index, trace, and channel slots of
//     the trace and set algebra.

const char* kReservedDecls = R"(
real x, y;
trace h, h0;
chan ch;
func f(): real poly;
func fg(real, real): real poly;
func e1(): real;
func e2(): real;
func nf(): int;
func cf(): chan;
func tf(): trace;
func tf1(): trace;
func tf2(): trace;
func tf3(): trace;
pred q() folr;
pred qg(real, real) folr;
pred p(real);
pred pg(real, real);
pred pc(trace);
pred pa(trace);
pred pr(trace, real);
pred qa(trace);
pred qc(trace);
spacepred P;
spacepred P1;
spacepred P2;
spacepred A;
spacepred A1;
spacepred A2;
spacepred C;
spacepred C1;
spacepred C2;
prog a;
prog b;
setvar Cs : chan;
setvar Ca : chan;
setvar Cp : chan;
setvar Vs : var;
setvar Va : var;
setvar Hs : var;
)";

struct Registry {
    Decls decls;
    std::map<std::string, AxiomEntry> entries;
    std::vector<std::string> order;

    FormulaPtr parse(const std::string& text) const {
        Parser p(text, decls);
        return p.formula_all();
    }

    void add(AxiomEntry e) {
        sort_check(e.conclusion);
        for (const FormulaPtr& pr : e.premises) sort_check(pr);
        std::vector<WfViolation> wf = check_wellformed(e.conclusion);
        if (!wf.empty())
            throw std::logic_error("registry entry " + e.id + " ill-formed: " + wf[0].detail);
        order.push_back(e.id);
        entries.emplace(e.id, std::move(e));
    }

    void axiom(const std::string& id, const std::string& text, std::string notes = "") {
        add({id, AxiomEntry::Kind::Axiom, {}, parse(text), std::move(notes), false});
    }

    void rule(const std::string& id, const std::vector<std::string>& premises,
              const std::string& text, std::string notes = "") {
        AxiomEntry e{id, AxiomEntry::Kind::Rule, {}, parse(text), std::move(notes), false};
        for (const std::string& pr : premises) e.premises.push_back(parse(pr));
        add(std::move(e));
    }

    void imported_axiom(const std::string& id, const std::string& text,
                        std::string notes = "") {
        add({id, AxiomEntry::Kind::Axiom, {}, parse(text), std::move(notes), true});
    }

    void imported_rule(const std::string& id, const std::vector<std::string>& premises,
                       const std::string& text, std::string notes = "") {
        AxiomEntry e{id, AxiomEntry::Kind::Rule, {}, parse(text), std::move(notes), true};
        for (const std::string& pr : premises) e.premises.push_back(parse(pr));
        add(std::move(e));
    }
};

Registry build_registry() {
    Registry r;
    {
        Parser header(kReservedDecls);
        header.parse_decls();
        r.decls = header.decls();
    }

    // Shorthands for the recurring annotated symbols.
    const std::string PP = "P{Cs}{Vs}";
    const std::string P1s = "P1{Cs}{Vs}";
    const std::string P2s = "P2{Cs}{Vs}";
    const std::string Ac = "A{Cs}{Hs & TVar}";
    const std::string A1c = "A1{Cs}{Hs & TVar}";
    const std::string A2c = "A2{Cs}{Hs & TVar}";
    const std::string Cc = "C{Cs}{Hs & TVar}";
    const std::string C1c = "C1{Cs}{Hs & TVar}";
    const std::string C2c = "C2{Cs}{Hs & TVar}";
    const std::string AC = "{" + Ac + ", " + Cc + "}";

    // -- program and assumption-commitment axioms ---------------------------
    r.axiom("assign", "[x := f()] p(x) <-> p(f())");
    r.axiom("nondetAssign", "[x := *] P <-> forall x P");
    r.axiom("test", "[?q()] P <-> (q() -> P)");
    r.axiom("boxesDual", "[a] " + PP + " <-> [a]{true, true} " + PP);
    r.axiom("acComposition",
            "[a ; b]" + AC + " " + PP + " <-> [a]" + AC + " [b]" + AC + " " + PP);
    r.axiom("acChoice",
            "[a ++ b]" + AC + " " + PP + " <-> [a]" + AC + " " + PP + " & [b]" + AC + " " + PP);
    r.axiom("acIteration",
            "[a*]" + AC + " " + PP + " <-> [?true]" + AC + " " + PP + " & [a]" + AC + " [a*]" +
                AC + " " + PP,
            "a^0 is the trivial test ?true");
    r.axiom("assumptionWeak",
            "[a]{true, (" + Ac + " & " + C1c + " & " + C2c + " -> " + A1c + " & " + A2c +
                ")} true & [a]{" + A1c + " & " + A2c + ", " + C1c + " & " + C2c + "} " + PP +
                " -> [a]{" + Ac + ", " + C1c + " & " + C2c + "} " + PP,
            "the first conjunct states the compositionality condition on a's reachable worlds");
    r.axiom("acDropComp",
            "[a{Ca}{Va}]" + AC + " " + PP +
                " -> [a{Ca}{(Va & Vs) | TVar | GT} || b{~Cs | Ca}{~Vs | TVar | GT}]" + AC + " " +
                PP,
            "parallel injection; the well-formed parallel abbreviation is stored expanded, so "
            "the annotations carry the noninterference side condition syntactically");
    r.axiom("gtime",
            "[{x' = fg(x, mu) & qg(x, mu)}] pg(x, mu) <-> [{x' = fg(x, mu) & qg(x, mu)}] pg(x, "
            "mu)",
            "the clock flow is built into every continuous evolution here, so the "
            "materialized right-hand side coincides with the left and the equivalence is "
            "stored in this degenerate form");
    r.axiom("send",
            "[ch(h)!f()] pc({ch}, h) <-> forall h0 (h0 = h . <ch, f(), mu> -> pc({ch}, h0))");
    r.axiom("acCom",
            "[ch(h)!f()]{qa({ch}, h), qc({ch}, h)} pa({ch}, h) <-> qc({ch}, h) & (qa({ch}, h) "
            "-> [ch(h)!f()] (qc({ch}, h) & (qa({ch}, h) -> pa({ch}, h))))");
    r.axiom("comDual",
            "[ch(h)?x]{qa({ch}, h), qc({ch}, h)} pr({ch}, h, x) <-> [x := *] "
            "[ch(h)!x]{qa({ch}, h), qc({ch}, h)} pr({ch}, h, x)");
    r.axiom("acNoCom",
            "[a{{}}{RVar}]" + AC + " " + PP + " <-> " + Cc + " & (" + Ac + " -> [a{{}}{RVar}] " +
                PP + ")");
    r.axiom("acWeak",
            "[a]" + AC + " " + PP + " <-> " + Cc + " & [a]" + AC + " (" + Cc + " & (" + Ac +
                " -> " + PP + "))");
    r.axiom("acInduction",
            "[a*]" + AC + " " + PP + " <-> [?true]" + AC + " " + PP + " & [a*]{" + Ac +
                ", true} (" + PP + " -> [a]" + AC + " " + PP + ")");
    r.axiom("acModalMP",
            "[a]{" + Ac + ", " + C1c + " -> " + C2c + "} (" + P1s + " -> " + P2s + ") -> ([a]{" +
                Ac + ", " + C1c + "} " + P1s + " -> [a]{" + Ac + ", " + C2c + "} " + P2s + ")");

    // -- axiomatic rules -----------------------------------------------------
    r.rule("MP", {"P1 -> P2", "P1"}, "P2");
    r.rule("acG", {Cc + " & " + PP}, "[a]" + AC + " " + PP,
           "necessitation keeps the assumption unconstrained");

    // -- trace algebra -------------------------------------------------------
    r.axiom("concatDist",
            "(tf1() . tf2()) down Cs = (tf1() down Cs) . (tf2() down Cs)");
    r.axiom("projCut", "(tf() down Cp) down Cs = tf() down (Cp & Cs)");
    r.axiom("projNeutral", "eps down Cs = eps");
    r.axiom("val", "val(<ch, e1(), e2()>) = e1()");
    r.axiom("time", "stamp(<ch, e1(), e2()>) = e2()");
    r.axiom("chan", "chanof(<ch, e1(), e2()>) = ch");
    r.axiom("concatAssoc", "(tf1() . tf2()) . tf3() = tf1() . (tf2() . tf3())");
    r.axiom("concatNeutral", "tf() . eps = tf() & eps . tf() = tf()",
            "the two unit equations are stored as one conjunction");
    r.axiom("projIn", "ch in Cs -> <ch, e1(), e2()> down Cs = <ch, e1(), e2()>");
    r.axiom("projNotIn", "!(ch in Cs) -> <ch, e1(), e2()> down Cs = eps");
    r.axiom("nonNegative", "len(tf()) >= 0");
    r.axiom("unroll", "len(tf() . <ch, e1(), e2()>) = len(tf()) + 1");
    r.axiom("accessBase",
            "len(tf()) = nf() -> (tf() . <ch, e1(), e2()>)[nf()] = <ch, e1(), e2()>",
            "indexing is 0-based: the appended item sits at position len of the prefix");
    r.axiom("accessInd",
            "len(tf()) >= nf() + 1 -> (tf() . <ch, e1(), e2()>)[nf()] = tf()[nf()]",
            "the strict length bound is spelled with >= over integers");

    // -- finite/cofinite set algebra ------------------------------------------
    r.axiom("inBot", "!(cf() in {})");
    r.axiom("inTop", "cf() in ~{}");
    r.axiom("inSingleton", "cf() in ({ch} & Cs) <-> cf() = ch & cf() in Cs",
            "generic over the literal channel by uniform renaming");
    r.axiom("inMinus", "cf() in (Cs \\ Cp) <-> (cf() in Cs) & !(cf() in Cp)");
    r.axiom("setExt",
            "Cs = Cp <-> forall h (chanof(h) in Cs <-> chanof(h) in Cp)",
            "atoms are quantified through single-item traces: every channel is chanof of "
            "some trace");

    // -- imported entries ----------------------------------------------------
    // Externally justified schemata: each is valid in the trace semantics
    // (the oracle suite samples instances) but not derivable from the finite
    // base above.  The bundled parallel-exchange derivation needs them for
    // the component whose obligations sit on the right of a parallel
    // composition and for the first-order equality steps after unfolding a
    // communication axiom.
    r.imported_axiom("parComm",
                     "[a{Ca}{Va} || b{Cp}{Vs}]" + AC + " " + PP + " <-> [b{Cp}{Vs} || "
                     "a{Ca}{Va}]" + AC + " " + PP,
                     "commutativity of parallel composition; the shuffle semantics of "
                     "parallel runs is symmetric in the components");
    r.imported_axiom("eqSubT", "tf1() = tf2() -> (pc(tf2()) -> pc(tf1()))",
                     "substitution of equal traces into a predicate context");
    r.imported_axiom("eqSubR", "e1() = e2() -> (p(e2()) -> p(e1()))",
                     "substitution of equal reals into a predicate context");
    r.imported_rule("allGR", {"P"}, "forall x P",
                    "universal generalization over a state variable: validity is closed "
                    "under quantifying a free variable");
    r.imported_rule("allGT", {"P"}, "forall h0 P",
                    "universal generalization over a trace variable");

    return r;
}

Registry& registry() {
    static Registry r = build_registry();
    return r;
}

}  // namespace

const Decls& axiom_decls() { return registry().decls; }

const AxiomEntry& get_axiom(const std::string& id) {
    const auto& es = registry().entries;
    auto it = es.find(id);
    if (it == es.end()) throw std::out_of_range("unknown axiom id: " + id);
    return it->second;
}

bool has_axiom(const std::string& id) { return registry().entries.count(id) != 0; }

std::vector<std::string> axiom_ids() { return registry().order; }

void register_imported(AxiomEntry entry) {
    Registry& r = registry();
    if (entry.id.empty() || r.entries.count(entry.id))
        throw std::invalid_argument("imported axiom id missing or already registered");
    if (!entry.conclusion) throw std::invalid_argument("imported axiom has no formula");
    sort_check(entry.conclusion);
    for (const FormulaPtr& pr : entry.premises) sort_check(pr);
    entry.imported = true;
    r.order.push_back(entry.id);
    r.entries.emplace(entry.id, std::move(entry));
}

// ---------------------------------------------------------------------------
// Trace-term normalization

namespace {

std::optional<Int> known_len(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::EmptyTrace: return Int(0);
        case Term::Kind::CommItem: return Int(1);
        case Term::Kind::Concat: {
            auto l = known_len(t->a), r = known_len(t->b);
            if (l && r) return *l + *r;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

std::optional<Int> int_value(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::IntLit: return t->ilit;
        case Term::Kind::IntPlus: {
            auto l = int_value(t->a), r = int_value(t->b);
            if (l && r) return *l + *r;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

// Flattens a concatenation into its non-empty leaves, left to right.
void flatten(const TermPtr& t, std::vector<TermPtr>& out) {
    if (t->kind == Term::Kind::Concat) {
        flatten(t->a, out);
        flatten(t->b, out);
    } else if (t->kind != Term::Kind::EmptyTrace) {
        out.push_back(t);
    }
}

TermPtr rebuild_chain(const std::vector<TermPtr>& xs, size_t from, size_t to) {
    if (from >= to) return Term::empty_trace();
    TermPtr acc = xs[to - 1];
    for (size_t i = to - 1; i > from; --i) acc = Term::concat(xs[i - 1], acc);
    return acc;
}

TermPtr simplify(const TermPtr& t);

// The last event of a concatenation chain when it is a literal item; the
// selectors val/stamp/chanof read exactly that event.
TermPtr last_item(const TermPtr& t) {
    if (t->kind != Term::Kind::Concat) return nullptr;
    std::vector<TermPtr> xs;
    flatten(t, xs);
    if (!xs.empty() && xs.back()->kind == Term::Kind::CommItem) return xs.back();
    return nullptr;
}

// One rewrite at the root of a term whose children are already normal.
// Returns null when no rule applies.
TermPtr step(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Concat:
            if (t->a->kind == Term::Kind::EmptyTrace) return t->b;
            if (t->b->kind == Term::Kind::EmptyTrace) return t->a;
            if (t->a->kind == Term::Kind::Concat)
                return Term::concat(t->a->a, Term::concat(t->a->b, t->b));
            return nullptr;
        case Term::Kind::Proj: {
            const TermPtr& u = t->a;
            if (u->kind == Term::Kind::EmptyTrace) return Term::empty_trace();
            if (u->kind == Term::Kind::Concat)
                return Term::concat(Term::proj(u->a, t->projSet), Term::proj(u->b, t->projSet));
            if (u->kind == Term::Kind::Proj)
                return Term::proj(u->a, normalize(SetExpr::inter(u->projSet, t->projSet)));
            if (u->kind == Term::Kind::CommItem && u->a->kind == Term::Kind::ChanLit &&
                t->projSet->is_ground())
                return member(u->a->var, t->projSet->ground) ? u : Term::empty_trace();
            return nullptr;
        }
        case Term::Kind::Val:
            if (t->a->kind == Term::Kind::CommItem) return t->a->b;
            if (TermPtr last = last_item(t->a)) return last->b;
            return nullptr;
        case Term::Kind::Stamp:
            if (t->a->kind == Term::Kind::CommItem) return t->a->c;
            if (TermPtr last = last_item(t->a)) return last->c;
            return nullptr;
        case Term::Kind::ChanOf:
            if (t->a->kind == Term::Kind::CommItem) return t->a->a;
            if (TermPtr last = last_item(t->a)) return last->a;
            return nullptr;
        case Term::Kind::Len: {
            if (auto n = known_len(t->a)) return Term::int_lit(*n);
            std::vector<TermPtr> xs;
            flatten(t->a, xs);
            size_t cut = xs.size();
            while (cut > 0 && xs[cut - 1]->kind == Term::Kind::CommItem) --cut;
            if (cut < xs.size() && cut > 0)  // peel the trailing items
                return Term::int_plus(Term::len(rebuild_chain(xs, 0, cut)),
                                      Term::int_lit(Int(static_cast<long>(xs.size() - cut))));
            return nullptr;
        }
        case Term::Kind::At: {
            auto idx = int_value(t->b);
            if (!idx) return nullptr;
            std::vector<TermPtr> xs;
            flatten(t->a, xs);
            for (const TermPtr& x : xs)
                if (x->kind != Term::Kind::CommItem) return nullptr;
            if (*idx >= 0 && *idx < Int(static_cast<long>(xs.size())))
                return xs[static_cast<size_t>(idx->get_si())];
            return nullptr;
        }
        case Term::Kind::IntPlus:
            if (t->a->kind == Term::Kind::IntLit && t->b->kind == Term::Kind::IntLit)
                return Term::int_lit(t->a->ilit + t->b->ilit);
            return nullptr;
        default:
            return nullptr;
    }
}

TermPtr with_children(const TermPtr& t) {
    auto out = std::make_shared<Term>(*t);
    bool changed = false;
    auto fix = [&](TermPtr& child) {
        if (!child) return;
        TermPtr s = simplify(child);
        if (s != child) changed = true;
        child = std::move(s);
    };
    fix(out->a);
    fix(out->b);
    fix(out->c);
    for (TermPtr& arg : out->args) fix(arg);
    return changed ? out : t;
}

TermPtr simplify(const TermPtr& t) {
    TermPtr cur = with_children(t);
    while (TermPtr next = step(cur)) cur = with_children(next);
    return cur;
}

}  // namespace

TermPtr trace_simplify(const TermPtr& e) { return simplify(e); }

// ---------------------------------------------------------------------------
// Ground set-formula decision

Tri decide_set_formula(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Not: {
            Tri t = decide_set_formula(f->f1);
            if (t == Tri::True) return Tri::False;
            if (t == Tri::False) return Tri::True;
            return Tri::NotGround;
        }
        case Formula::Kind::And: {
            Tri l = decide_set_formula(f->f1);
            Tri r = decide_set_formula(f->f2);
            if (l == Tri::False || r == Tri::False) return Tri::False;
            if (l == Tri::True && r == Tri::True) return Tri::True;
            return Tri::NotGround;
        }
        case Formula::Kind::InSet:
            if (f->t1->kind == Term::Kind::ChanLit && f->s1->is_ground())
                return member(f->t1->var, f->s1->ground) ? Tri::True : Tri::False;
            return Tri::NotGround;
        case Formula::Kind::SetEq:
            if (f->s1->is_ground() && f->s2->is_ground())
                return f->s1->ground == f->s2->ground ? Tri::True : Tri::False;
            return Tri::NotGround;
        case Formula::Kind::Eq:
            if (f->relSort == Sort::Channel && f->t1->kind == Term::Kind::ChanLit &&
                f->t2->kind == Term::Kind::ChanLit)
                return f->t1->var == f->t2->var ? Tri::True : Tri::False;
            return Tri::NotGround;
        default:
            return Tri::NotGround;
    }
}

}  // namespace chp

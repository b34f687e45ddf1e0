#include "chp/statics.hh"

#include <algorithm>
#include <set>

namespace chp {

namespace {

GroundSet need_ground(const SetExprPtr& s, const char* what) {
    SetExprPtr n = normalize(s);
    if (!n->is_ground())
        throw statics_error(std::string("symbolic set annotation in ") + what);
    return n->ground;
}

// x -> {x, x'} for every member; defined for finite sets of unprimed reals
// (free variables of program polynomials are always of this shape).
GroundSet with_primes(const GroundSet& g) {
    if (!g.is_finite()) throw statics_error("primes of a cofinite set");
    std::vector<Atom> out = g.atoms;
    for (const Atom& a : g.atoms)
        if (a.sort == Sort::Real && !a.primed) out.push_back(a.with_prime());
    return GroundSet::finite(Universe::Vars, std::move(out));
}

const GroundSet kNoVars = GroundSet::empty(Universe::Vars);
const GroundSet kNoChans = GroundSet::empty(Universe::Chans);

}  // namespace

TermStatics statics_term(const TermPtr& t) {
    TermStatics r;
    if (!t) return r;
    switch (t->kind) {
        case Term::Kind::Var:
            r.fv = singleton(t->var);
            if (t->var.sort == Sort::Trace) r.cn = GroundSet::all(Universe::Chans);
            break;
        case Term::Kind::RealLit:
        case Term::Kind::IntLit:
        case Term::Kind::ChanLit:
        case Term::Kind::EmptyTrace:
        case Term::Kind::Dot:
            break;
        case Term::Kind::FuncApp: {
            GroundSet inner = kNoChans;
            for (const TermPtr& a : t->args) {
                TermStatics s = statics_term(a);
                r.fv = set_union(r.fv, s.fv);
                inner = set_union(inner, s.cn);
            }
            r.cn = set_inter(need_ground(t->chanSet, "function application"), inner);
            break;
        }
        case Term::Kind::Differential: {
            TermStatics s = statics_term(t->a);
            r.fv = with_primes(s.fv);
            r.cn = kNoChans;
            break;
        }
        case Term::Kind::Proj: {
            TermStatics s = statics_term(t->a);
            r.fv = s.fv;
            r.cn = set_inter(s.cn, need_ground(t->projSet, "projection"));
            break;
        }
        default: {
            for (const TermPtr& sub : {t->a, t->b, t->c}) {
                if (!sub) continue;
                TermStatics s = statics_term(sub);
                r.fv = set_union(r.fv, s.fv);
                r.cn = set_union(r.cn, s.cn);
            }
            break;
        }
    }
    return r;
}

TermStatics statics_formula(const FormulaPtr& f) {
    TermStatics r;
    if (!f) return r;
    switch (f->kind) {
        case Formula::Kind::Eq:
        case Formula::Kind::Geq:
        case Formula::Kind::Prefix: {
            TermStatics a = statics_term(f->t1), b = statics_term(f->t2);
            r.fv = set_union(a.fv, b.fv);
            r.cn = set_union(a.cn, b.cn);
            break;
        }
        case Formula::Kind::PredApp: {
            GroundSet inner = kNoChans;
            for (const TermPtr& a : f->args) {
                TermStatics s = statics_term(a);
                r.fv = set_union(r.fv, s.fv);
                inner = set_union(inner, s.cn);
            }
            r.cn = set_inter(need_ground(f->chanSet, "predicate application"), inner);
            break;
        }
        case Formula::Kind::SpacePred:
            r.fv = need_ground(f->varSet, "space predicate");
            r.cn = need_ground(f->chanSet, "space predicate");
            break;
        case Formula::Kind::InSet:
            r = statics_term(f->t1);
            r.cn = kNoChans;
            break;
        case Formula::Kind::SetEq:
            break;
        case Formula::Kind::Not:
            r = statics_formula(f->f1);
            break;
        case Formula::Kind::And: {
            TermStatics a = statics_formula(f->f1), b = statics_formula(f->f2);
            r.fv = set_union(a.fv, b.fv);
            r.cn = set_union(a.cn, b.cn);
            break;
        }
        case Formula::Kind::Forall: {
            r = statics_formula(f->f1);
            r.fv = set_minus(r.fv, singleton(f->qvar));
            break;
        }
        case Formula::Kind::Box: {
            ProgStatics p = statics_program(f->prog);
            TermStatics post = statics_formula(f->f1);
            r.fv = set_union(p.fv, set_minus(post.fv, p.mbv));
            r.cn = post.cn;
            break;
        }
        case Formula::Kind::AcBox: {
            ProgStatics p = statics_program(f->prog);
            TermStatics post = statics_formula(f->f1);
            TermStatics a = statics_formula(f->assume);
            TermStatics c = statics_formula(f->commit);
            r.fv = set_union(set_union(p.fv, set_minus(post.fv, p.mbv)),
                             set_union(a.fv, c.fv));
            r.cn = set_union(post.cn, set_union(a.cn, c.cn));
            break;
        }
    }
    return r;
}

ProgStatics statics_program(const ProgramPtr& p) {
    ProgStatics r;
    if (!p) return r;
    switch (p->kind) {
        case Program::Kind::ProgConst:
            r.fv = set_union(GroundSet::rvar(), GroundSet::tvar());
            r.bv = need_ground(p->varSet, "program constant");
            r.mbv = kNoVars;
            r.cn = need_ground(p->chanSet, "program constant");
            break;
        case Program::Kind::Assign:
            r.fv = statics_term(p->rhs).fv;
            r.bv = r.mbv = singleton(p->x);
            break;
        case Program::Kind::Random:
            r.bv = r.mbv = singleton(p->x);
            break;
        case Program::Kind::Test:
            r.fv = statics_formula(p->chi).fv;
            break;
        case Program::Kind::ODE: {
            std::vector<Atom> bound{Atom::mu(), Atom::mu_prime()};
            GroundSet fv = set_union(statics_formula(p->chi).fv, singleton(Atom::mu()));
            for (const auto& [x, rhs] : p->odes) {
                bound.push_back(x);
                bound.push_back(x.with_prime());
                fv = set_union(fv, set_union(singleton(x), statics_term(rhs).fv));
            }
            r.fv = fv;
            r.bv = r.mbv = GroundSet::finite(Universe::Vars, std::move(bound));
            break;
        }
        case Program::Kind::Send:
            r.fv = set_union(statics_term(p->rhs).fv, singleton(p->h));
            r.bv = r.mbv = singleton(p->h);
            r.cn = chan_singleton(p->ch);
            break;
        case Program::Kind::Receive:
            r.fv = singleton(p->h);
            r.bv = r.mbv = GroundSet::finite(Universe::Vars, {p->h, p->x});
            r.cn = chan_singleton(p->ch);
            break;
        case Program::Kind::Seq: {
            ProgStatics a = statics_program(p->p1), b = statics_program(p->p2);
            r.fv = set_union(a.fv, set_minus(b.fv, a.mbv));
            r.bv = set_union(a.bv, b.bv);
            r.mbv = set_union(a.mbv, b.mbv);
            r.cn = set_union(a.cn, b.cn);
            break;
        }
        case Program::Kind::Choice: {
            ProgStatics a = statics_program(p->p1), b = statics_program(p->p2);
            r.fv = set_union(a.fv, b.fv);
            r.bv = set_union(a.bv, b.bv);
            r.mbv = set_inter(a.mbv, b.mbv);
            r.cn = set_union(a.cn, b.cn);
            break;
        }
        case Program::Kind::Par: {
            ProgStatics a = statics_program(p->p1), b = statics_program(p->p2);
            r.fv = set_union(a.fv, b.fv);
            r.bv = set_union(a.bv, b.bv);
            r.mbv = set_union(a.mbv, b.mbv);
            r.cn = set_union(a.cn, b.cn);
            break;
        }
        case Program::Kind::Star: {
            ProgStatics a = statics_program(p->p1);
            r.fv = a.fv;
            r.bv = a.bv;
            r.mbv = kNoVars;
            r.cn = a.cn;
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Signatures

namespace {
void sig_term(const TermPtr& t, std::set<std::string>& out);
void sig_formula(const FormulaPtr& f, std::set<std::string>& out);
void sig_program(const ProgramPtr& p, std::set<std::string>& out);

void sig_set(const SetExprPtr& s, std::set<std::string>& out) {
    if (!s) return;
    if (s->kind == SetExpr::Kind::SetVar) out.insert(s->name);
    sig_set(s->l, out);
    sig_set(s->r, out);
}

void sig_term(const TermPtr& t, std::set<std::string>& out) {
    if (!t) return;
    if (t->kind == Term::Kind::FuncApp) {
        out.insert(t->sym);
        sig_set(t->chanSet, out);
    }
    if (t->kind == Term::Kind::Proj) sig_set(t->projSet, out);
    for (const TermPtr& a : t->args) sig_term(a, out);
    sig_term(t->a, out);
    sig_term(t->b, out);
    sig_term(t->c, out);
}

void sig_program(const ProgramPtr& p, std::set<std::string>& out) {
    if (!p) return;
    if (p->kind == Program::Kind::ProgConst) {
        out.insert(p->sym);
        sig_set(p->chanSet, out);
        sig_set(p->varSet, out);
    }
    sig_term(p->rhs, out);
    sig_formula(p->chi, out);
    for (const auto& [x, rhs] : p->odes) sig_term(rhs, out);
    sig_program(p->p1, out);
    sig_program(p->p2, out);
}

void sig_formula(const FormulaPtr& f, std::set<std::string>& out) {
    if (!f) return;
    if (f->kind == Formula::Kind::PredApp || f->kind == Formula::Kind::SpacePred) {
        out.insert(f->sym);
        sig_set(f->chanSet, out);
        sig_set(f->varSet, out);
    }
    sig_set(f->s1, out);
    sig_set(f->s2, out);
    sig_term(f->t1, out);
    sig_term(f->t2, out);
    for (const TermPtr& a : f->args) sig_term(a, out);
    sig_formula(f->f1, out);
    sig_formula(f->f2, out);
    sig_formula(f->assume, out);
    sig_formula(f->commit, out);
    sig_program(f->prog, out);
}
}  // namespace

std::vector<std::string> signature(const TermPtr& t) {
    std::set<std::string> s;
    sig_term(t, s);
    return {s.begin(), s.end()};
}
std::vector<std::string> signature(const FormulaPtr& f) {
    std::set<std::string> s;
    sig_formula(f, s);
    return {s.begin(), s.end()};
}
std::vector<std::string> signature(const ProgramPtr& p) {
    std::set<std::string> s;
    sig_program(p, s);
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Canonical ground-set text

std::string ground_text(const GroundSet& g) {
    auto list = [](const std::vector<Atom>& as) {
        std::string out = "{";
        for (size_t i = 0; i < as.size(); i++) {
            if (i) out += ",";
            out += atom_text(as[i]);
        }
        return out + "}";
    };
    if (g.is_finite()) return list(g.atoms);
    if (g.cofiniteMask == universe_mask(g.uni)) return "~" + list(g.atoms);
    // Mixed per-sort form: cofinite sorts by their base constants minus the
    // exceptions, plus listed members of the finite sorts.
    static const std::pair<Sort, const char*> bases[] = {
        {Sort::Real, "RVar"}, {Sort::Int, "NVar"}, {Sort::Trace, "TVar"}};
    std::string base;
    int nbases = 0;
    for (auto [s, name] : bases)
        if (g.cofiniteMask & sort_bit(s)) {
            if (nbases++) base += " | ";
            base += name;
        }
    std::vector<Atom> excl, incl;
    for (const Atom& a : g.atoms)
        (g.cofiniteMask & sort_bit(a.sort) ? excl : incl).push_back(a);
    std::string out = nbases > 1 && !excl.empty() ? "(" + base + ")" : base;
    if (!excl.empty()) out += " \\ " + list(excl);
    if (!incl.empty()) {
        if (!excl.empty()) out = "(" + out + ")";
        out += " | " + list(incl);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Context-sensitive well-formedness (declared in syntax.hh)

namespace {

GroundSet shared_state_allowance() {
    return set_union(GroundSet::tvar(), GroundSet::gt());
}

void wf_program(const ProgramPtr& p, std::vector<WfViolation>& out);
void wf_formula(const FormulaPtr& f, std::vector<WfViolation>& out);

void wf_program(const ProgramPtr& p, std::vector<WfViolation>& out) {
    if (!p) return;
    switch (p->kind) {
        case Program::Kind::Par: {
            wf_program(p->p1, out);
            wf_program(p->p2, out);
            try {
                GroundSet shared =
                    set_inter(statics_program(p->p1).bv, statics_program(p->p2).bv);
                GroundSet bad = set_minus(shared, shared_state_allowance());
                if (!bad.is_empty())
                    out.push_back({"parallel composition",
                                   "components share bound state " + ground_text(bad)});
            } catch (const statics_error&) {
                // Symbolic annotations: the condition is checked on instances.
            }
            break;
        }
        case Program::Kind::Seq:
        case Program::Kind::Choice:
            wf_program(p->p1, out);
            wf_program(p->p2, out);
            break;
        case Program::Kind::Star:
            wf_program(p->p1, out);
            break;
        default:
            break;
    }
}

void wf_formula(const FormulaPtr& f, std::vector<WfViolation>& out) {
    if (!f) return;
    switch (f->kind) {
        case Formula::Kind::Not:
        case Formula::Kind::Forall:
            wf_formula(f->f1, out);
            break;
        case Formula::Kind::And:
            wf_formula(f->f1, out);
            wf_formula(f->f2, out);
            break;
        case Formula::Kind::Box:
            wf_program(f->prog, out);
            wf_formula(f->f1, out);
            break;
        case Formula::Kind::AcBox: {
            wf_program(f->prog, out);
            wf_formula(f->f1, out);
            wf_formula(f->assume, out);
            wf_formula(f->commit, out);
            try {
                GroundSet contractReads = set_union(statics_formula(f->assume).fv,
                                                    statics_formula(f->commit).fv);
                GroundSet bad =
                    set_minus(set_inter(contractReads, statics_program(f->prog).bv),
                              GroundSet::tvar());
                if (!bad.is_empty())
                    out.push_back({"ac-box",
                                   "contract reads bound state " + ground_text(bad)});
            } catch (const statics_error&) {
            }
            break;
        }
        default:
            break;
    }
}

}  // namespace

std::vector<WfViolation> check_wellformed(const FormulaPtr& f) {
    std::vector<WfViolation> out;
    wf_formula(f, out);
    return out;
}

std::vector<WfViolation> check_wellformed(const ProgramPtr& p) {
    std::vector<WfViolation> out;
    wf_program(p, out);
    return out;
}

}  // namespace chp

#include "chp/usubst.hh"

#include <cassert>

namespace chp {

namespace {

const Substitution kEmptySub;

GroundSet shared_state_allowance() {
    return set_union(GroundSet::tvar(), GroundSet::gt());
}

// ---------------------------------------------------------------------------
// Set instantiation

SetExprPtr inst_set(const Substitution& sigma, const SetExprPtr& s) {
    if (!s) return s;
    switch (s->kind) {
        case SetExpr::Kind::Ground:
            return s;
        case SetExpr::Kind::SetVar: {
            auto it = sigma.setVars.find(s->name);
            if (it == sigma.setVars.end()) return s;
            if (it->second->uni != s->uni)
                throw clash_error({"non-ground", s->name, "set variable",
                                   "replacement universe mismatch"});
            return it->second;
        }
        case SetExpr::Kind::Complement:
            return normalize(SetExpr::complement(inst_set(sigma, s->l)));
        case SetExpr::Kind::Inter:
            return normalize(SetExpr::inter(inst_set(sigma, s->l), inst_set(sigma, s->r)));
        case SetExpr::Kind::Minus:
            return normalize(SetExpr::minus(inst_set(sigma, s->l), inst_set(sigma, s->r)));
        case SetExpr::Kind::Union:
            return normalize(SetExpr::unions(inst_set(sigma, s->l), inst_set(sigma, s->r)));
    }
    throw std::logic_error("unreachable set kind");
}

GroundSet inst_ground(const Substitution& sigma, const SetExprPtr& s, const char* site) {
    SetExprPtr n = normalize(inst_set(sigma, s));
    if (!n->is_ground())
        throw clash_error({"non-ground", n->kind == SetExpr::Kind::SetVar ? n->name : "",
                           site, "set annotation is not ground after instantiation"});
    return n->ground;
}

// ---------------------------------------------------------------------------
// Taboo checks

void check_taboo(const TermStatics& s, const Taboo& taboo, const std::string& phase,
                 const std::string& symbol, const std::string& site) {
    GroundSet badVars = set_inter(s.fv, taboo.vars);
    GroundSet badChans = set_inter(s.cn, taboo.chans);
    if (!badVars.is_empty() || !badChans.is_empty()) {
        std::string detail;
        if (!badVars.is_empty()) detail += "variables " + ground_text(badVars);
        if (!badChans.is_empty()) {
            if (!detail.empty()) detail += ", ";
            detail += "channels " + ground_text(badChans);
        }
        throw clash_error({phase, symbol, site, detail + " are taboo"});
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Projection push-down

TermPtr project_term(const TermPtr& e, const GroundSet& chans) {
    if (!e) return e;
    switch (e->kind) {
        case Term::Kind::Var:
            if (e->var.sort == Sort::Trace)
                return Term::proj(e, SetExpr::make(chans));
            return e;
        case Term::Kind::RealLit:
        case Term::Kind::IntLit:
        case Term::Kind::ChanLit:
        case Term::Kind::EmptyTrace:
        case Term::Kind::Dot:
        case Term::Kind::Differential:
            return e;
        case Term::Kind::FuncApp: {
            GroundSet own = force_ground(e->chanSet);
            return Term::rebuild_func(e, SetExpr::make(set_inter(own, chans)), e->args);
        }
        case Term::Kind::Proj: {
            GroundSet inner = force_ground(e->projSet);
            return project_term(e->a, set_inter(inner, chans));
        }
        case Term::Kind::CommItem:
            if (e->a->kind == Term::Kind::ChanLit)
                return member(e->a->var, chans) ? e : Term::empty_trace();
            return Term::proj(e, SetExpr::make(chans));
        case Term::Kind::Plus:
            return Term::plus(project_term(e->a, chans), project_term(e->b, chans));
        case Term::Kind::Times:
            return Term::times(project_term(e->a, chans), project_term(e->b, chans));
        case Term::Kind::IntPlus:
            return Term::int_plus(project_term(e->a, chans), project_term(e->b, chans));
        case Term::Kind::Val:
            return Term::val(project_term(e->a, chans));
        case Term::Kind::Stamp:
            return Term::stamp(project_term(e->a, chans));
        case Term::Kind::Len:
            return Term::len(project_term(e->a, chans));
        case Term::Kind::ChanOf:
            return Term::chan_of(project_term(e->a, chans));
        case Term::Kind::Concat:
            return Term::concat(project_term(e->a, chans), project_term(e->b, chans));
        case Term::Kind::At:
            return Term::at(project_term(e->a, chans), project_term(e->b, chans));
    }
    throw std::logic_error("unreachable term kind");
}

// ---------------------------------------------------------------------------
// Engine
//
// One recursion serves both the symbol substitution and the reserved-dot
// plugging (a nested uniform substitution with empty initial taboo), so
// binders inside replacements clash against argument free symbols.

namespace {

struct Engine {
    const Substitution& sigma;
    const std::vector<TermPtr>* dotArgs = nullptr;

    TermPtr term(const Taboo& taboo, const TermPtr& e) const;
    FormulaPtr formula(const Taboo& taboo, const FormulaPtr& f) const;
    ProgSubstResult program(const Taboo& taboo, const GroundSet& ctx, const ProgramPtr& p) const;
};

TermPtr Engine::term(const Taboo& taboo, const TermPtr& e) const {
    if (!e) return e;
    switch (e->kind) {
        case Term::Kind::Var:
        case Term::Kind::RealLit:
        case Term::Kind::IntLit:
        case Term::Kind::ChanLit:
        case Term::Kind::EmptyTrace:
            return e;
        case Term::Kind::Dot: {
            if (!dotArgs) return e;
            const TermPtr& arg = dotArgs->at(static_cast<size_t>(e->dotIndex));
            check_taboo(statics_term(arg), taboo, "dot-capture",
                        "." + std::to_string(e->dotIndex), "argument plugging");
            return arg;
        }
        case Term::Kind::FuncApp: {
            auto it = sigma.funcs.find(e->sym);
            GroundSet own = inst_ground(sigma, e->chanSet, "function application");
            std::vector<TermPtr> args;
            args.reserve(e->args.size());
            if (it != sigma.funcs.end()) {
                check_taboo(statics_term(it->second), taboo, "taboo", e->sym,
                            "function application");
                for (const TermPtr& a : e->args)
                    args.push_back(term(taboo, project_term(a, own)));
                Engine plug{kEmptySub, &args};
                return plug.term(Taboo::none(), it->second);
            }
            for (const TermPtr& a : e->args) args.push_back(term(taboo, a));
            return Term::rebuild_func(e, SetExpr::make(own), std::move(args));
        }
        case Term::Kind::Plus:
            return Term::plus(term(taboo, e->a), term(taboo, e->b));
        case Term::Kind::Times:
            return Term::times(term(taboo, e->a), term(taboo, e->b));
        case Term::Kind::IntPlus:
            return Term::int_plus(term(taboo, e->a), term(taboo, e->b));
        case Term::Kind::Differential:
            return Term::differential(term(Taboo::total(), e->a));
        case Term::Kind::Val:
            return Term::val(term(taboo, e->a));
        case Term::Kind::Stamp:
            return Term::stamp(term(taboo, e->a));
        case Term::Kind::Len:
            return Term::len(term(taboo, e->a));
        case Term::Kind::ChanOf:
            return Term::chan_of(term(taboo, e->a));
        case Term::Kind::CommItem:
            return Term::comm_item(term(taboo, e->a), term(taboo, e->b), term(taboo, e->c));
        case Term::Kind::Concat:
            return Term::concat(term(taboo, e->a), term(taboo, e->b));
        case Term::Kind::Proj:
            return Term::proj(term(taboo, e->a), inst_set(sigma, e->projSet));
        case Term::Kind::At:
            return Term::at(term(taboo, e->a), term(taboo, e->b));
    }
    throw std::logic_error("unreachable term kind");
}

FormulaPtr Engine::formula(const Taboo& taboo, const FormulaPtr& f) const {
    if (!f) return f;
    switch (f->kind) {
        case Formula::Kind::Eq: {
            return Formula::eq(term(taboo, f->t1), term(taboo, f->t2));
        }
        case Formula::Kind::Geq:
            return Formula::geq(term(taboo, f->t1), term(taboo, f->t2));
        case Formula::Kind::Prefix:
            return Formula::prefix(term(taboo, f->t1), term(taboo, f->t2));
        case Formula::Kind::PredApp: {
            auto it = sigma.preds.find(f->sym);
            GroundSet own = inst_ground(sigma, f->chanSet, "predicate application");
            std::vector<TermPtr> args;
            args.reserve(f->args.size());
            if (it != sigma.preds.end()) {
                check_taboo(statics_formula(it->second), taboo, "taboo", f->sym,
                            "predicate application");
                for (const TermPtr& a : f->args)
                    args.push_back(term(taboo, project_term(a, own)));
                Engine plug{kEmptySub, &args};
                return plug.formula(Taboo::none(), it->second);
            }
            for (const TermPtr& a : f->args) args.push_back(term(taboo, a));
            auto out = std::make_shared<Formula>(*f);
            out->chanSet = SetExpr::make(own);
            out->args = std::move(args);
            return out;
        }
        case Formula::Kind::SpacePred: {
            auto it = sigma.spacePreds.find(f->sym);
            SetExprPtr chans = inst_set(sigma, f->chanSet);
            SetExprPtr vars = inst_set(sigma, f->varSet);
            if (it != sigma.spacePreds.end()) {
                GroundSet cg = inst_ground(sigma, chans, "space predicate");
                GroundSet vg = inst_ground(sigma, vars, "space predicate");
                // A space predicate denotes a predicate over its declared
                // (channel, variable) space, so the replacement only needs to
                // respect that space; no taboo intersection applies.
                TermStatics s = statics_formula(it->second);
                if (!subset_eq(s.fv, vg))
                    throw clash_error({"spacepred-space", f->sym, "space predicate",
                                       "free variables " + ground_text(s.fv) +
                                           " exceed space " + ground_text(vg)});
                if (!subset_eq(s.cn, cg))
                    throw clash_error({"spacepred-space", f->sym, "space predicate",
                                       "accessed channels " + ground_text(s.cn) +
                                           " exceed space " + ground_text(cg)});
                return it->second;
            }
            auto out = std::make_shared<Formula>(*f);
            out->chanSet = normalize(chans);
            out->varSet = normalize(vars);
            return out;
        }
        case Formula::Kind::InSet:
            return Formula::in_set(term(taboo, f->t1), inst_set(sigma, f->s1));
        case Formula::Kind::SetEq:
            return Formula::set_eqf(inst_set(sigma, f->s1), inst_set(sigma, f->s2));
        case Formula::Kind::Not:
            return Formula::lnot(formula(taboo, f->f1));
        case Formula::Kind::And:
            return Formula::land(formula(taboo, f->f1), formula(taboo, f->f2));
        case Formula::Kind::Forall:
            return Formula::forall(f->qvar, formula(taboo.plus_var(f->qvar), f->f1));
        case Formula::Kind::Box: {
            ProgSubstResult r = program(taboo, GroundSet::empty(Universe::Vars), f->prog);
            return Formula::box(r.prog, formula(r.out, f->f1));
        }
        case Formula::Kind::AcBox: {
            ProgSubstResult r = program(taboo, GroundSet::empty(Universe::Vars), f->prog);
            return Formula::ac_box(r.prog, formula(r.out, f->assume),
                                   formula(r.out, f->commit), formula(r.out, f->f1));
        }
    }
    throw std::logic_error("unreachable formula kind");
}

ProgSubstResult Engine::program(const Taboo& taboo, const GroundSet& ctx,
                               const ProgramPtr& p) const {
    if (!p) throw std::logic_error("null program");
    Taboo inner = taboo.plus_vars(ctx);
    switch (p->kind) {
        case Program::Kind::ProgConst: {
            GroundSet chans = inst_ground(sigma, p->chanSet, "program constant");
            GroundSet vars = inst_ground(sigma, p->varSet, "program constant");
            auto it = sigma.progs.find(p->sym);
            ProgramPtr result;
            ProgStatics st;
            if (it != sigma.progs.end()) {
                st = statics_program(it->second);
                if (!subset_eq(st.bv, vars))
                    throw clash_error({"progconst-bound", p->sym, "program constant",
                                       "bound variables " + ground_text(st.bv) +
                                           " exceed annotation " + ground_text(vars)});
                if (!subset_eq(st.cn, chans))
                    throw clash_error({"progconst-bound", p->sym, "program constant",
                                       "written channels " + ground_text(st.cn) +
                                           " exceed annotation " + ground_text(chans)});
                result = it->second;
            } else {
                st.bv = vars;
                st.cn = chans;
                result = Program::rebuild_const(p, SetExpr::make(chans), SetExpr::make(vars));
            }
            Taboo out = taboo.plus_vars(st.bv);
            out.chans = set_union(out.chans, st.cn);
            return {result, out};
        }
        case Program::Kind::Assign: {
#ifndef NDEBUG
            assert(!member(p->x, ctx) && "bound variable already bound in parallel context");
#endif
            TermPtr rhs = term(inner, p->rhs);
            return {Program::assign(p->x, rhs), taboo.plus_var(p->x)};
        }
        case Program::Kind::Random:
            return {p, taboo.plus_var(p->x)};
        case Program::Kind::Test:
            return {Program::test(formula(inner, p->chi)), taboo};
        case Program::Kind::ODE: {
            std::vector<std::pair<Atom, TermPtr>> eqs;
            Taboo out = taboo.plus_vars(GroundSet::gt());
            for (const auto& [x, rhs] : p->odes) {
                eqs.emplace_back(x, term(inner, rhs));
                out = out.plus_var(x).plus_var(x.with_prime());
            }
            return {Program::ode(std::move(eqs), formula(inner, p->chi)), out};
        }
        case Program::Kind::Send: {
            TermPtr payload = term(inner, p->rhs);
            return {Program::send(p->ch, p->h, payload), taboo.plus_var(p->h).plus_chan(p->ch)};
        }
        case Program::Kind::Receive:
            return {p, taboo.plus_var(p->h).plus_var(p->x).plus_chan(p->ch)};
        case Program::Kind::Choice: {
            ProgSubstResult a = program(taboo, ctx, p->p1);
            ProgSubstResult b = program(taboo, ctx, p->p2);
            return {Program::choice(a.prog, b.prog), taboo_union(a.out, b.out)};
        }
        case Program::Kind::Seq: {
            ProgSubstResult a = program(taboo, ctx, p->p1);
            ProgSubstResult b = program(a.out, ctx, p->p2);
            return {Program::seq(a.prog, b.prog), b.out};
        }
        case Program::Kind::Star: {
            ProgSubstResult first = program(taboo, ctx, p->p1);
            ProgSubstResult second = program(first.out, ctx, p->p1);
            if (!syntactic_eq(first.prog, second.prog) || !(second.out == first.out))
                throw std::logic_error("repetition substitution failed to reach a fixpoint");
            return {Program::star(second.prog), first.out};
        }
        case Program::Kind::Par: {
            // The context for each side extends the ambient context by what
            // the substituted sibling binds (recorders and global time are
            // shared by construction and stay out).
            ProgSubstResult pre1 = program(taboo, ctx, p->p1);
            ProgSubstResult pre2 = program(taboo, ctx, p->p2);
            GroundSet allow = shared_state_allowance();
            GroundSet ctx1 =
                set_minus(set_union(ctx, statics_program(pre2.prog).bv), allow);
            GroundSet ctx2 =
                set_minus(set_union(ctx, statics_program(pre1.prog).bv), allow);
            ProgSubstResult a = program(taboo, ctx1, p->p1);
            ProgSubstResult b = program(taboo, ctx2, p->p2);
            return {Program::par(a.prog, b.prog), taboo_union(a.out, b.out)};
        }
    }
    throw std::logic_error("unreachable program kind");
}

}  // namespace

TermPtr usub_term(const Substitution& sigma, const Taboo& taboo, const TermPtr& e) {
    return Engine{sigma, nullptr}.term(taboo, e);
}

FormulaPtr usub_formula(const Substitution& sigma, const Taboo& taboo, const FormulaPtr& f) {
    return Engine{sigma, nullptr}.formula(taboo, f);
}

ProgSubstResult usub_program(const Substitution& sigma, const Taboo& taboo,
                             const GroundSet& parallelContext, const ProgramPtr& p) {
    return Engine{sigma, nullptr}.program(taboo, parallelContext, p);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_dots(const TermPtr& t, const SymbolDecl& decl, std::vector<std::string>& errs);
void check_dots(const FormulaPtr& f, const SymbolDecl& decl, std::vector<std::string>& errs);

void check_dots(const TermPtr& t, const SymbolDecl& decl, std::vector<std::string>& errs) {
    if (!t) return;
    if (t->kind == Term::Kind::Dot) {
        if (t->dotIndex >= static_cast<int>(decl.argSorts.size()))
            errs.push_back(decl.name + ": dot index " + std::to_string(t->dotIndex) +
                           " exceeds arity");
        else if (t->sort != decl.argSorts[static_cast<size_t>(t->dotIndex)])
            errs.push_back(decl.name + ": dot ." + std::to_string(t->dotIndex) +
                           " has the wrong sort");
    }
    for (const TermPtr& a : t->args) check_dots(a, decl, errs);
    check_dots(t->a, decl, errs);
    check_dots(t->b, decl, errs);
    check_dots(t->c, decl, errs);
}

void check_dots_prog(const ProgramPtr& p, const SymbolDecl& decl,
                     std::vector<std::string>& errs) {
    if (!p) return;
    check_dots(p->rhs, decl, errs);
    check_dots(p->chi, decl, errs);
    for (const auto& [x, rhs] : p->odes) check_dots(rhs, decl, errs);
    check_dots_prog(p->p1, decl, errs);
    check_dots_prog(p->p2, decl, errs);
}

void check_dots(const FormulaPtr& f, const SymbolDecl& decl, std::vector<std::string>& errs) {
    if (!f) return;
    check_dots(f->t1, decl, errs);
    check_dots(f->t2, decl, errs);
    for (const TermPtr& a : f->args) check_dots(a, decl, errs);
    check_dots(f->f1, decl, errs);
    check_dots(f->f2, decl, errs);
    check_dots(f->assume, decl, errs);
    check_dots(f->commit, decl, errs);
    check_dots_prog(f->prog, decl, errs);
}

bool sets_ground_term(const TermPtr& t);
bool sets_ground_formula(const FormulaPtr& f);
bool sets_ground_prog(const ProgramPtr& p);

bool ground_set(const SetExprPtr& s) { return !s || normalize(s)->is_ground(); }

bool sets_ground_term(const TermPtr& t) {
    if (!t) return true;
    if (!ground_set(t->chanSet) || !ground_set(t->projSet)) return false;
    for (const TermPtr& a : t->args)
        if (!sets_ground_term(a)) return false;
    return sets_ground_term(t->a) && sets_ground_term(t->b) && sets_ground_term(t->c);
}

bool sets_ground_prog(const ProgramPtr& p) {
    if (!p) return true;
    if (!ground_set(p->chanSet) || !ground_set(p->varSet)) return false;
    if (!sets_ground_term(p->rhs) || !sets_ground_formula(p->chi)) return false;
    for (const auto& [x, rhs] : p->odes)
        if (!sets_ground_term(rhs)) return false;
    return sets_ground_prog(p->p1) && sets_ground_prog(p->p2);
}

bool sets_ground_formula(const FormulaPtr& f) {
    if (!f) return true;
    if (!ground_set(f->chanSet) || !ground_set(f->varSet) || !ground_set(f->s1) ||
        !ground_set(f->s2))
        return false;
    if (!sets_ground_term(f->t1) || !sets_ground_term(f->t2)) return false;
    for (const TermPtr& a : f->args)
        if (!sets_ground_term(a)) return false;
    return sets_ground_formula(f->f1) && sets_ground_formula(f->f2) &&
           sets_ground_formula(f->assume) && sets_ground_formula(f->commit) &&
           sets_ground_prog(f->prog);
}

}  // namespace

void validate_substitution(const Substitution& sigma, const Decls& decls) {
    std::vector<std::string> errs;
    auto decl_of = [&](const std::string& name, SymKind kind) -> const SymbolDecl* {
        const SymbolDecl* d = decls.find(name);
        if (!d) {
            errs.push_back("undeclared symbol " + name);
            return nullptr;
        }
        if (d->kind != kind) {
            errs.push_back(name + ": replacement kind does not match declaration");
            return nullptr;
        }
        return d;
    };
    for (const auto& [name, rep] : sigma.funcs) {
        const SymbolDecl* d = decl_of(name, SymKind::Func);
        if (!d) continue;
        if (rep->sort != d->result)
            errs.push_back(name + ": replacement sort " + sort_name(rep->sort) +
                           " does not match declared " + sort_name(d->result));
        check_dots(rep, *d, errs);
        if (!sets_ground_term(rep)) errs.push_back(name + ": replacement has symbolic sets");
        if (d->restr == Restriction::PolyOnly && !is_program_polynomial(rep))
            errs.push_back(name + ": replacement must be a program polynomial");
    }
    for (const auto& [name, rep] : sigma.preds) {
        const SymbolDecl* d = decl_of(name, SymKind::Pred);
        if (!d) continue;
        check_dots(rep, *d, errs);
        if (!sets_ground_formula(rep)) errs.push_back(name + ": replacement has symbolic sets");
        if (d->restr == Restriction::FolrOnly && !is_folr(rep))
            errs.push_back(name + ": replacement must be first-order real arithmetic");
    }
    SymbolDecl nodots;  // space predicates, programs: no dots allowed
    for (const auto& [name, rep] : sigma.spacePreds) {
        if (!decl_of(name, SymKind::SpacePred)) continue;
        check_dots(rep, nodots, errs);
        if (!sets_ground_formula(rep)) errs.push_back(name + ": replacement has symbolic sets");
    }
    for (const auto& [name, rep] : sigma.progs) {
        if (!decl_of(name, SymKind::ProgConst)) continue;
        check_dots_prog(rep, nodots, errs);
        if (!sets_ground_prog(rep)) errs.push_back(name + ": replacement has symbolic sets");
    }
    for (const auto& [name, rep] : sigma.setVars) {
        const SymbolDecl* d = decl_of(name, SymKind::SetVar);
        if (!d) continue;
        if (!normalize(rep)->is_ground()) errs.push_back(name + ": replacement set is not ground");
        else if (rep->uni != d->setUni) errs.push_back(name + ": replacement set universe mismatch");
    }
    if (!errs.empty()) {
        std::string msg = "invalid substitution:";
        for (const std::string& e : errs) msg += "\n  - " + e;
        throw sort_error(msg);
    }
}

}  // namespace chp

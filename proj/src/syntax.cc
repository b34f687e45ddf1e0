#include "chp/syntax.hh"

#include <algorithm>

namespace chp {

// ---------------------------------------------------------------------------
// Declarations

Decls::Decls() {
    vars["mu"] = Sort::Real;  // the global clock is always in scope
}

void Decls::declare_var(const std::string& name, Sort s) {
    if (s == Sort::Channel) throw sort_error("variable " + name + " cannot have channel sort");
    auto it = vars.find(name);
    if (it != vars.end() && it->second != s)
        throw sort_error("variable " + name + " redeclared with different sort");
    vars[name] = s;
}

void Decls::declare_chan(const std::string& name) { chans[name] = true; }

void Decls::declare(SymbolDecl d) {
    auto it = symbols.find(d.name);
    if (it != symbols.end() && it->second.kind != d.kind)
        throw sort_error("symbol " + d.name + " redeclared with different kind");
    symbols[d.name] = std::move(d);
}

const SymbolDecl* Decls::find(const std::string& name) const {
    auto it = symbols.find(name);
    return it == symbols.end() ? nullptr : &it->second;
}

const SymbolDecl& Decls::get(const std::string& name) const {
    const SymbolDecl* d = find(name);
    if (!d) throw sort_error("undeclared symbol " + name);
    return *d;
}

std::optional<Atom> Decls::lookup_var(const std::string& name, bool primed) const {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    if (primed && it->second != Sort::Real) return std::nullopt;
    return Atom{it->second, name, primed};
}

std::optional<Atom> Decls::lookup_chan(const std::string& name) const {
    if (!chans.count(name)) return std::nullopt;
    return Atom::chan(name);
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

std::shared_ptr<Term> tnode(Term::Kind k, Sort s) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->sort = s;
    return t;
}

[[noreturn]] void sort_fail(const std::string& msg) { throw sort_error(msg); }

void want(const TermPtr& t, Sort s, const char* what) {
    if (!t) sort_fail(std::string("missing ") + what);
    if (t->sort != s)
        sort_fail(std::string(what) + ": expected " + sort_name(s) + ", got " + sort_name(t->sort));
}

// Numeral literals are written without sort decoration; shallow coercion
// resolves them against the required operand sort.
TermPtr coerce(TermPtr t, Sort s) {
    if (!t || t->sort == s) return t;
    if (t->kind == Term::Kind::RealLit && s == Sort::Int) {
        Rat q = t->rlit;
        q.canonicalize();
        if (q.get_den() == 1) return Term::int_lit(q.get_num());
    }
    if (t->kind == Term::Kind::IntLit && s == Sort::Real) return Term::real_lit(Rat(t->ilit));
    return t;
}

SetExprPtr norm_set(SetExprPtr s, Universe u, const char* what) {
    if (!s) s = SetExpr::make(GroundSet::empty(u));
    if (s->uni != u) sort_fail(std::string(what) + ": wrong set universe");
    return normalize(s);
}

void want_unprimed_real(const Atom& x, const char* what) {
    if (x.sort != Sort::Real || x.primed)
        sort_fail(std::string(what) + ": needs an unprimed real variable, got " + atom_text(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// Term factories

TermPtr Term::mkvar(Atom v) {
    if (v.sort == Sort::Channel) sort_fail("channel used as variable: " + v.name);
    if (v.primed && v.sort != Sort::Real) sort_fail("primed non-real variable " + v.name);
    auto t = tnode(Kind::Var, v.sort);
    t->var = std::move(v);
    return t;
}

TermPtr Term::real_lit(Rat q) {
    q.canonicalize();
    auto t = tnode(Kind::RealLit, Sort::Real);
    t->rlit = std::move(q);
    return t;
}

TermPtr Term::int_lit(Int n) {
    auto t = tnode(Kind::IntLit, Sort::Int);
    t->ilit = std::move(n);
    return t;
}

TermPtr Term::chan_lit(Atom ch) {
    if (ch.sort != Sort::Channel) sort_fail("channel literal needs a channel name");
    auto t = tnode(Kind::ChanLit, Sort::Channel);
    t->var = std::move(ch);
    return t;
}

TermPtr Term::empty_trace() { return tnode(Kind::EmptyTrace, Sort::Trace); }

TermPtr Term::dot(int index, Sort s) {
    if (index < 0) sort_fail("negative dot index");
    auto t = tnode(Kind::Dot, s);
    t->dotIndex = index;
    return t;
}

TermPtr Term::func(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                   std::vector<TermPtr> args) {
    const SymbolDecl& decl = d.get(sym);
    if (decl.kind != SymKind::Func) sort_fail(sym + " is not a function symbol");
    if (args.size() != decl.argSorts.size())
        sort_fail(sym + ": arity mismatch (" + std::to_string(args.size()) + " vs " +
                  std::to_string(decl.argSorts.size()) + ")");
    auto t = tnode(Kind::FuncApp, decl.result);
    t->sym = sym;
    t->restr = decl.restr;
    t->chanSet = norm_set(std::move(chanSet), Universe::Chans, "function channel set");
    for (size_t i = 0; i < args.size(); i++) {
        args[i] = coerce(std::move(args[i]), decl.argSorts[i]);
        want(args[i], decl.argSorts[i], ("argument of " + sym).c_str());
    }
    t->args = std::move(args);
    return t;
}

TermPtr Term::rebuild_func(const TermPtr& like, SetExprPtr chanSet, std::vector<TermPtr> args) {
    if (!like || like->kind != Kind::FuncApp) sort_fail("rebuild of a non-application");
    if (args.size() != like->args.size()) sort_fail(like->sym + ": arity mismatch");
    auto t = tnode(Kind::FuncApp, like->sort);
    t->sym = like->sym;
    t->restr = like->restr;
    t->chanSet = norm_set(std::move(chanSet), Universe::Chans, "function channel set");
    for (size_t i = 0; i < args.size(); i++)
        want(args[i], like->args[i]->sort, ("argument of " + like->sym).c_str());
    t->args = std::move(args);
    return t;
}

TermPtr Term::plus(TermPtr l, TermPtr r) {
    l = coerce(std::move(l), Sort::Real);
    r = coerce(std::move(r), Sort::Real);
    want(l, Sort::Real, "+ operand");
    want(r, Sort::Real, "+ operand");
    auto t = tnode(Kind::Plus, Sort::Real);
    t->a = std::move(l);
    t->b = std::move(r);
    return t;
}

TermPtr Term::times(TermPtr l, TermPtr r) {
    l = coerce(std::move(l), Sort::Real);
    r = coerce(std::move(r), Sort::Real);
    want(l, Sort::Real, "* operand");
    want(r, Sort::Real, "* operand");
    auto t = tnode(Kind::Times, Sort::Real);
    t->a = std::move(l);
    t->b = std::move(r);
    return t;
}

TermPtr Term::int_plus(TermPtr l, TermPtr r) {
    l = coerce(std::move(l), Sort::Int);
    r = coerce(std::move(r), Sort::Int);
    want(l, Sort::Int, "integer + operand");
    want(r, Sort::Int, "integer + operand");
    auto t = tnode(Kind::IntPlus, Sort::Int);
    t->a = std::move(l);
    t->b = std::move(r);
    return t;
}

TermPtr Term::differential(TermPtr body) {
    want(body, Sort::Real, "differential body");
    if (!is_program_polynomial(body))
        sort_fail("differential applies only to program polynomials");
    auto t = tnode(Kind::Differential, Sort::Real);
    t->a = std::move(body);
    return t;
}

TermPtr Term::val(TermPtr tr) {
    want(tr, Sort::Trace, "val argument");
    auto t = tnode(Kind::Val, Sort::Real);
    t->a = std::move(tr);
    return t;
}

TermPtr Term::stamp(TermPtr tr) {
    want(tr, Sort::Trace, "stamp argument");
    auto t = tnode(Kind::Stamp, Sort::Real);
    t->a = std::move(tr);
    return t;
}

TermPtr Term::len(TermPtr tr) {
    want(tr, Sort::Trace, "len argument");
    auto t = tnode(Kind::Len, Sort::Int);
    t->a = std::move(tr);
    return t;
}

TermPtr Term::chan_of(TermPtr tr) {
    want(tr, Sort::Trace, "chanof argument");
    auto t = tnode(Kind::ChanOf, Sort::Channel);
    t->a = std::move(tr);
    return t;
}

TermPtr Term::comm_item(TermPtr ch, TermPtr value, TermPtr stampT) {
    want(ch, Sort::Channel, "communication channel");
    value = coerce(std::move(value), Sort::Real);
    stampT = coerce(std::move(stampT), Sort::Real);
    want(value, Sort::Real, "communicated value");
    want(stampT, Sort::Real, "communication timestamp");
    auto t = tnode(Kind::CommItem, Sort::Trace);
    t->a = std::move(ch);
    t->b = std::move(value);
    t->c = std::move(stampT);
    return t;
}

TermPtr Term::concat(TermPtr l, TermPtr r) {
    want(l, Sort::Trace, "concatenation operand");
    want(r, Sort::Trace, "concatenation operand");
    auto t = tnode(Kind::Concat, Sort::Trace);
    t->a = std::move(l);
    t->b = std::move(r);
    return t;
}

TermPtr Term::proj(TermPtr tr, SetExprPtr chans) {
    want(tr, Sort::Trace, "projection operand");
    auto t = tnode(Kind::Proj, Sort::Trace);
    t->a = std::move(tr);
    t->projSet = norm_set(std::move(chans), Universe::Chans, "projection set");
    return t;
}

TermPtr Term::at(TermPtr tr, TermPtr index) {
    want(tr, Sort::Trace, "indexing operand");
    index = coerce(std::move(index), Sort::Int);
    want(index, Sort::Int, "trace index");
    auto t = tnode(Kind::At, Sort::Trace);
    t->a = std::move(tr);
    t->b = std::move(index);
    return t;
}

// ---------------------------------------------------------------------------
// Program factories

namespace {
std::shared_ptr<Program> pnode(Program::Kind k) {
    auto p = std::make_shared<Program>();
    p->kind = k;
    return p;
}
}  // namespace

ProgramPtr Program::prog_const(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                               SetExprPtr varSet) {
    const SymbolDecl& decl = d.get(sym);
    if (decl.kind != SymKind::ProgConst) sort_fail(sym + " is not a program constant");
    auto p = pnode(Kind::ProgConst);
    p->sym = sym;
    p->chanSet = norm_set(std::move(chanSet), Universe::Chans, "program constant channel set");
    p->varSet = norm_set(std::move(varSet), Universe::Vars, "program constant variable set");
    // Bound annotations range over state the program may write: real and
    // trace variables only.
    if (p->varSet->is_ground()) {
        const GroundSet& g = p->varSet->ground;
        if (g.cofiniteMask & sort_bit(Sort::Int))
            sort_fail(sym + ": bound-variable annotation must lie in RVar u TVar");
        for (const Atom& a : g.atoms)
            if (a.sort == Sort::Int && member(a, g))
                sort_fail(sym + ": bound-variable annotation must lie in RVar u TVar");
    }
    return p;
}

ProgramPtr Program::rebuild_const(const ProgramPtr& like, SetExprPtr chanSet, SetExprPtr varSet) {
    if (!like || like->kind != Kind::ProgConst) sort_fail("rebuild of a non-constant");
    auto p = pnode(Kind::ProgConst);
    p->sym = like->sym;
    p->chanSet = norm_set(std::move(chanSet), Universe::Chans, "program constant channel set");
    p->varSet = norm_set(std::move(varSet), Universe::Vars, "program constant variable set");
    return p;
}

ProgramPtr Program::assign(Atom x, TermPtr rhs) {
    want_unprimed_real(x, "assignment");
    rhs = coerce(std::move(rhs), Sort::Real);
    want(rhs, Sort::Real, "assignment rhs");
    if (!is_program_polynomial(rhs)) sort_fail("assignment rhs must be a program polynomial");
    auto p = pnode(Kind::Assign);
    p->x = std::move(x);
    p->rhs = std::move(rhs);
    return p;
}

ProgramPtr Program::random(Atom x) {
    want_unprimed_real(x, "random assignment");
    auto p = pnode(Kind::Random);
    p->x = std::move(x);
    return p;
}

ProgramPtr Program::test(FormulaPtr chi) {
    if (!chi) sort_fail("missing test condition");
    if (!is_folr(chi)) sort_fail("test condition must be first-order real arithmetic");
    auto p = pnode(Kind::Test);
    p->chi = std::move(chi);
    return p;
}

ProgramPtr Program::ode(std::vector<std::pair<Atom, TermPtr>> eqs, FormulaPtr chi) {
    if (eqs.empty()) sort_fail("empty differential equation system");
    for (auto& [x, rhs] : eqs) {
        want_unprimed_real(x, "differential equation");
        if (x == Atom::mu()) sort_fail("the global clock evolves implicitly; mu' = 1 is built in");
        rhs = coerce(std::move(rhs), Sort::Real);
        want(rhs, Sort::Real, "differential equation rhs");
        if (!is_program_polynomial(rhs)) sort_fail("differential equation rhs must be a program polynomial");
    }
    for (size_t i = 0; i < eqs.size(); i++)
        for (size_t j = i + 1; j < eqs.size(); j++)
            if (eqs[i].first == eqs[j].first) sort_fail("duplicate differential equation lhs " + eqs[i].first.name);
    if (!chi) chi = Formula::truth();
    if (!is_folr(chi)) sort_fail("evolution constraint must be first-order real arithmetic");
    auto p = pnode(Kind::ODE);
    p->odes = std::move(eqs);
    p->chi = std::move(chi);
    return p;
}

ProgramPtr Program::seq(ProgramPtr a, ProgramPtr b) {
    auto p = pnode(Kind::Seq);
    p->p1 = std::move(a);
    p->p2 = std::move(b);
    return p;
}

ProgramPtr Program::choice(ProgramPtr a, ProgramPtr b) {
    auto p = pnode(Kind::Choice);
    p->p1 = std::move(a);
    p->p2 = std::move(b);
    return p;
}

ProgramPtr Program::star(ProgramPtr body) {
    auto p = pnode(Kind::Star);
    p->p1 = std::move(body);
    return p;
}

ProgramPtr Program::send(Atom ch, Atom h, TermPtr payload) {
    if (ch.sort != Sort::Channel) sort_fail("send needs a channel");
    if (h.sort != Sort::Trace) sort_fail("send recorder must be a trace variable");
    payload = coerce(std::move(payload), Sort::Real);
    want(payload, Sort::Real, "send payload");
    if (!is_program_polynomial(payload)) sort_fail("send payload must be a program polynomial");
    auto p = pnode(Kind::Send);
    p->ch = std::move(ch);
    p->h = std::move(h);
    p->rhs = std::move(payload);
    return p;
}

ProgramPtr Program::receive(Atom ch, Atom h, Atom x) {
    if (ch.sort != Sort::Channel) sort_fail("receive needs a channel");
    if (h.sort != Sort::Trace) sort_fail("receive recorder must be a trace variable");
    want_unprimed_real(x, "receive target");
    auto p = pnode(Kind::Receive);
    p->ch = std::move(ch);
    p->h = std::move(h);
    p->x = std::move(x);
    return p;
}

ProgramPtr Program::par(ProgramPtr a, ProgramPtr b) {
    auto p = pnode(Kind::Par);
    p->p1 = std::move(a);
    p->p2 = std::move(b);
    return p;
}

ProgramPtr Program::power(ProgramPtr alpha, unsigned n) {
    if (n == 0) return test(Formula::truth());
    return seq(alpha, power(alpha, n - 1));
}

// ---------------------------------------------------------------------------
// Formula factories

namespace {
std::shared_ptr<Formula> fnode(Formula::Kind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}
}  // namespace

FormulaPtr Formula::eq(TermPtr l, TermPtr r) {
    if (!l || !r) sort_fail("missing equality operand");
    if (l->sort != r->sort) {
        l = coerce(std::move(l), r->sort);
        r = coerce(std::move(r), l->sort);
    }
    if (l->sort != r->sort) sort_fail(std::string("equality operands of sorts ") +
                                      sort_name(l->sort) + " and " + sort_name(r->sort));
    auto f = fnode(Kind::Eq);
    f->relSort = l->sort;
    f->t1 = std::move(l);
    f->t2 = std::move(r);
    return f;
}

FormulaPtr Formula::geq(TermPtr l, TermPtr r) {
    if (!l || !r) sort_fail("missing comparison operand");
    if (l->sort != r->sort) {
        l = coerce(std::move(l), r->sort);
        r = coerce(std::move(r), l->sort);
    }
    if (l->sort != r->sort || (l->sort != Sort::Real && l->sort != Sort::Int))
        sort_fail(">= needs two real or two integer operands");
    auto f = fnode(Kind::Geq);
    f->relSort = l->sort;
    f->t1 = std::move(l);
    f->t2 = std::move(r);
    return f;
}

FormulaPtr Formula::prefix(TermPtr l, TermPtr r) {
    want(l, Sort::Trace, "prefix operand");
    want(r, Sort::Trace, "prefix operand");
    auto f = fnode(Kind::Prefix);
    f->relSort = Sort::Trace;
    f->t1 = std::move(l);
    f->t2 = std::move(r);
    return f;
}

FormulaPtr Formula::pred(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                         std::vector<TermPtr> args) {
    const SymbolDecl& decl = d.get(sym);
    if (decl.kind != SymKind::Pred) sort_fail(sym + " is not a predicate symbol");
    if (args.size() != decl.argSorts.size()) sort_fail(sym + ": arity mismatch");
    auto f = fnode(Kind::PredApp);
    f->sym = sym;
    f->restr = decl.restr;
    f->chanSet = norm_set(std::move(chanSet), Universe::Chans, "predicate channel set");
    for (size_t i = 0; i < args.size(); i++) {
        args[i] = coerce(std::move(args[i]), decl.argSorts[i]);
        want(args[i], decl.argSorts[i], ("argument of " + sym).c_str());
    }
    f->args = std::move(args);
    return f;
}

FormulaPtr Formula::space_pred(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                               SetExprPtr varSet) {
    const SymbolDecl& decl = d.get(sym);
    if (decl.kind != SymKind::SpacePred) sort_fail(sym + " is not a space predicate");
    auto f = fnode(Kind::SpacePred);
    f->sym = sym;
    f->chanSet = norm_set(std::move(chanSet), Universe::Chans, "space predicate channel set");
    f->varSet = norm_set(std::move(varSet), Universe::Vars, "space predicate variable set");
    return f;
}

FormulaPtr Formula::in_set(TermPtr element, SetExprPtr set) {
    want(element, Sort::Channel, "set membership element");
    auto f = fnode(Kind::InSet);
    f->t1 = std::move(element);
    f->s1 = norm_set(std::move(set), Universe::Chans, "set membership");
    return f;
}

FormulaPtr Formula::set_eqf(SetExprPtr l, SetExprPtr r) {
    if (!l || !r || l->uni != r->uni) sort_fail("set equality needs two sets of one universe");
    auto f = fnode(Kind::SetEq);
    f->s1 = normalize(l);
    f->s2 = normalize(r);
    return f;
}

FormulaPtr Formula::lnot(FormulaPtr g) {
    if (!g) sort_fail("missing negation operand");
    auto f = fnode(Kind::Not);
    f->f1 = std::move(g);
    return f;
}

FormulaPtr Formula::land(FormulaPtr l, FormulaPtr r) {
    if (!l || !r) sort_fail("missing conjunction operand");
    auto f = fnode(Kind::And);
    f->f1 = std::move(l);
    f->f2 = std::move(r);
    return f;
}

FormulaPtr Formula::forall(Atom v, FormulaPtr body) {
    if (v.sort == Sort::Channel) sort_fail("cannot quantify over a channel");
    if (v.primed) sort_fail("cannot quantify over a primed variable");
    if (!body) sort_fail("missing quantifier body");
    auto f = fnode(Kind::Forall);
    f->qvar = std::move(v);
    f->f1 = std::move(body);
    return f;
}

FormulaPtr Formula::box(ProgramPtr a, FormulaPtr post) {
    if (!a || !post) sort_fail("missing box component");
    auto f = fnode(Kind::Box);
    f->prog = std::move(a);
    f->f1 = std::move(post);
    return f;
}

FormulaPtr Formula::ac_box(ProgramPtr a, FormulaPtr assume, FormulaPtr commit, FormulaPtr post) {
    if (!a || !assume || !commit || !post) sort_fail("missing ac-box component");
    auto f = fnode(Kind::AcBox);
    f->prog = std::move(a);
    f->assume = std::move(assume);
    f->commit = std::move(commit);
    f->f1 = std::move(post);
    return f;
}

FormulaPtr Formula::lor(FormulaPtr l, FormulaPtr r) {
    return lnot(land(lnot(std::move(l)), lnot(std::move(r))));
}

FormulaPtr Formula::imply(FormulaPtr l, FormulaPtr r) {
    return lnot(land(std::move(l), lnot(std::move(r))));
}

FormulaPtr Formula::equiv(FormulaPtr l, FormulaPtr r) {
    return land(imply(l, r), imply(r, l));
}

FormulaPtr Formula::exists(Atom v, FormulaPtr body) {
    return lnot(forall(std::move(v), lnot(std::move(body))));
}

FormulaPtr Formula::truth() {
    FormulaPtr z = eq(Term::real_lit(0), Term::real_lit(0));
    return lnot(land(z, lnot(z)));
}

FormulaPtr Formula::falsity() {
    FormulaPtr z = eq(Term::real_lit(0), Term::real_lit(0));
    return land(z, lnot(z));
}

FormulaPtr Formula::diamond(ProgramPtr a, FormulaPtr post) {
    return lnot(box(std::move(a), lnot(std::move(post))));
}

FormulaPtr Formula::ac_diamond(ProgramPtr a, FormulaPtr assume, FormulaPtr commit,
                               FormulaPtr post) {
    return lnot(ac_box(std::move(a), std::move(assume), lnot(std::move(commit)),
                       lnot(std::move(post))));
}

// ---------------------------------------------------------------------------
// Structural predicates

bool is_program_polynomial(const TermPtr& t) {
    if (!t || t->sort != Sort::Real) return false;
    switch (t->kind) {
        case Term::Kind::RealLit: return true;
        case Term::Kind::Var: return !t->var.primed;
        case Term::Kind::Dot: return true;
        case Term::Kind::Plus:
        case Term::Kind::Times:
            return is_program_polynomial(t->a) && is_program_polynomial(t->b);
        case Term::Kind::FuncApp: {
            if (t->restr != Restriction::PolyOnly) return false;
            if (!t->chanSet->is_ground() || !t->chanSet->ground.is_empty()) return false;
            for (const TermPtr& a : t->args)
                if (!is_program_polynomial(a)) return false;
            return true;
        }
        default: return false;
    }
}

bool is_folr(const FormulaPtr& f) {
    if (!f) return false;
    switch (f->kind) {
        case Formula::Kind::Eq:
        case Formula::Kind::Geq:
            return f->relSort == Sort::Real && is_program_polynomial(f->t1) &&
                   is_program_polynomial(f->t2);
        case Formula::Kind::Not: return is_folr(f->f1);
        case Formula::Kind::And: return is_folr(f->f1) && is_folr(f->f2);
        case Formula::Kind::Forall:
            return f->qvar.sort == Sort::Real && is_folr(f->f1);
        case Formula::Kind::PredApp: {
            if (f->restr != Restriction::FolrOnly) return false;
            if (!f->chanSet->is_ground() || !f->chanSet->ground.is_empty()) return false;
            for (const TermPtr& a : f->args)
                if (!is_program_polynomial(a)) return false;
            return true;
        }
        default: return false;
    }
}

// ---------------------------------------------------------------------------
// Structural equality

bool syntactic_eq(const TermPtr& x, const TermPtr& y) {
    if (x == y) return true;
    if (!x || !y || x->kind != y->kind || x->sort != y->sort) return false;
    switch (x->kind) {
        case Term::Kind::Var:
        case Term::Kind::ChanLit: return x->var == y->var;
        case Term::Kind::RealLit: return x->rlit == y->rlit;
        case Term::Kind::IntLit: return x->ilit == y->ilit;
        case Term::Kind::EmptyTrace: return true;
        case Term::Kind::Dot: return x->dotIndex == y->dotIndex;
        case Term::Kind::FuncApp: {
            if (x->sym != y->sym || x->args.size() != y->args.size()) return false;
            if (!setexpr_eq(x->chanSet, y->chanSet)) return false;
            for (size_t i = 0; i < x->args.size(); i++)
                if (!syntactic_eq(x->args[i], y->args[i])) return false;
            return true;
        }
        case Term::Kind::Proj:
            return setexpr_eq(x->projSet, y->projSet) && syntactic_eq(x->a, y->a);
        default:
            return syntactic_eq(x->a, y->a) && syntactic_eq(x->b, y->b) &&
                   syntactic_eq(x->c, y->c);
    }
}

bool syntactic_eq(const ProgramPtr& x, const ProgramPtr& y) {
    if (x == y) return true;
    if (!x || !y || x->kind != y->kind) return false;
    switch (x->kind) {
        case Program::Kind::ProgConst:
            return x->sym == y->sym && setexpr_eq(x->chanSet, y->chanSet) &&
                   setexpr_eq(x->varSet, y->varSet);
        case Program::Kind::Assign:
            return x->x == y->x && syntactic_eq(x->rhs, y->rhs);
        case Program::Kind::Random: return x->x == y->x;
        case Program::Kind::Test: return syntactic_eq(x->chi, y->chi);
        case Program::Kind::ODE: {
            if (x->odes.size() != y->odes.size()) return false;
            for (size_t i = 0; i < x->odes.size(); i++)
                if (x->odes[i].first != y->odes[i].first ||
                    !syntactic_eq(x->odes[i].second, y->odes[i].second))
                    return false;
            return syntactic_eq(x->chi, y->chi);
        }
        case Program::Kind::Send:
            return x->ch == y->ch && x->h == y->h && syntactic_eq(x->rhs, y->rhs);
        case Program::Kind::Receive:
            return x->ch == y->ch && x->h == y->h && x->x == y->x;
        case Program::Kind::Star: return syntactic_eq(x->p1, y->p1);
        default:
            return syntactic_eq(x->p1, y->p1) && syntactic_eq(x->p2, y->p2);
    }
}

bool syntactic_eq(const FormulaPtr& x, const FormulaPtr& y) {
    if (x == y) return true;
    if (!x || !y || x->kind != y->kind) return false;
    switch (x->kind) {
        case Formula::Kind::Eq:
        case Formula::Kind::Geq:
        case Formula::Kind::Prefix:
            return x->relSort == y->relSort && syntactic_eq(x->t1, y->t1) &&
                   syntactic_eq(x->t2, y->t2);
        case Formula::Kind::PredApp: {
            if (x->sym != y->sym || x->args.size() != y->args.size()) return false;
            if (!setexpr_eq(x->chanSet, y->chanSet)) return false;
            for (size_t i = 0; i < x->args.size(); i++)
                if (!syntactic_eq(x->args[i], y->args[i])) return false;
            return true;
        }
        case Formula::Kind::SpacePred:
            return x->sym == y->sym && setexpr_eq(x->chanSet, y->chanSet) &&
                   setexpr_eq(x->varSet, y->varSet);
        case Formula::Kind::InSet:
            return syntactic_eq(x->t1, y->t1) && setexpr_eq(x->s1, y->s1);
        case Formula::Kind::SetEq:
            return setexpr_eq(x->s1, y->s1) && setexpr_eq(x->s2, y->s2);
        case Formula::Kind::Not: return syntactic_eq(x->f1, y->f1);
        case Formula::Kind::And:
            return syntactic_eq(x->f1, y->f1) && syntactic_eq(x->f2, y->f2);
        case Formula::Kind::Forall:
            return x->qvar == y->qvar && syntactic_eq(x->f1, y->f1);
        case Formula::Kind::Box:
            return syntactic_eq(x->prog, y->prog) && syntactic_eq(x->f1, y->f1);
        case Formula::Kind::AcBox:
            return syntactic_eq(x->prog, y->prog) && syntactic_eq(x->assume, y->assume) &&
                   syntactic_eq(x->commit, y->commit) && syntactic_eq(x->f1, y->f1);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Sort re-checking (fixpoint on factory-built ASTs)

void sort_check(const TermPtr& t) {
    if (!t) sort_fail("null term");
    switch (t->kind) {
        case Term::Kind::Var:
            if (t->sort != t->var.sort || t->var.sort == Sort::Channel)
                sort_fail("bad variable node");
            break;
        case Term::Kind::RealLit:
            if (t->sort != Sort::Real) sort_fail("bad literal sort");
            break;
        case Term::Kind::IntLit:
            if (t->sort != Sort::Int) sort_fail("bad literal sort");
            break;
        case Term::Kind::ChanLit:
            if (t->sort != Sort::Channel || t->var.sort != Sort::Channel)
                sort_fail("bad channel literal");
            break;
        case Term::Kind::EmptyTrace:
            if (t->sort != Sort::Trace) sort_fail("bad empty trace");
            break;
        case Term::Kind::Dot: break;
        case Term::Kind::FuncApp:
            for (const TermPtr& a : t->args) sort_check(a);
            break;
        case Term::Kind::Plus:
        case Term::Kind::Times:
            sort_check(t->a);
            sort_check(t->b);
            if (t->sort != Sort::Real || t->a->sort != Sort::Real || t->b->sort != Sort::Real)
                sort_fail("bad arithmetic node");
            break;
        case Term::Kind::IntPlus:
            sort_check(t->a);
            sort_check(t->b);
            if (t->sort != Sort::Int || t->a->sort != Sort::Int || t->b->sort != Sort::Int)
                sort_fail("bad integer arithmetic node");
            break;
        case Term::Kind::Differential:
            sort_check(t->a);
            if (!is_program_polynomial(t->a)) sort_fail("differential of a non-polynomial");
            break;
        case Term::Kind::Val:
        case Term::Kind::Stamp:
        case Term::Kind::Len:
        case Term::Kind::ChanOf:
            sort_check(t->a);
            if (t->a->sort != Sort::Trace) sort_fail("trace operator on a non-trace");
            break;
        case Term::Kind::CommItem:
            sort_check(t->a);
            sort_check(t->b);
            sort_check(t->c);
            if (t->a->sort != Sort::Channel || t->b->sort != Sort::Real || t->c->sort != Sort::Real)
                sort_fail("bad communication item");
            break;
        case Term::Kind::Concat:
            sort_check(t->a);
            sort_check(t->b);
            if (t->a->sort != Sort::Trace || t->b->sort != Sort::Trace)
                sort_fail("bad concatenation");
            break;
        case Term::Kind::Proj:
            sort_check(t->a);
            if (t->a->sort != Sort::Trace || t->projSet->uni != Universe::Chans)
                sort_fail("bad projection");
            break;
        case Term::Kind::At:
            sort_check(t->a);
            sort_check(t->b);
            if (t->a->sort != Sort::Trace || t->b->sort != Sort::Int) sort_fail("bad indexing");
            break;
    }
}

void sort_check(const ProgramPtr& p) {
    if (!p) sort_fail("null program");
    switch (p->kind) {
        case Program::Kind::ProgConst: break;
        case Program::Kind::Assign:
            sort_check(p->rhs);
            if (!is_program_polynomial(p->rhs)) sort_fail("bad assignment rhs");
            break;
        case Program::Kind::Random: break;
        case Program::Kind::Test:
            sort_check(p->chi);
            if (!is_folr(p->chi)) sort_fail("bad test condition");
            break;
        case Program::Kind::ODE:
            for (const auto& [x, rhs] : p->odes) {
                sort_check(rhs);
                if (!is_program_polynomial(rhs)) sort_fail("bad differential equation rhs");
            }
            sort_check(p->chi);
            break;
        case Program::Kind::Send:
            sort_check(p->rhs);
            if (!is_program_polynomial(p->rhs)) sort_fail("bad send payload");
            break;
        case Program::Kind::Receive: break;
        case Program::Kind::Star: sort_check(p->p1); break;
        default:
            sort_check(p->p1);
            sort_check(p->p2);
            break;
    }
}

void sort_check(const FormulaPtr& f) {
    if (!f) sort_fail("null formula");
    switch (f->kind) {
        case Formula::Kind::Eq:
        case Formula::Kind::Geq:
        case Formula::Kind::Prefix:
            sort_check(f->t1);
            sort_check(f->t2);
            if (f->t1->sort != f->relSort || f->t2->sort != f->relSort)
                sort_fail("relation operand sort mismatch");
            break;
        case Formula::Kind::PredApp:
            for (const TermPtr& a : f->args) sort_check(a);
            break;
        case Formula::Kind::SpacePred:
        case Formula::Kind::SetEq:
            break;
        case Formula::Kind::InSet:
            sort_check(f->t1);
            if (f->t1->sort != Sort::Channel) sort_fail("bad set membership element");
            break;
        case Formula::Kind::Not: sort_check(f->f1); break;
        case Formula::Kind::And:
            sort_check(f->f1);
            sort_check(f->f2);
            break;
        case Formula::Kind::Forall:
            if (f->qvar.sort == Sort::Channel || f->qvar.primed) sort_fail("bad quantifier variable");
            sort_check(f->f1);
            break;
        case Formula::Kind::Box:
            sort_check(f->prog);
            sort_check(f->f1);
            break;
        case Formula::Kind::AcBox:
            sort_check(f->prog);
            sort_check(f->assume);
            sort_check(f->commit);
            sort_check(f->f1);
            break;
    }
}

}  // namespace chp

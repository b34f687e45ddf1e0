#include "chp/sets.hh"

#include <algorithm>

namespace chp {

const char* sort_name(Sort s) {
    switch (s) {
        case Sort::Real: return "real";
        case Sort::Int: return "int";
        case Sort::Trace: return "trace";
        case Sort::Channel: return "chan";
    }
    return "?";
}

Atom Atom::with_prime() const {
    if (sort != Sort::Real || primed) throw set_error("cannot prime " + atom_text(*this));
    return {sort, name, true};
}

Atom Atom::without_prime() const {
    return {sort, name, false};
}

std::string atom_text(const Atom& a) {
    return a.primed ? a.name + "'" : a.name;
}

namespace {

std::vector<Atom> sorted_dedup(std::vector<Atom> as, Universe u) {
    for (const Atom& a : as) {
        if (!(sort_bit(a.sort) & universe_mask(u)))
            throw set_error("atom " + atom_text(a) + " outside universe");
        if (a.primed && a.sort != Sort::Real)
            throw set_error("primed non-real atom " + atom_text(a));
    }
    std::sort(as.begin(), as.end());
    as.erase(std::unique(as.begin(), as.end()), as.end());
    return as;
}

void require_same_universe(const GroundSet& l, const GroundSet& r) {
    if (l.uni != r.uni) throw set_error("universe mismatch between set operands");
}

// Combines per sort: an atom is listed in the result iff its listed/unlisted
// status differs from the result's default for that sort.
template <class F>
GroundSet combine(const GroundSet& l, const GroundSet& r, F in_result, unsigned resultMask) {
    GroundSet out{l.uni, resultMask, {}};
    std::vector<Atom> pool(l.atoms);
    pool.insert(pool.end(), r.atoms.begin(), r.atoms.end());
    pool = sorted_dedup(std::move(pool), l.uni);
    for (const Atom& a : pool) {
        bool inl = member(a, l), inr = member(a, r);
        bool inres = in_result(inl, inr);
        bool deflt = (resultMask & sort_bit(a.sort)) != 0;  // cofinite default: in
        if (inres != deflt) out.atoms.push_back(a);
    }
    return out;
}

}  // namespace

GroundSet GroundSet::finite(Universe u, std::vector<Atom> as) {
    return {u, 0, sorted_dedup(std::move(as), u)};
}

GroundSet GroundSet::cofinite(Universe u, std::vector<Atom> as) {
    return {u, universe_mask(u), sorted_dedup(std::move(as), u)};
}

GroundSet singleton(Atom a) {
    Universe u = a.sort == Sort::Channel ? Universe::Chans : Universe::Vars;
    return GroundSet::finite(u, {std::move(a)});
}

GroundSet chan_singleton(Atom ch) {
    return GroundSet::finite(Universe::Chans, {std::move(ch)});
}

bool member(const Atom& a, const GroundSet& s) {
    if (!(sort_bit(a.sort) & universe_mask(s.uni))) return false;
    bool listed = std::binary_search(s.atoms.begin(), s.atoms.end(), a);
    bool cof = (s.cofiniteMask & sort_bit(a.sort)) != 0;
    return cof ? !listed : listed;
}

GroundSet set_union(const GroundSet& l, const GroundSet& r) {
    require_same_universe(l, r);
    return combine(l, r, [](bool a, bool b) { return a || b; }, l.cofiniteMask | r.cofiniteMask);
}

GroundSet set_inter(const GroundSet& l, const GroundSet& r) {
    require_same_universe(l, r);
    return combine(l, r, [](bool a, bool b) { return a && b; }, l.cofiniteMask & r.cofiniteMask);
}

GroundSet set_minus(const GroundSet& l, const GroundSet& r) {
    require_same_universe(l, r);
    return combine(l, r, [](bool a, bool b) { return a && !b; }, l.cofiniteMask & ~r.cofiniteMask);
}

GroundSet set_complement(const GroundSet& s) {
    GroundSet out = s;
    out.cofiniteMask = universe_mask(s.uni) & ~s.cofiniteMask;
    return out;
}

bool subset_eq(const GroundSet& l, const GroundSet& r) {
    require_same_universe(l, r);
    // Per sort: Cofinite is never contained in Finite over an infinite
    // namespace; the listed atoms settle the rest.
    unsigned lonly = l.cofiniteMask & ~r.cofiniteMask;
    if (lonly) return false;
    for (const Atom& a : l.atoms)
        if (member(a, l) && !member(a, r)) return false;
    for (const Atom& a : r.atoms)
        if (member(a, l) && !member(a, r)) return false;
    return true;
}

SetExprPtr SetExpr::make(GroundSet g) {
    auto e = std::make_shared<SetExpr>();
    e->kind = Kind::Ground;
    e->uni = g.uni;
    e->ground = std::move(g);
    return e;
}

SetExprPtr SetExpr::setvar(std::string name, Universe u) {
    auto e = std::make_shared<SetExpr>();
    e->kind = Kind::SetVar;
    e->uni = u;
    e->name = std::move(name);
    return e;
}

namespace {
SetExprPtr binop(SetExpr::Kind k, SetExprPtr l, SetExprPtr r) {
    if (l->uni != r->uni) throw set_error("universe mismatch between set operands");
    auto e = std::make_shared<SetExpr>();
    e->kind = k;
    e->uni = l->uni;
    e->l = std::move(l);
    e->r = std::move(r);
    return e;
}
}  // namespace

SetExprPtr SetExpr::inter(SetExprPtr l, SetExprPtr r) { return binop(Kind::Inter, std::move(l), std::move(r)); }
SetExprPtr SetExpr::minus(SetExprPtr l, SetExprPtr r) { return binop(Kind::Minus, std::move(l), std::move(r)); }
SetExprPtr SetExpr::unions(SetExprPtr l, SetExprPtr r) { return binop(Kind::Union, std::move(l), std::move(r)); }

SetExprPtr SetExpr::complement(SetExprPtr s) {
    auto e = std::make_shared<SetExpr>();
    e->kind = Kind::Complement;
    e->uni = s->uni;
    e->l = std::move(s);
    return e;
}

SetExprPtr normalize(const SetExprPtr& s) {
    switch (s->kind) {
        case SetExpr::Kind::Ground:
        case SetExpr::Kind::SetVar:
            return s;
        case SetExpr::Kind::Complement: {
            SetExprPtr b = normalize(s->l);
            if (b->kind == SetExpr::Kind::Complement) return b->l;  // involution
            if (b->is_ground()) return SetExpr::make(set_complement(b->ground));
            return SetExpr::complement(b);
        }
        default: break;
    }
    SetExprPtr l = normalize(s->l), r = normalize(s->r);
    if (l->is_ground() && r->is_ground()) {
        switch (s->kind) {
            case SetExpr::Kind::Inter: return SetExpr::make(set_inter(l->ground, r->ground));
            case SetExpr::Kind::Minus: return SetExpr::make(set_minus(l->ground, r->ground));
            case SetExpr::Kind::Union: return SetExpr::make(set_union(l->ground, r->ground));
            default: break;
        }
    }
    // Top/bottom absorption with one symbolic operand.
    bool lEmpty = l->is_ground() && l->ground.is_empty();
    bool rEmpty = r->is_ground() && r->ground.is_empty();
    bool lAll = l->is_ground() && l->ground.is_all();
    bool rAll = r->is_ground() && r->ground.is_all();
    switch (s->kind) {
        case SetExpr::Kind::Inter:
            if (lEmpty || rEmpty) return SetExpr::make(GroundSet::empty(s->uni));
            if (lAll) return r;
            if (rAll) return l;
            return SetExpr::inter(l, r);
        case SetExpr::Kind::Union:
            if (lAll || rAll) return SetExpr::make(GroundSet::all(s->uni));
            if (lEmpty) return r;
            if (rEmpty) return l;
            return SetExpr::unions(l, r);
        case SetExpr::Kind::Minus:
            if (lEmpty || rAll) return SetExpr::make(GroundSet::empty(s->uni));
            if (rEmpty) return l;
            return SetExpr::minus(l, r);
        default: break;
    }
    throw set_error("unreachable set kind");
}

GroundSet force_ground(const SetExprPtr& s) {
    SetExprPtr n = normalize(s);
    if (!n->is_ground()) throw set_error("set expression is not ground (set variable " +
                                         std::string(n->kind == SetExpr::Kind::SetVar ? n->name : "...") + ")");
    return n->ground;
}

bool setexpr_eq(const SetExprPtr& a, const SetExprPtr& b) {
    SetExprPtr l = normalize(a), r = normalize(b);
    if (l->kind != r->kind || l->uni != r->uni) return false;
    switch (l->kind) {
        case SetExpr::Kind::Ground: return l->ground == r->ground;
        case SetExpr::Kind::SetVar: return l->name == r->name;
        case SetExpr::Kind::Complement: return setexpr_eq(l->l, r->l);
        default: return setexpr_eq(l->l, r->l) && setexpr_eq(l->r, r->r);
    }
}

}  // namespace chp

#include "chp/oracle.hh"

#include <algorithm>

#include "chp/statics.hh"

namespace chp {

namespace {

[[noreturn]] void bail(const std::string& what) { throw oracle_error(what); }

Rat to_rat(const Int& n) { return Rat(n); }

bool chronological(const RecTrace& t) {
    for (size_t i = 1; i < t.size(); i++)
        if (!(t[i - 1].c.stamp < t[i].c.stamp)) return false;
    return true;
}

RecTrace concat(const RecTrace& a, const RecTrace& b) {
    RecTrace out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Values and states

Value Value::real(Rat q) {
    Value v;
    v.sort = Sort::Real;
    q.canonicalize();
    v.r = std::move(q);
    return v;
}
Value Value::integer(Int n) {
    Value v;
    v.sort = Sort::Int;
    v.i = std::move(n);
    return v;
}
Value Value::channel(Atom c) {
    Value v;
    v.sort = Sort::Channel;
    v.ch = std::move(c);
    return v;
}
Value Value::trace(TraceVal t) {
    Value v;
    v.sort = Sort::Trace;
    v.tr = std::move(t);
    return v;
}

Rat Value::numeric() const {
    if (sort == Sort::Real) return r;
    if (sort == Sort::Int) return to_rat(i);
    bail("value is not numeric");
}

bool Value::operator<(const Value& o) const {
    if (sort != o.sort) return sort < o.sort;
    switch (sort) {
        case Sort::Real: return r < o.r;
        case Sort::Int: return i < o.i;
        case Sort::Channel: return ch < o.ch;
        case Sort::Trace: return tr < o.tr;
    }
    return false;
}

namespace {

Value default_value(const Atom& x) {
    switch (x.sort) {
        case Sort::Real: return Value::real(0);
        case Sort::Int: return Value::integer(0);
        case Sort::Trace: return Value::trace({});
        case Sort::Channel: break;
    }
    bail("channels are not state variables");
}

}  // namespace

Value State::get(const Atom& x) const {
    auto it = m.find(x);
    return it == m.end() ? default_value(x) : it->second;
}

State State::set(const Atom& x, Value v) const {
    State out = *this;
    out.m[x] = std::move(v);
    return out;
}

State State::project(const GroundSet& cs) const {
    State out = *this;
    for (auto& [x, v] : out.m) {
        if (x.sort != Sort::Trace) continue;
        TraceVal kept;
        for (const Comm& c : v.tr)
            if (member(c.channel, cs)) kept.push_back(c);
        v = Value::trace(std::move(kept));
    }
    return out;
}

namespace {

// States compare as total functions: unmapped entries equal their defaults.
std::map<Atom, Value> densify(const State& a, const State& b) {
    std::map<Atom, Value> keys;
    for (const auto& [x, v] : a.m) keys.emplace(x, v);
    for (const auto& [x, v] : b.m) keys.emplace(x, v);
    return keys;
}

}  // namespace

bool State::operator==(const State& o) const {
    for (const auto& [x, unused] : densify(*this, o))
        if (!(get(x) == o.get(x))) return false;
    return true;
}

bool State::operator<(const State& o) const {
    for (const auto& [x, unused] : densify(*this, o)) {
        Value a = get(x), b = o.get(x);
        if (a < b) return true;
        if (b < a) return false;
    }
    return false;
}

State concat_state_trace(const State& w, const RecTrace& tau) {
    State out = w;
    for (const Event& e : tau) {
        Value v = out.get(e.recorder);
        v.tr.push_back(e.c);
        out.m[e.recorder] = std::move(v);
    }
    return out;
}

bool Computation::operator<(const Computation& o) const {
    if (trace != o.trace) return trace < o.trace;
    if (final.has_value() != o.final.has_value()) return !final.has_value();
    if (!final) return false;
    return *final < *o.final;
}

const std::vector<Value>& OracleConfig::domain(const Atom& x) const {
    auto it = domains.find(x);
    if (it == domains.end() || it->second.empty())
        bail("no sample domain for '" + atom_text(x) + "'");
    return it->second;
}

std::string state_text(const State& v) {
    std::string out = "{";
    bool first = true;
    for (const auto& [x, val] : v.m) {
        if (!first) out += ", ";
        first = false;
        out += atom_text(x) + "=";
        switch (val.sort) {
            case Sort::Real: out += val.r.get_str(); break;
            case Sort::Int: out += val.i.get_str(); break;
            case Sort::Channel: out += val.ch.name; break;
            case Sort::Trace: {
                out += "[";
                for (size_t i = 0; i < val.tr.size(); i++) {
                    if (i) out += " ";
                    out += "<" + val.tr[i].channel.name + "," + val.tr[i].value.get_str() +
                           "," + val.tr[i].stamp.get_str() + ">";
                }
                out += "]";
                break;
            }
        }
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// Term valuation

Value eval_term(const Interp& I, const State& v, const TermPtr& e) {
    using K = Term::Kind;
    switch (e->kind) {
        case K::Var:
            if (e->var.primed) bail("primed variables are outside the oracle fragment");
            return v.get(e->var);
        case K::RealLit: return Value::real(e->rlit);
        case K::IntLit: return Value::integer(e->ilit);
        case K::ChanLit: return Value::channel(e->var);
        case K::EmptyTrace: return Value::trace({});
        case K::Dot: bail("reserved dots are outside the oracle fragment");
        case K::FuncApp: {
            auto it = I.funcs.find(e->sym);
            if (it == I.funcs.end()) bail("function symbol '" + e->sym + "' not interpreted");
            State proj = v.project(force_ground(e->chanSet));
            std::vector<Value> args;
            for (const TermPtr& a : e->args) args.push_back(eval_term(I, proj, a));
            return it->second(args);
        }
        case K::Plus:
            return Value::real(eval_term(I, v, e->a).numeric() +
                               eval_term(I, v, e->b).numeric());
        case K::Times:
            return Value::real(eval_term(I, v, e->a).numeric() *
                               eval_term(I, v, e->b).numeric());
        case K::IntPlus:
            return Value::integer(eval_term(I, v, e->a).i + eval_term(I, v, e->b).i);
        case K::Differential: bail("differentials are outside the oracle fragment");
        case K::Val: {
            TraceVal t = eval_term(I, v, e->a).tr;
            return Value::real(t.empty() ? Rat(0) : t.back().value);
        }
        case K::Stamp: {
            TraceVal t = eval_term(I, v, e->a).tr;
            return Value::real(t.empty() ? Rat(0) : t.back().stamp);
        }
        case K::Len: {
            TraceVal t = eval_term(I, v, e->a).tr;
            return Value::integer(Int(t.size()));
        }
        case K::ChanOf: {
            TraceVal t = eval_term(I, v, e->a).tr;
            return Value::channel(t.empty() ? I.defaultChan : t.back().channel);
        }
        case K::CommItem: {
            Value ch = eval_term(I, v, e->a);
            Comm c{ch.ch, eval_term(I, v, e->b).numeric(), eval_term(I, v, e->c).numeric()};
            return Value::trace({c});
        }
        case K::Concat: {
            TraceVal l = eval_term(I, v, e->a).tr, r = eval_term(I, v, e->b).tr;
            l.insert(l.end(), r.begin(), r.end());
            return Value::trace(std::move(l));
        }
        case K::Proj: {
            GroundSet cs = force_ground(e->projSet);
            TraceVal t = eval_term(I, v, e->a).tr, kept;
            for (const Comm& c : t)
                if (member(c.channel, cs)) kept.push_back(c);
            return Value::trace(std::move(kept));
        }
        case K::At: {
            TraceVal t = eval_term(I, v, e->a).tr;
            Value idx = eval_term(I, v, e->b);
            if (idx.i < 0 || idx.i >= Int(t.size())) return Value::trace({});
            return Value::trace({t[idx.i.get_ui()]});
        }
    }
    bail("unreachable term kind");
}

// ---------------------------------------------------------------------------
// Program denotation

namespace {

void add_prefixes(Denotation& d, const RecTrace& t) {
    for (size_t k = 0; k <= t.size(); k++)
        d.comps.insert(Computation{RecTrace(t.begin(), t.begin() + k), std::nullopt});
}

void add_complete(Denotation& d, RecTrace t, State w) {
    add_prefixes(d, t);
    d.comps.insert(Computation{std::move(t), std::move(w)});
}

// Synchronized shuffles: events on the partner's written channels must be
// matched jointly; private events interleave freely.
void merges(const RecTrace& t1, const RecTrace& t2, const GroundSet& cn1,
            const GroundSet& cn2, RecTrace& acc, std::vector<RecTrace>& out) {
    if (t1.empty() && t2.empty()) {
        out.push_back(acc);
        return;
    }
    if (!t1.empty()) {
        const Event& e = t1.front();
        RecTrace r1(t1.begin() + 1, t1.end());
        if (!member(e.c.channel, cn2)) {
            acc.push_back(e);
            merges(r1, t2, cn1, cn2, acc, out);
            acc.pop_back();
        } else if (!t2.empty() && t2.front() == e) {
            RecTrace r2(t2.begin() + 1, t2.end());
            acc.push_back(e);
            merges(r1, r2, cn1, cn2, acc, out);
            acc.pop_back();
        }
    }
    if (!t2.empty()) {
        const Event& e = t2.front();
        if (!member(e.c.channel, cn1)) {
            RecTrace r2(t2.begin() + 1, t2.end());
            acc.push_back(e);
            merges(t1, r2, cn1, cn2, acc, out);
            acc.pop_back();
        }
    }
}

State merge_finals(const State& w1, const State& w2, const GroundSet& bv1) {
    State out;
    for (const auto& [x, unused] : densify(w1, w2))
        out.m[x] = member(x, bv1) ? w1.get(x) : w2.get(x);
    return out;
}

}  // namespace

Denotation denote_program(const Interp& I, const State& v, const ProgramPtr& p,
                          const OracleConfig& cfg) {
    using K = Program::Kind;
    Denotation d;
    d.comps.insert(Computation{{}, std::nullopt});  // totality: (v, eps, bot)
    switch (p->kind) {
        case K::ProgConst: bail("program constants are outside the oracle fragment");
        case K::ODE: bail("continuous evolution is outside the oracle fragment");
        case K::Assign: {
            d.comps.insert(Computation{{}, v.set(p->x, eval_term(I, v, p->rhs))});
            return d;
        }
        case K::Random: {
            for (const Value& val : cfg.domain(p->x))
                d.comps.insert(Computation{{}, v.set(p->x, val)});
            return d;
        }
        case K::Test: {
            if (eval_formula(I, v, p->chi, cfg)) d.comps.insert(Computation{{}, v});
            return d;
        }
        case K::Send: {
            Rat a = eval_term(I, v, p->rhs).numeric();
            RecTrace t{Event{p->h, Comm{p->ch, a, v.time()}}};
            add_complete(d, t, v);
            return d;
        }
        case K::Receive: {
            for (const Value& val : cfg.domain(p->x)) {
                RecTrace t{Event{p->h, Comm{p->ch, val.numeric(), v.time()}}};
                add_complete(d, t, v.set(p->x, val));
            }
            return d;
        }
        case K::Choice: {
            Denotation l = denote_program(I, v, p->p1, cfg);
            Denotation r = denote_program(I, v, p->p2, cfg);
            d.comps.insert(l.comps.begin(), l.comps.end());
            d.comps.insert(r.comps.begin(), r.comps.end());
            d.starExact = l.starExact && r.starExact;
            return d;
        }
        case K::Seq: {
            Denotation l = denote_program(I, v, p->p1, cfg);
            d.starExact = l.starExact;
            for (const Computation& c1 : l.comps) {
                d.comps.insert(Computation{c1.trace, std::nullopt});
                if (!c1.final) continue;
                Denotation r = denote_program(I, *c1.final, p->p2, cfg);
                d.starExact = d.starExact && r.starExact;
                for (const Computation& c2 : r.comps) {
                    RecTrace t = concat(c1.trace, c2.trace);
                    if (!chronological(t)) continue;
                    d.comps.insert(Computation{std::move(t), c2.final});
                }
            }
            return d;
        }
        case K::Star: {
            // alpha^0 = ?true; alpha^{n+1} = alpha ; alpha^n, union over n.
            d.comps.insert(Computation{{}, v});
            bool stable = false;
            for (unsigned n = 0; n < cfg.starFuel && !stable; n++) {
                Denotation next = d;
                for (const Computation& c : d.comps) {
                    if (!c.final) continue;
                    Denotation step = denote_program(I, *c.final, p->p1, cfg);
                    next.starExact = next.starExact && step.starExact;
                    for (const Computation& c2 : step.comps) {
                        RecTrace t = concat(c.trace, c2.trace);
                        if (!chronological(t)) continue;
                        next.comps.insert(Computation{std::move(t), c2.final});
                    }
                }
                stable = next.comps == d.comps && next.starExact == d.starExact;
                d = std::move(next);
            }
            d.starExact = d.starExact && stable;
            return d;
        }
        case K::Par: {
            GroundSet cn1 = statics_program(p->p1).cn, cn2 = statics_program(p->p2).cn;
            GroundSet bv1 = statics_program(p->p1).bv;
            Denotation l = denote_program(I, v, p->p1, cfg);
            Denotation r = denote_program(I, v, p->p2, cfg);
            d.starExact = l.starExact && r.starExact;
            for (const Computation& c1 : l.comps)
                for (const Computation& c2 : r.comps) {
                    if (c1.final && c2.final && !(c1.final->time() == c2.final->time()))
                        continue;
                    std::vector<RecTrace> taus;
                    RecTrace acc;
                    merges(c1.trace, c2.trace, cn1, cn2, acc, taus);
                    for (RecTrace& t : taus) {
                        if (!chronological(t)) continue;
                        if (c1.final && c2.final)
                            d.comps.insert(
                                Computation{t, merge_finals(*c1.final, *c2.final, bv1)});
                        else
                            d.comps.insert(Computation{std::move(t), std::nullopt});
                    }
                }
            return d;
        }
    }
    bail("unreachable program kind");
}

// ---------------------------------------------------------------------------
// Formula satisfaction

namespace {

bool trace_prefix(const TraceVal& a, const TraceVal& b) {
    if (a.size() > b.size()) return false;
    return std::equal(a.begin(), a.end(), b.begin());
}

Denotation exact_denotation(const Interp& I, const State& v, const ProgramPtr& p,
                            const OracleConfig& cfg) {
    Denotation d = denote_program(I, v, p, cfg);
    if (!d.starExact) bail("loop did not stabilize within the fuel bound");
    return d;
}

}  // namespace

bool eval_formula(const Interp& I, const State& v, const FormulaPtr& f,
                  const OracleConfig& cfg) {
    using K = Formula::Kind;
    switch (f->kind) {
        case K::Eq: {
            Value a = eval_term(I, v, f->t1), b = eval_term(I, v, f->t2);
            if ((a.sort == Sort::Real || a.sort == Sort::Int) &&
                (b.sort == Sort::Real || b.sort == Sort::Int))
                return a.numeric() == b.numeric();
            return a == b;
        }
        case K::Geq:
            return eval_term(I, v, f->t1).numeric() >= eval_term(I, v, f->t2).numeric();
        case K::Prefix:
            return trace_prefix(eval_term(I, v, f->t1).tr, eval_term(I, v, f->t2).tr);
        case K::PredApp: {
            auto it = I.preds.find(f->sym);
            if (it == I.preds.end())
                bail("predicate symbol '" + f->sym + "' not interpreted");
            State proj = v.project(force_ground(f->chanSet));
            std::vector<Value> args;
            for (const TermPtr& a : f->args) args.push_back(eval_term(I, proj, a));
            return it->second(args);
        }
        case K::SpacePred: bail("space predicates are outside the oracle fragment");
        case K::InSet:
            return member(eval_term(I, v, f->t1).ch, force_ground(f->s1));
        case K::SetEq: return force_ground(f->s1) == force_ground(f->s2);
        case K::Not: return !eval_formula(I, v, f->f1, cfg);
        case K::And:
            return eval_formula(I, v, f->f1, cfg) && eval_formula(I, v, f->f2, cfg);
        case K::Forall: {
            for (const Value& val : cfg.domain(f->qvar))
                if (!eval_formula(I, v.set(f->qvar, val), f->f1, cfg)) return false;
            return true;
        }
        case K::Box: {
            Denotation d = exact_denotation(I, v, f->prog, cfg);
            for (const Computation& c : d.comps) {
                if (!c.final) continue;
                if (!eval_formula(I, concat_state_trace(*c.final, c.trace), f->f1, cfg))
                    return false;
            }
            return true;
        }
        case K::AcBox: {
            Denotation d = exact_denotation(I, v, f->prog, cfg);
            auto holds_on_prefixes = [&](const RecTrace& t, size_t upto,
                                         const FormulaPtr& phi) {
                for (size_t k = 0; k < upto; k++) {
                    RecTrace pre(t.begin(), t.begin() + static_cast<long>(k));
                    if (!eval_formula(I, concat_state_trace(v, pre), phi, cfg)) return false;
                }
                return true;
            };
            for (const Computation& c : d.comps) {
                // commit: A on all strict prefixes entails C at the full trace.
                if (holds_on_prefixes(c.trace, c.trace.size(), f->assume) &&
                    !eval_formula(I, concat_state_trace(v, c.trace), f->commit, cfg))
                    return false;
                // post: A on all prefixes and completion entail the postcondition.
                if (c.final && holds_on_prefixes(c.trace, c.trace.size() + 1, f->assume) &&
                    !eval_formula(I, concat_state_trace(*c.final, c.trace), f->f1, cfg))
                    return false;
            }
            return true;
        }
    }
    bail("unreachable formula kind");
}

SampleReport validate_on_samples(const Interp& I, const FormulaPtr& f,
                                 const OracleConfig& cfg,
                                 const std::vector<State>& states) {
    SampleReport rep;
    for (const State& v : states) {
        if (!eval_formula(I, v, f, cfg)) {
            rep.valid = false;
            rep.counterexample = v;
            rep.note = "fails at " + state_text(v);
            return rep;
        }
    }
    rep.note = "valid on " + std::to_string(states.size()) + " sample state(s)";
    return rep;
}

std::vector<State> state_grid(const OracleConfig& cfg, const std::vector<Atom>& vars) {
    std::vector<State> grid{State{}};
    for (const Atom& x : vars) {
        std::vector<State> next;
        for (const State& s : grid)
            for (const Value& val : cfg.domain(x)) next.push_back(s.set(x, val));
        grid = std::move(next);
        if (grid.size() > 100000) bail("sample grid too large");
    }
    return grid;
}

std::optional<std::string> denotation_violation(const State& v, const Denotation& d) {
    if (!d.comps.count(Computation{{}, std::nullopt})) return "not total: (eps, bot) missing";
    for (const Computation& c : d.comps) {
        for (size_t k = 0; k < c.trace.size(); k++) {
            RecTrace pre(c.trace.begin(), c.trace.begin() + static_cast<long>(k));
            if (!d.comps.count(Computation{pre, std::nullopt}))
                return "not prefix-closed at a length-" + std::to_string(k) + " prefix";
        }
        if (c.final && !d.comps.count(Computation{c.trace, std::nullopt}))
            return "not prefix-closed: pending twin of a complete computation missing";
        if (!chronological(c.trace)) return "trace not chronological";
        if (!c.trace.empty()) {
            if (!(v.time() <= c.trace.front().c.stamp))
                return "first event precedes the initial global time";
            if (c.final && !(c.trace.back().c.stamp <= c.final->time()))
                return "final global time precedes the last event";
        }
        if (c.final && !(v.time() <= c.final->time()))
            return "global time decreases";
    }
    return std::nullopt;
}

}  // namespace chp

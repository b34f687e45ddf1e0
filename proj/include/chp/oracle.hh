// Executable denotational semantics for a discrete fragment of communicating
// hybrid programs (no ODEs), used by the test suites to cross-check the
// statics, the substitution engine, axiom instances, and trace rewrites.
// Quantifiers and nondeterministic reads range over finite sample domains, so
// formula evaluation is evidence of validity on samples, never proof.

#ifndef CHP_ORACLE_HH
#define CHP_ORACLE_HH

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "chp/num.hh"
#include "chp/syntax.hh"

namespace chp {

struct oracle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single communication event as trace data: channel, value, timestamp.
struct Comm {
    Atom channel;
    Rat value;
    Rat stamp;

    friend bool operator==(const Comm&, const Comm&) = default;
    friend bool operator<(const Comm& a, const Comm& b) {
        if (a.channel != b.channel) return a.channel < b.channel;
        if (a.value != b.value) return a.value < b.value;
        return a.stamp < b.stamp;
    }
};

// Trace values stored in states and denoted by trace terms.
using TraceVal = std::vector<Comm>;

// A recorded event additionally carries the recorder that observed it.
struct Event {
    Atom recorder;
    Comm c;

    friend bool operator==(const Event&, const Event&) = default;
    friend bool operator<(const Event& a, const Event& b) {
        if (a.recorder != b.recorder) return a.recorder < b.recorder;
        return a.c < b.c;
    }
};

using RecTrace = std::vector<Event>;

// Runtime value of a term: rational, integer, channel, or trace.
struct Value {
    Sort sort = Sort::Real;
    Rat r;
    Int i;
    Atom ch;
    TraceVal tr;

    static Value real(Rat q);
    static Value integer(Int n);
    static Value channel(Atom c);
    static Value trace(TraceVal t);

    // Numeric view of a real or integer value.
    Rat numeric() const;

    friend bool operator==(const Value&, const Value&) = default;
    bool operator<(const Value& o) const;
};

// Sparse total state: unmapped variables read as 0 / 0 / empty trace.  The
// global clock mu is a real variable like any other.
struct State {
    std::map<Atom, Value> m;

    Value get(const Atom& x) const;
    State set(const Atom& x, Value v) const;
    Rat time() const { return get(Atom::mu()).numeric(); }

    // Drops every event on channels outside cs from every trace variable.
    State project(const GroundSet& cs) const;

    bool operator==(const State& o) const;
    bool operator<(const State& o) const;
};

// Appends the events of tau to the matching recorder variables of w.
State concat_state_trace(const State& w, const RecTrace& tau);

// One computation from an implicit initial state; final empty means pending.
struct Computation {
    RecTrace trace;
    std::optional<State> final;

    friend bool operator==(const Computation&, const Computation&) = default;
    bool operator<(const Computation& o) const;
};

struct Denotation {
    std::set<Computation> comps;
    bool starExact = true;  // false if some loop hit the fuel bound
};

// Interpretation tables for the finitely many symbols under test.
struct Interp {
    std::map<std::string, std::function<Value(const std::vector<Value>&)>> funcs;
    std::map<std::string, std::function<bool(const std::vector<Value>&)>> preds;
    // Designated results for the underspecified selectors on the empty trace.
    Atom defaultChan = Atom::chan("ch");
};

struct OracleConfig {
    // Sample domains, per variable: used by x := *, ch(h)?x, and quantifiers.
    std::map<Atom, std::vector<Value>> domains;
    unsigned starFuel = 4;

    const std::vector<Value>& domain(const Atom& x) const;
};

// Term valuation (Def.-4 style); rejects differentials, dots, and primed
// variables as outside the fragment.
Value eval_term(const Interp& I, const State& v, const TermPtr& e);

// Program denotation (Def.-5 style) from the given initial state: the set of
// computations, prefix-closed, total, and chronological by construction.
Denotation denote_program(const Interp& I, const State& v, const ProgramPtr& p,
                          const OracleConfig& cfg);

// Formula satisfaction (Def.-6 style); throws oracle_error when a star fails
// to stabilize within the fuel bound or a construct leaves the fragment.
bool eval_formula(const Interp& I, const State& v, const FormulaPtr& f,
                  const OracleConfig& cfg);

struct SampleReport {
    bool valid = true;
    std::optional<State> counterexample;
    std::string note;
};

// Evaluates f over the given sample states; reports the first failure.
SampleReport validate_on_samples(const Interp& I, const FormulaPtr& f,
                                 const OracleConfig& cfg, const std::vector<State>& states);

// Cartesian grid of states over the configured domains of the given
// variables (every grid state also maps mu to 0 unless mu is listed).
std::vector<State> state_grid(const OracleConfig& cfg, const std::vector<Atom>& vars);

// Checks prefix-closure, totality, and chronology of a denotation produced
// from initial state v; returns a description of the first violation.
std::optional<std::string> denotation_violation(const State& v, const Denotation& d);

std::string state_text(const State& v);

}  // namespace chp

#endif

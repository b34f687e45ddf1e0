// Finite/cofinite set algebra over the variable and channel namespaces.
//
// Namespaces are infinite, so a ground set is represented per sort as either
// an explicit finite atom list or the complement of one.  Symbolic set
// expressions (with set variables) occur only inside stored axioms; every
// user-facing operation works on ground sets.

#ifndef CHP_SETS_HH
#define CHP_SETS_HH

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chp {

enum class Sort : uint8_t { Real, Int, Trace, Channel };

const char* sort_name(Sort s);

// A variable (real/int/trace, optionally primed when real) or a channel name.
struct Atom {
    Sort sort = Sort::Real;
    std::string name;
    bool primed = false;  // only real variables may be primed

    static Atom real(std::string n, bool primed = false) { return {Sort::Real, std::move(n), primed}; }
    static Atom intv(std::string n) { return {Sort::Int, std::move(n), false}; }
    static Atom trace(std::string n) { return {Sort::Trace, std::move(n), false}; }
    static Atom chan(std::string n) { return {Sort::Channel, std::move(n), false}; }
    static Atom mu() { return real("mu"); }
    static Atom mu_prime() { return real("mu", true); }

    bool is_variable() const { return sort != Sort::Channel; }
    Atom with_prime() const;    // x -> x'; requires real
    Atom without_prime() const; // x' -> x

    // Canonical order: sort-major (real < int < trace < channel), then name,
    // unprimed before primed.  Structural equality on sorted lists doubles as
    // set equality.
    friend bool operator==(const Atom&, const Atom&) = default;
    friend bool operator<(const Atom& a, const Atom& b) {
        if (a.sort != b.sort) return a.sort < b.sort;
        if (a.name != b.name) return a.name < b.name;
        return a.primed < b.primed;
    }
};

std::string atom_text(const Atom& a);

enum class Universe : uint8_t { Vars, Chans };

inline unsigned universe_mask(Universe u) {
    // Bit per sort that belongs to the universe.
    return u == Universe::Vars ? 0b0111u : 0b1000u;
}
inline unsigned sort_bit(Sort s) { return 1u << static_cast<unsigned>(s); }

// Normalized ground set.  Sorts whose bit is in cofiniteMask are represented
// by their exception list; the remaining sorts by their member list.  The
// atoms vector is sorted and duplicate-free and mixes both roles (an atom's
// meaning follows its sort's bit).
struct GroundSet {
    Universe uni = Universe::Vars;
    unsigned cofiniteMask = 0;  // subset of universe_mask(uni)
    std::vector<Atom> atoms;

    static GroundSet empty(Universe u) { return {u, 0, {}}; }
    static GroundSet all(Universe u) { return {u, universe_mask(u), {}}; }
    static GroundSet finite(Universe u, std::vector<Atom> as);
    static GroundSet cofinite(Universe u, std::vector<Atom> as);
    // Sub-universe constants over Vars.
    static GroundSet rvar() { return {Universe::Vars, sort_bit(Sort::Real), {}}; }
    static GroundSet nvar() { return {Universe::Vars, sort_bit(Sort::Int), {}}; }
    static GroundSet tvar() { return {Universe::Vars, sort_bit(Sort::Trace), {}}; }
    static GroundSet gt() { return finite(Universe::Vars, {Atom::mu(), Atom::mu_prime()}); }

    bool is_finite() const { return cofiniteMask == 0; }
    bool is_empty() const { return cofiniteMask == 0 && atoms.empty(); }
    bool is_all() const { return cofiniteMask == universe_mask(uni) && atoms.empty(); }

    friend bool operator==(const GroundSet&, const GroundSet&) = default;
};

bool member(const Atom& a, const GroundSet& s);
GroundSet set_union(const GroundSet& l, const GroundSet& r);
GroundSet set_inter(const GroundSet& l, const GroundSet& r);
GroundSet set_minus(const GroundSet& l, const GroundSet& r);
GroundSet set_complement(const GroundSet& s);
bool subset_eq(const GroundSet& l, const GroundSet& r);
inline bool set_eq(const GroundSet& l, const GroundSet& r) { return l == r; }

GroundSet singleton(Atom a);
GroundSet chan_singleton(Atom ch);

// Symbolic set expressions.  Ground leaves hold a GroundSet; set variables and
// the boolean operators remain symbolic until instantiated.
struct SetExpr;
using SetExprPtr = std::shared_ptr<const SetExpr>;

struct SetExpr {
    enum class Kind : uint8_t { Ground, SetVar, Inter, Minus, Union, Complement };
    Kind kind = Kind::Ground;
    Universe uni = Universe::Vars;
    GroundSet ground;       // Kind::Ground
    std::string name;       // Kind::SetVar
    SetExprPtr l, r;        // binary ops; Complement uses l

    static SetExprPtr make(GroundSet g);
    static SetExprPtr setvar(std::string name, Universe u);
    static SetExprPtr inter(SetExprPtr l, SetExprPtr r);
    static SetExprPtr minus(SetExprPtr l, SetExprPtr r);
    static SetExprPtr unions(SetExprPtr l, SetExprPtr r);
    static SetExprPtr complement(SetExprPtr s);

    bool is_ground() const { return kind == Kind::Ground; }
};

struct set_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Folds ground subtrees and applies top/bottom absorption and complement
// involution.  Idempotent; on ground input the result is a single Ground node.
SetExprPtr normalize(const SetExprPtr& s);

// Requires a ground expression.
GroundSet force_ground(const SetExprPtr& s);

bool setexpr_eq(const SetExprPtr& a, const SetExprPtr& b);

}  // namespace chp

#endif

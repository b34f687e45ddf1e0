// One-pass uniform substitution: taboo-threaded replacement over terms,
// formulas, and programs with parallel contexts, output-taboo computation,
// and clash errors.  Clashes are conservative (syntactic static sets stand in
// for the semantic ones) and never unsound.

#ifndef CHP_USUBST_HH
#define CHP_USUBST_HH

#include <map>
#include <string>
#include <utility>

#include "chp/statics.hh"
#include "chp/syntax.hh"

namespace chp {

// Variables and channels that replacements must not read at the current
// position; grown along binders and program effects.
struct Taboo {
    GroundSet vars = GroundSet::empty(Universe::Vars);
    GroundSet chans = GroundSet::empty(Universe::Chans);

    static Taboo none() { return {}; }
    static Taboo total() {
        return {GroundSet::all(Universe::Vars), GroundSet::all(Universe::Chans)};
    }

    Taboo plus_vars(const GroundSet& g) const { return {set_union(vars, g), chans}; }
    Taboo plus_var(const Atom& a) const { return plus_vars(singleton(a)); }
    Taboo plus_chan(const Atom& c) const { return {vars, set_union(chans, chan_singleton(c))}; }

    friend bool operator==(const Taboo&, const Taboo&) = default;
};

inline Taboo taboo_union(const Taboo& a, const Taboo& b) {
    return {set_union(a.vars, b.vars), set_union(a.chans, b.chans)};
}

struct Clash {
    std::string phase;   // taboo | progconst-bound | spacepred-space | dot-capture | non-ground
    std::string symbol;  // offending symbol, if any
    std::string site;    // construct where the clash fired
    std::string detail;  // intersecting atoms / failed containment
};

struct clash_error : std::runtime_error {
    Clash clash;
    explicit clash_error(Clash c)
        : std::runtime_error("clash(" + c.phase + ") at " + c.site +
                             (c.symbol.empty() ? "" : " on " + c.symbol) + ": " + c.detail),
          clash(std::move(c)) {}
};

// Map from symbols to replacements.  Applied function/predicate replacements
// are written over reserved dots; everything else is dot-free.
struct Substitution {
    std::map<std::string, TermPtr> funcs;
    std::map<std::string, FormulaPtr> preds;
    std::map<std::string, FormulaPtr> spacePreds;
    std::map<std::string, ProgramPtr> progs;
    std::map<std::string, SetExprPtr> setVars;  // ground

    bool empty() const {
        return funcs.empty() && preds.empty() && spacePreds.empty() && progs.empty() &&
               setVars.empty();
    }
};

// Arity/sort agreement, dot discipline, restricted-symbol conventions, and
// groundness of replacement sets.  Throws sort_error with itemized text.
void validate_substitution(const Substitution& sigma, const Decls& decls);

// Pushes a channel projection down to the leaves of a term.
TermPtr project_term(const TermPtr& e, const GroundSet& chans);

// Fig.-style one-pass application.  All three throw clash_error.
TermPtr usub_term(const Substitution& sigma, const Taboo& taboo, const TermPtr& e);
FormulaPtr usub_formula(const Substitution& sigma, const Taboo& taboo, const FormulaPtr& f);

struct ProgSubstResult {
    ProgramPtr prog;
    Taboo out;  // input taboo plus everything the result binds or writes
};
ProgSubstResult usub_program(const Substitution& sigma, const Taboo& taboo,
                             const GroundSet& parallelContext, const ProgramPtr& p);

}  // namespace chp

#endif

// The finite axiom base: every named axiom and axiomatic rule of the calculus
// (program axioms, assumption-commitment axioms, the trace algebra, and the
// finite/cofinite set axioms), plus a trace-term normalizer and a decider for
// ground set formulas used to discharge guards.
//
// Registry entries are closed formulas over a reserved symbol table
// (axiom_decls()); proofs instantiate them through uniform substitution.

#ifndef CHP_AXIOMS_HH
#define CHP_AXIOMS_HH

#include <string>
#include <vector>

#include "chp/syntax.hh"

namespace chp {

struct AxiomEntry {
    enum class Kind : uint8_t { Axiom, Rule };
    std::string id;
    Kind kind = Kind::Axiom;
    std::vector<FormulaPtr> premises;  // rules only
    FormulaPtr conclusion;             // axioms: the single stored formula
    std::string notes;
    bool imported = false;  // true for entries added via register_imported
};

// Reserved symbol table all registry formulas are written over.
const Decls& axiom_decls();

// Lookup by id; throws std::out_of_range for unknown ids.
const AxiomEntry& get_axiom(const std::string& id);
bool has_axiom(const std::string& id);
std::vector<std::string> axiom_ids();

// Extension point for externally justified entries (e.g. ODE axioms lifted
// from dL).  Such entries are trusted, flagged imported, and must still pass
// sort_check; the id must be fresh.  Not thread-safe against concurrent
// lookups; intended for start-up configuration only.
void register_imported(AxiomEntry entry);

// Exhaustive left-to-right rewriting with the trace-algebra axioms oriented
// as rules: concatenation re-associated to the right, unit laws, projection
// distribution/fusion, projection of literal items over ground channel sets,
// selectors over items (including the literal last item of a concatenation),
// length unrolling, and 0-based indexing.  Guarded
// rules fire only when the guard is ground-decidable; otherwise the redex is
// left in place.  Terminating and idempotent.
TermPtr trace_simplify(const TermPtr& e);

enum class Tri : uint8_t { True, False, NotGround };

// Decides a formula built from set membership, set equality, equations
// between channel literals, negation, and conjunction (plus derived
// connectives) when all sets and elements are ground literals; anything else
// yields NotGround.
Tri decide_set_formula(const FormulaPtr& f);

}  // namespace chp

#endif

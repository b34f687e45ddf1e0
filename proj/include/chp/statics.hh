// Syntactic static semantics: free variables, bound variables, must-bound
// variables, and accessed/written channels, as computable overapproximations
// of the semantic sets.  Results are ground (co)finite sets; cofinite results
// such as CN(h) = all channels are first-class, never truncated.

#ifndef CHP_STATICS_HH
#define CHP_STATICS_HH

#include <string>
#include <vector>

#include "chp/sets.hh"
#include "chp/syntax.hh"

namespace chp {

struct statics_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TermStatics {
    GroundSet fv = GroundSet::empty(Universe::Vars);
    GroundSet cn = GroundSet::empty(Universe::Chans);
};

struct ProgStatics {
    GroundSet fv = GroundSet::empty(Universe::Vars);
    GroundSet bv = GroundSet::empty(Universe::Vars);
    GroundSet mbv = GroundSet::empty(Universe::Vars);
    GroundSet cn = GroundSet::empty(Universe::Chans);
};

// Throw statics_error if a needed set annotation is still symbolic.
TermStatics statics_term(const TermPtr& t);
TermStatics statics_formula(const FormulaPtr& f);
ProgStatics statics_program(const ProgramPtr& p);

// Symbols occurring in the expression, sorted and duplicate-free.
std::vector<std::string> signature(const TermPtr& t);
std::vector<std::string> signature(const FormulaPtr& f);
std::vector<std::string> signature(const ProgramPtr& p);

// Canonical diagnostic text for ground sets (also used by the printer).
std::string ground_text(const GroundSet& g);

}  // namespace chp

#endif

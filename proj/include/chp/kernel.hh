// Trusted proof checker.  The only producers of checked formulas are the step
// kinds below; everything else (parsing, printing, search) sits outside the
// kernel.  Arithmetic-oracle steps taint the report instead of being trusted.

#ifndef CHP_KERNEL_HH
#define CHP_KERNEL_HH

#include <string>
#include <vector>

#include "chp/syntax.hh"
#include "chp/usubst.hh"

namespace chp {

struct ProofStep {
    enum class Kind : uint8_t {
        Axiom, US, RuleInst, MP, Rename, Taut, SetFact, TraceFact, Arith, Hyp
    };
    Kind kind = Kind::Axiom;
    std::string id;
    std::string name;              // Axiom/RuleInst: registry id
    std::string ref1, ref2;        // US source; MP implication/antecedent; Rename source
    std::vector<std::string> refs; // RuleInst premises; Taut premises
    Substitution sigma;            // US/RuleInst bindings
    FormulaPtr goal;               // Taut/SetFact/Arith/Hyp; TraceFact as an equation
    Atom renameA, renameB;         // Rename transposition
};

struct ProofScript {
    Decls decls;
    std::vector<ProofStep> steps;
    FormulaPtr claim;  // qed formula
};

struct CheckReport {
    enum class Status : uint8_t { Proved, Failed };
    Status status = Status::Failed;
    std::string failStep;              // step id for Failed
    std::string reason;                // failure reason
    std::vector<std::string> tainted;  // ids of Arith steps
    std::vector<std::string> hypotheses;  // ids of Hyp steps
    FormulaPtr conclusion;             // produced formula of the final step

    bool proved() const { return status == Status::Proved; }
    bool clean() const { return proved() && tainted.empty() && hypotheses.empty(); }
};

// Replays every step and compares the final formula with the claim.
CheckReport check_proof(const ProofScript& script);

// Global transposition a <-> b (for real variables also a' <-> b'), including
// inside set annotations.  Throws sort_error on kind/sort mismatch.
FormulaPtr uniform_rename(const FormulaPtr& f, const Atom& a, const Atom& b);
TermPtr uniform_rename(const TermPtr& t, const Atom& a, const Atom& b);
ProgramPtr uniform_rename(const ProgramPtr& p, const Atom& a, const Atom& b);

// Bundled derivations of the monotonicity and box-distribution rules; on
// success the rules become available to RuleInst steps.
CheckReport replay_derived(const std::string& id);  // "acMono" | "acBoxesDist"

// Source text of the bundled derivation scripts (exposed for mutation tests).
const std::string& derived_script_text(const std::string& id);

// Propositional consequence over opaque atoms, decided by truth table.
bool taut_entails(const std::vector<FormulaPtr>& premises, const FormulaPtr& goal);

}  // namespace chp

#endif

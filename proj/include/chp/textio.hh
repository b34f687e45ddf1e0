// ASCII surface syntax: parser with located diagnostics and the canonical
// pretty-printer whose output is the golden-file format.
//
// Inputs start with a declaration header (`real x; trace h; chan ch;
// func f(real): real; pred p(trace); prog a;` ...); sorts are never inferred
// from names.  parse(print(ast)) == ast for every sort-checked AST.

#ifndef CHP_TEXTIO_HH
#define CHP_TEXTIO_HH

#include <string>

#include "chp/kernel.hh"
#include "chp/syntax.hh"
#include "chp/usubst.hh"

namespace chp {

struct Diagnostic {
    int line = 0, col = 0;
    std::string message;
};

struct parse_error : std::runtime_error {
    Diagnostic diag;
    explicit parse_error(Diagnostic d)
        : std::runtime_error(std::to_string(d.line) + ":" + std::to_string(d.col) + ": " +
                             d.message),
          diag(std::move(d)) {}
};

class Parser {
  public:
    explicit Parser(std::string text);
    Parser(std::string text, Decls decls);
    ~Parser();
    Parser(const Parser&) = delete;
    Parser& operator=(const Parser&) = delete;

    Decls& decls();

    // Consumes leading declarations (terminated items `real x;` etc.).
    void parse_decls();

    // Each *_all parses one object and requires end of input.
    TermPtr term_all();
    FormulaPtr formula_all();
    ProgramPtr program_all();
    SetExprPtr set_all();
    Substitution substitution_all();
    ProofScript proof_all();  // declarations + steps + qed

  private:
    struct Impl;
    Impl* impl;
};

// Convenience wrappers: declarations (if any) then the object.
TermPtr parse_term(const std::string& text, Decls& decls);
FormulaPtr parse_formula(const std::string& text, Decls& decls);
ProgramPtr parse_program(const std::string& text, Decls& decls);
SetExprPtr parse_set(const std::string& text, Decls& decls);
Substitution parse_substitution(const std::string& text, Decls& decls);
ProofScript parse_proof(const std::string& text);

std::string print_term(const TermPtr& t);
std::string print_formula(const FormulaPtr& f);
std::string print_program(const ProgramPtr& p);
std::string print_set(const SetExprPtr& s);

}  // namespace chp

#endif

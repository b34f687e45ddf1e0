// Multi-sorted ASTs for terms, programs, and formulas of dynamic logic with
// communicating hybrid programs, plus sort checking, structural equality, and
// context-sensitive well-formedness.
//
// Nodes are immutable and shared; every factory sort-checks its arguments so
// an AST in hand is always well-sorted.  Ground set annotations are stored in
// normalized form, which makes structural equality double as set equality.

#ifndef CHP_SYNTAX_HH
#define CHP_SYNTAX_HH

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chp/num.hh"
#include "chp/sets.hh"

namespace chp {

struct sort_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Symbol declarations

enum class SymKind : uint8_t { Func, Pred, SpacePred, ProgConst, SetVar };

// Replacement restriction carried by a symbol: PolyOnly symbols stand for
// program polynomials (pure polynomials over unprimed real variables),
// FolrOnly symbols for first-order real-arithmetic formulas.
enum class Restriction : uint8_t { None, PolyOnly, FolrOnly };

struct SymbolDecl {
    std::string name;
    SymKind kind = SymKind::Func;
    std::vector<Sort> argSorts;       // Func/Pred
    Sort result = Sort::Real;         // Func
    Restriction restr = Restriction::None;
    Universe setUni = Universe::Chans;  // SetVar
};

// Declaration table: variables (with sorts), channels, and symbols.  The
// global clock mu is predeclared.
struct Decls {
    std::map<std::string, Sort> vars;  // unprimed base names; never Channel
    std::map<std::string, bool> chans; // name -> declared
    std::map<std::string, SymbolDecl> symbols;

    Decls();
    void declare_var(const std::string& name, Sort s);
    void declare_chan(const std::string& name);
    void declare(SymbolDecl d);
    const SymbolDecl* find(const std::string& name) const;
    const SymbolDecl& get(const std::string& name) const;
    std::optional<Atom> lookup_var(const std::string& name, bool primed) const;
    std::optional<Atom> lookup_chan(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Terms

struct Term;
struct Formula;
struct Program;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;
using ProgramPtr = std::shared_ptr<const Program>;

struct Term {
    enum class Kind : uint8_t {
        Var, RealLit, IntLit, ChanLit, EmptyTrace, Dot,
        FuncApp, Plus, Times, IntPlus, Differential,
        Val, Stamp, Len, ChanOf, CommItem, Concat, Proj, At
    };
    Kind kind = Kind::Var;
    Sort sort = Sort::Real;

    Atom var;             // Var (variable) / ChanLit (channel atom)
    Rat rlit;             // RealLit
    Int ilit;             // IntLit
    int dotIndex = 0;     // Dot
    std::string sym;      // FuncApp
    Restriction restr = Restriction::None;  // FuncApp symbol restriction
    SetExprPtr chanSet;   // FuncApp channel-dependency slot (Chans universe)
    std::vector<TermPtr> args;  // FuncApp
    TermPtr a, b, c;      // subterms; CommItem: a=channel, b=value, c=stamp
    SetExprPtr projSet;   // Proj

    static TermPtr mkvar(Atom v);
    static TermPtr real_lit(Rat q);
    static TermPtr int_lit(Int n);
    static TermPtr chan_lit(Atom ch);
    static TermPtr empty_trace();
    static TermPtr dot(int index, Sort s);
    static TermPtr func(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                        std::vector<TermPtr> args);
    // Clone an application with a new channel set and arguments of the same
    // sorts; used where no declaration table is in scope.
    static TermPtr rebuild_func(const TermPtr& like, SetExprPtr chanSet,
                                std::vector<TermPtr> args);
    static TermPtr plus(TermPtr l, TermPtr r);
    static TermPtr times(TermPtr l, TermPtr r);
    static TermPtr int_plus(TermPtr l, TermPtr r);
    static TermPtr differential(TermPtr body);
    static TermPtr val(TermPtr tr);
    static TermPtr stamp(TermPtr tr);
    static TermPtr len(TermPtr tr);
    static TermPtr chan_of(TermPtr tr);
    static TermPtr comm_item(TermPtr ch, TermPtr value, TermPtr stampT);
    static TermPtr concat(TermPtr l, TermPtr r);
    static TermPtr proj(TermPtr tr, SetExprPtr chans);
    static TermPtr at(TermPtr tr, TermPtr index);
};

// ---------------------------------------------------------------------------
// Programs

struct Program {
    enum class Kind : uint8_t {
        ProgConst, Assign, Random, Test, ODE, Seq, Choice, Star, Send, Receive, Par
    };
    Kind kind = Kind::ProgConst;

    std::string sym;                 // ProgConst
    SetExprPtr chanSet, varSet;      // ProgConst annotations
    Atom x;                          // Assign/Random/Receive bound variable
    TermPtr rhs;                     // Assign rhs / Send payload
    FormulaPtr chi;                  // Test / ODE evolution constraint
    std::vector<std::pair<Atom, TermPtr>> odes;  // ODE: (x, rhs) pairs
    ProgramPtr p1, p2;               // Seq/Choice/Par; Star uses p1
    Atom ch, h;                      // Send/Receive channel and recorder

    static ProgramPtr prog_const(const Decls& d, const std::string& sym,
                                 SetExprPtr chanSet, SetExprPtr varSet);
    static ProgramPtr rebuild_const(const ProgramPtr& like, SetExprPtr chanSet,
                                    SetExprPtr varSet);
    static ProgramPtr assign(Atom x, TermPtr rhs);
    static ProgramPtr random(Atom x);
    static ProgramPtr test(FormulaPtr chi);
    static ProgramPtr ode(std::vector<std::pair<Atom, TermPtr>> eqs, FormulaPtr chi);
    static ProgramPtr seq(ProgramPtr a, ProgramPtr b);
    static ProgramPtr choice(ProgramPtr a, ProgramPtr b);
    static ProgramPtr star(ProgramPtr body);
    static ProgramPtr send(Atom ch, Atom h, TermPtr payload);
    static ProgramPtr receive(Atom ch, Atom h, Atom x);
    static ProgramPtr par(ProgramPtr a, ProgramPtr b);

    // alpha^0 = ?true, alpha^{n+1} = alpha ; alpha^n
    static ProgramPtr power(ProgramPtr alpha, unsigned n);
};

// ---------------------------------------------------------------------------
// Formulas

struct Formula {
    enum class Kind : uint8_t {
        Eq, Geq, Prefix, PredApp, SpacePred, InSet, SetEq, Not, And, Forall, Box, AcBox
    };
    Kind kind = Kind::Eq;

    TermPtr t1, t2;                 // relations; InSet element in t1
    Sort relSort = Sort::Real;      // Eq/Geq operand sort
    std::string sym;                // PredApp/SpacePred
    Restriction restr = Restriction::None;  // PredApp symbol restriction
    SetExprPtr chanSet, varSet;     // PredApp chan slot; SpacePred both slots
    std::vector<TermPtr> args;      // PredApp
    SetExprPtr s1, s2;              // InSet set in s1; SetEq both
    FormulaPtr f1, f2;              // Not/And; Box/AcBox postcondition in f1
    Atom qvar;                      // Forall
    ProgramPtr prog;                // Box/AcBox
    FormulaPtr assume, commit;      // AcBox

    static FormulaPtr eq(TermPtr l, TermPtr r);
    static FormulaPtr geq(TermPtr l, TermPtr r);
    static FormulaPtr prefix(TermPtr l, TermPtr r);
    static FormulaPtr pred(const Decls& d, const std::string& sym, SetExprPtr chanSet,
                           std::vector<TermPtr> args);
    static FormulaPtr space_pred(const Decls& d, const std::string& sym,
                                 SetExprPtr chanSet, SetExprPtr varSet);
    static FormulaPtr in_set(TermPtr element, SetExprPtr set);
    static FormulaPtr set_eqf(SetExprPtr l, SetExprPtr r);
    static FormulaPtr lnot(FormulaPtr f);
    static FormulaPtr land(FormulaPtr l, FormulaPtr r);
    static FormulaPtr forall(Atom v, FormulaPtr body);
    static FormulaPtr box(ProgramPtr a, FormulaPtr post);
    static FormulaPtr ac_box(ProgramPtr a, FormulaPtr assume, FormulaPtr commit,
                             FormulaPtr post);

    // Derived connectives expand structurally into the core.
    static FormulaPtr lor(FormulaPtr l, FormulaPtr r);    // !(!l & !r)
    static FormulaPtr imply(FormulaPtr l, FormulaPtr r);  // !(l & !r)
    static FormulaPtr equiv(FormulaPtr l, FormulaPtr r);  // (l->r) & (r->l)
    static FormulaPtr exists(Atom v, FormulaPtr body);    // !forall v !body
    static FormulaPtr truth();                            // !(0=0 & !(0=0))
    static FormulaPtr falsity();                          // 0=0 & !(0=0)
    static FormulaPtr diamond(ProgramPtr a, FormulaPtr post);  // ![a]!post
    // <a>_{A,C} post = ![a]_{A,!C} !post
    static FormulaPtr ac_diamond(ProgramPtr a, FormulaPtr assume, FormulaPtr commit,
                                 FormulaPtr post);
};

// ---------------------------------------------------------------------------
// Structural predicates and checks

// Pure polynomial over unprimed real variables (rational literals, +, *),
// possibly through PolyOnly function symbols and real dots.
bool is_program_polynomial(const TermPtr& t);

// First-order real arithmetic: =/>= over program polynomials, !, &, forall
// over real variables, FolrOnly predicate symbols.
bool is_folr(const FormulaPtr& f);

// Structural equality; ground set annotations compare as normalized sets.
// Renaming is never implicit.
bool syntactic_eq(const TermPtr& a, const TermPtr& b);
bool syntactic_eq(const FormulaPtr& a, const FormulaPtr& b);
bool syntactic_eq(const ProgramPtr& a, const ProgramPtr& b);

// Re-derives every node's sort and invariants; throws sort_error on failure.
// A fixpoint on factory-built ASTs.
void sort_check(const TermPtr& t);
void sort_check(const FormulaPtr& f);
void sort_check(const ProgramPtr& p);

struct WfViolation {
    std::string where;   // offending construct
    std::string detail;  // violating atoms
};

// Def. side conditions: parallel components share no bound state except
// recorders and global time; ac-contracts read nothing the program writes
// except recorders.  Nodes whose annotations are still symbolic (inside
// stored axiom schemata) are accepted; the conditions are enforced on every
// ground instance.
std::vector<WfViolation> check_wellformed(const FormulaPtr& f);
std::vector<WfViolation> check_wellformed(const ProgramPtr& p);

}  // namespace chp

#endif

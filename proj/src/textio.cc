#include "chp/textio.hh"

#include "chp/statics.hh"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <vector>

namespace chp {

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Tok {
    enum class K : uint8_t { Ident, PrimedIdent, Number, DotIdx, Punct, End };
    K k = K::End;
    std::string text;
    int dotIdx = 0;
    int line = 1, col = 1;
};

const std::set<std::string> kKeywords = {
    "real", "int", "trace", "chan", "func", "pred", "spacepred", "prog", "setvar",
    "poly", "folr", "forall", "exists", "true", "false", "val", "stamp", "chanof",
    "len", "eps", "down", "pre", "in", "RVar", "NVar", "TVar", "GT",
    "step", "axiom", "us", "mp", "rule", "rename", "taut", "setfact", "tracefact",
    "arith", "hyp", "qed"};

std::vector<Tok> lex(const std::string& text) {
    std::vector<Tok> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Tok::K k, std::string s, int l, int c, int dotIdx = 0) {
        out.push_back({k, std::move(s), dotIdx, l, c});
    };
    while (i < text.size()) {
        char ch = text[i];
        if (ch == '\n') {
            line++;
            col = 1;
            i++;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            col++;
            i++;
            continue;
        }
        if (ch == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') i++;
            continue;
        }
        int l = line, c = col;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                j++;
            std::string id = text.substr(i, j - i);
            bool primed = j < text.size() && text[j] == '\'';
            if (primed) j++;
            push(primed ? Tok::K::PrimedIdent : Tok::K::Ident, id, l, c);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) j++;
            push(Tok::K::Number, text.substr(i, j - i), l, c);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (ch == '.' && i + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) j++;
            push(Tok::K::DotIdx, text.substr(i, j - i), l, c,
                 std::stoi(text.substr(i + 1, j - i - 1)));
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        static const char* three[] = {"<->"};
        static const char* two[] = {":=", "->", ">=", "<=", "++", "||"};
        bool matched = false;
        for (const char* t : three)
            if (text.compare(i, 3, t) == 0) {
                push(Tok::K::Punct, t, l, c);
                i += 3;
                col += 3;
                matched = true;
                break;
            }
        if (matched) continue;
        for (const char* t : two)
            if (text.compare(i, 2, t) == 0) {
                push(Tok::K::Punct, t, l, c);
                i += 2;
                col += 2;
                matched = true;
                break;
            }
        if (matched) continue;
        static const std::string singles = "(){}[]<>,;:'!?*+-=&|\\~./";
        if (singles.find(ch) != std::string::npos) {
            push(Tok::K::Punct, std::string(1, ch), l, c);
            i++;
            col++;
            continue;
        }
        throw parse_error({l, c, std::string("unexpected character '") + ch + "'"});
    }
    out.push_back({Tok::K::End, "", 0, line, col});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parser

struct Parser::Impl {
    std::vector<Tok> toks;
    size_t pos = 0;
    Decls ds;
    const std::vector<Sort>* dotSorts = nullptr;  // active inside substitution RHS

    const Tok& peek(size_t ahead = 0) const {
        size_t i = pos + ahead;
        return i < toks.size() ? toks[i] : toks.back();
    }
    [[noreturn]] void error(const std::string& msg) const {
        const Tok& t = peek();
        throw parse_error({t.line, t.col, msg + (t.k == Tok::K::End ? " (at end of input)"
                                                                    : " (at '" + t.text + "')")});
    }
    bool at_punct(const std::string& p) const {
        return peek().k == Tok::K::Punct && peek().text == p;
    }
    bool at_kw(const std::string& k) const {
        return peek().k == Tok::K::Ident && peek().text == k && kKeywords.count(k);
    }
    bool eat_punct(const std::string& p) {
        if (!at_punct(p)) return false;
        pos++;
        return true;
    }
    void expect_punct(const std::string& p) {
        if (!eat_punct(p)) error("expected '" + p + "'");
    }
    bool eat_kw(const std::string& k) {
        if (!at_kw(k)) return false;
        pos++;
        return true;
    }
    std::string ident() {
        if (peek().k != Tok::K::Ident) error("expected an identifier");
        if (kKeywords.count(peek().text)) error("'" + peek().text + "' is reserved");
        return toks[pos++].text;
    }

    // -- declarations -------------------------------------------------------
    Sort sort_kw() {
        for (auto [name, s] : {std::pair<const char*, Sort>{"real", Sort::Real},
                               {"int", Sort::Int},
                               {"trace", Sort::Trace},
                               {"chan", Sort::Channel}})
            if (eat_kw(name)) return s;
        error("expected a sort");
    }

    bool at_decl() const {
        const Tok& t = peek();
        if (t.k != Tok::K::Ident) return false;
        static const std::set<std::string> heads = {"real", "int", "trace", "chan",
                                                    "func", "pred", "spacepred",
                                                    "prog", "setvar"};
        return heads.count(t.text) && peek(1).k == Tok::K::Ident &&
               !kKeywords.count(peek(1).text);
    }

    void decls_loop() {
        while (at_decl()) {
            if (at_kw("real") || at_kw("int") || at_kw("trace")) {
                Sort s = sort_kw();
                do ds.declare_var(ident(), s);
                while (eat_punct(","));
                expect_punct(";");
            } else if (eat_kw("chan")) {
                do ds.declare_chan(ident());
                while (eat_punct(","));
                expect_punct(";");
            } else if (eat_kw("func") || at_kw("pred")) {
                bool isPred = eat_kw("pred");
                SymbolDecl d;
                d.kind = isPred ? SymKind::Pred : SymKind::Func;
                d.name = ident();
                expect_punct("(");
                if (!at_punct(")"))
                    do d.argSorts.push_back(sort_kw());
                    while (eat_punct(","));
                expect_punct(")");
                if (!isPred) {
                    expect_punct(":");
                    d.result = sort_kw();
                }
                if (eat_kw("poly")) d.restr = Restriction::PolyOnly;
                else if (eat_kw("folr")) d.restr = Restriction::FolrOnly;
                expect_punct(";");
                ds.declare(std::move(d));
            } else if (eat_kw("spacepred")) {
                SymbolDecl d;
                d.kind = SymKind::SpacePred;
                d.name = ident();
                expect_punct(";");
                ds.declare(std::move(d));
            } else if (eat_kw("prog")) {
                SymbolDecl d;
                d.kind = SymKind::ProgConst;
                d.name = ident();
                expect_punct(";");
                ds.declare(std::move(d));
            } else if (eat_kw("setvar")) {
                SymbolDecl d;
                d.kind = SymKind::SetVar;
                d.name = ident();
                expect_punct(":");
                if (eat_kw("chan")) d.setUni = Universe::Chans;
                else if (peek().k == Tok::K::Ident && peek().text == "var") {
                    pos++;
                    d.setUni = Universe::Vars;
                } else error("expected 'chan' or 'var'");
                expect_punct(";");
                ds.declare(std::move(d));
            } else {
                error("bad declaration");
            }
        }
    }

    // -- sets ---------------------------------------------------------------
    bool at_set_start() const {
        if (at_punct("{") || at_punct("~")) return true;
        const Tok& t = peek();
        if (t.k != Tok::K::Ident) return false;
        if (t.text == "RVar" || t.text == "NVar" || t.text == "TVar" || t.text == "GT")
            return true;
        const SymbolDecl* d = ds.find(t.text);
        return d && d->kind == SymKind::SetVar;
    }

    Atom set_atom() {
        const Tok& t = peek();
        if (t.k != Tok::K::Ident && t.k != Tok::K::PrimedIdent) error("expected an atom");
        bool primed = t.k == Tok::K::PrimedIdent;
        std::string name = t.text;
        if (auto v = ds.lookup_var(name, primed)) {
            pos++;
            return *v;
        }
        if (!primed)
            if (auto c = ds.lookup_chan(name)) {
                pos++;
                return *c;
            }
        error("undeclared atom '" + name + (primed ? "'" : "") + "'");
    }

    SetExprPtr set_primary(std::optional<Universe> expect) {
        if (eat_punct("(")) {
            SetExprPtr s = set_expr(expect);
            expect_punct(")");
            return s;
        }
        if (at_punct("{")) {
            pos++;
            std::vector<Atom> atoms;
            if (!at_punct("}"))
                do atoms.push_back(set_atom());
                while (eat_punct(","));
            expect_punct("}");
            Universe u = atoms.empty()
                             ? expect.value_or(Universe::Chans)
                             : (atoms[0].sort == Sort::Channel ? Universe::Chans
                                                               : Universe::Vars);
            return SetExpr::make(GroundSet::finite(u, std::move(atoms)));
        }
        if (eat_punct("~")) {
            SetExprPtr s = set_primary(expect);
            return normalize(SetExpr::complement(s));
        }
        if (eat_kw("RVar")) return SetExpr::make(GroundSet::rvar());
        if (eat_kw("NVar")) return SetExpr::make(GroundSet::nvar());
        if (eat_kw("TVar")) return SetExpr::make(GroundSet::tvar());
        if (eat_kw("GT")) return SetExpr::make(GroundSet::gt());
        if (peek().k == Tok::K::Ident) {
            const SymbolDecl* d = ds.find(peek().text);
            if (d && d->kind == SymKind::SetVar) {
                pos++;
                return SetExpr::setvar(d->name, d->setUni);
            }
        }
        error("expected a set");
    }

    SetExprPtr set_inter_l(std::optional<Universe> expect) {
        SetExprPtr l = set_primary(expect);
        while (eat_punct("&")) l = SetExpr::inter(l, set_primary(l->uni));
        return l;
    }
    SetExprPtr set_minus_l(std::optional<Universe> expect) {
        SetExprPtr l = set_inter_l(expect);
        while (eat_punct("\\")) l = SetExpr::minus(l, set_inter_l(l->uni));
        return l;
    }
    SetExprPtr set_expr(std::optional<Universe> expect) {
        SetExprPtr l = set_minus_l(expect);
        while (at_punct("|") ) {
            pos++;
            l = SetExpr::unions(l, set_minus_l(l->uni));
        }
        return normalize(l);
    }

    // -- terms --------------------------------------------------------------
    TermPtr term() { return term_sum(); }

    TermPtr term_sum() {
        TermPtr l = term_product();
        for (;;) {
            if (eat_punct("+")) {
                TermPtr r = term_product();
                auto intLike = [](const TermPtr& t) {
                    if (t->sort == Sort::Int) return true;
                    if (t->kind != Term::Kind::RealLit) return false;
                    Rat q = t->rlit;
                    q.canonicalize();
                    return q.get_den() == 1;
                };
                bool wantInt = (l->sort == Sort::Int || r->sort == Sort::Int) &&
                               intLike(l) && intLike(r);
                l = wantInt ? Term::int_plus(l, r) : Term::plus(l, r);
            } else if (at_punct(".") && peek(1).k != Tok::K::End) {
                pos++;
                l = Term::concat(l, term_product());
            } else {
                break;
            }
        }
        return l;
    }

    TermPtr term_product() {
        TermPtr l = term_postfix();
        while (at_punct("*") && !at_program_star()) {
            pos++;
            l = Term::times(l, term_postfix());
        }
        return l;
    }
    bool at_program_star() const { return false; }  // '*' in term context is product

    TermPtr term_postfix() {
        TermPtr t = term_primary();
        for (;;) {
            if (at_punct("'")) {
                pos++;
                t = Term::differential(t);
            } else if (eat_kw("down")) {
                t = Term::proj(t, at_punct("(") ? set_expr(Universe::Chans)
                                                : set_primary(Universe::Chans));
            } else if (at_punct("[")) {
                pos++;
                TermPtr idx = term();
                expect_punct("]");
                t = Term::at(t, idx);
            } else {
                break;
            }
        }
        return t;
    }

    TermPtr number_lit(bool negative) {
        Int num(toks[pos++].text);
        if (negative) num = -num;
        if (eat_punct("/")) {
            if (peek().k != Tok::K::Number) error("expected a denominator");
            Int den(toks[pos++].text);
            return Term::real_lit(Rat(num, den));
        }
        return Term::real_lit(Rat(num));  // shallow-coerced to int where needed
    }

    TermPtr dot_term(int index) {
        if (!dotSorts) error("reserved dot outside a substitution replacement");
        if (index >= static_cast<int>(dotSorts->size()))
            error("dot index exceeds the symbol's arity");
        return Term::dot(index, (*dotSorts)[static_cast<size_t>(index)]);
    }

    TermPtr term_primary() {
        if (peek().k == Tok::K::Number) return number_lit(false);
        if (at_punct("-") && peek(1).k == Tok::K::Number) {
            pos++;
            return number_lit(true);
        }
        if (peek().k == Tok::K::DotIdx) {
            int idx = peek().dotIdx;
            pos++;
            return dot_term(idx);
        }
        if (at_punct(".")) {
            pos++;
            return dot_term(0);
        }
        if (eat_kw("eps")) return Term::empty_trace();
        for (auto [kw, mk] :
             {std::pair<const char*, TermPtr (*)(TermPtr)>{"val", [](TermPtr a) {
                                                               return Term::val(a);
                                                           }},
              {"stamp", [](TermPtr a) { return Term::stamp(a); }},
              {"len", [](TermPtr a) { return Term::len(a); }},
              {"chanof", [](TermPtr a) { return Term::chan_of(a); }}})
            if (eat_kw(kw)) {
                expect_punct("(");
                TermPtr a = term();
                expect_punct(")");
                return mk(a);
            }
        if (at_punct("<")) {
            pos++;
            TermPtr c = term();
            expect_punct(",");
            TermPtr v = term();
            expect_punct(",");
            TermPtr s = term();
            expect_punct(">");
            return Term::comm_item(c, v, s);
        }
        if (eat_punct("(")) {
            TermPtr t = term();
            expect_punct(")");
            return t;
        }
        const Tok& t = peek();
        if (t.k == Tok::K::PrimedIdent) {
            if (auto v = ds.lookup_var(t.text, true)) {
                pos++;
                return Term::mkvar(*v);
            }
            error("undeclared or non-real primed variable '" + t.text + "''");
        }
        if (t.k == Tok::K::Ident && !kKeywords.count(t.text)) {
            std::string name = t.text;
            if (auto v = ds.lookup_var(name, false)) {
                pos++;
                return Term::mkvar(*v);
            }
            if (auto c = ds.lookup_chan(name)) {
                pos++;
                return Term::chan_lit(*c);
            }
            const SymbolDecl* d = ds.find(name);
            if (d && d->kind == SymKind::Func) {
                pos++;
                auto [chans, args] = app_args(*d);
                return Term::func(ds, name, chans, std::move(args));
            }
            error("'" + name + "' is not a term symbol");
        }
        error("expected a term");
    }

    // Parses `(...)` application arguments with an optional leading channel
    // set; bare symbols are zero-ary applications.
    std::pair<SetExprPtr, std::vector<TermPtr>> app_args(const SymbolDecl& d) {
        SetExprPtr chans = SetExpr::make(GroundSet::empty(Universe::Chans));
        std::vector<TermPtr> args;
        if (eat_punct("(")) {
            bool first = true;
            while (!at_punct(")")) {
                if (!first) expect_punct(",");
                if (first && at_set_start()) chans = set_expr(Universe::Chans);
                else args.push_back(term());
                first = false;
            }
            expect_punct(")");
        }
        if (args.size() != d.argSorts.size())
            error(d.name + ": expected " + std::to_string(d.argSorts.size()) + " argument(s)");
        return {chans, std::move(args)};
    }

    // -- formulas -----------------------------------------------------------
    FormulaPtr formula() { return f_equiv(); }

    FormulaPtr f_equiv() {
        FormulaPtr l = f_imply();
        while (eat_punct("<->")) l = Formula::equiv(l, f_imply());
        return l;
    }
    FormulaPtr f_imply() {
        FormulaPtr l = f_or();
        if (eat_punct("->")) return Formula::imply(l, f_imply());
        return l;
    }
    FormulaPtr f_or() {
        FormulaPtr l = f_and();
        while (at_punct("|")) {
            pos++;
            l = Formula::lor(l, f_and());
        }
        return l;
    }
    FormulaPtr f_and() {
        FormulaPtr l = f_unary();
        while (at_punct("&")) {
            pos++;
            l = Formula::land(l, f_unary());
        }
        return l;
    }

    FormulaPtr f_unary() {
        if (eat_punct("!")) return Formula::lnot(f_unary());
        if (eat_kw("forall") || at_kw("exists")) {
            bool ex = eat_kw("exists");
            std::string name = ident();
            auto v = ds.lookup_var(name, false);
            if (!v) error("undeclared quantifier variable '" + name + "'");
            FormulaPtr body = f_unary();
            return ex ? Formula::exists(*v, body) : Formula::forall(*v, body);
        }
        if (at_punct("[")) {
            pos++;
            ProgramPtr p = program();
            expect_punct("]");
            return box_tail(p, false);
        }
        if (at_punct("<")) {
            size_t save = pos;
            try {
                return f_atom();  // comm-item relation
            } catch (const std::runtime_error&) {
                pos = save;
            }
            pos++;
            ProgramPtr p = program();
            expect_punct(">");
            return box_tail(p, true);
        }
        return f_atom();
    }

    FormulaPtr box_tail(ProgramPtr p, bool isDiamond) {
        if (eat_punct("{")) {
            FormulaPtr a = formula();
            expect_punct(",");
            FormulaPtr c = formula();
            expect_punct("}");
            FormulaPtr body = f_unary();
            return isDiamond ? Formula::ac_diamond(p, a, c, body)
                             : Formula::ac_box(p, a, c, body);
        }
        FormulaPtr body = f_unary();
        return isDiamond ? Formula::diamond(p, body) : Formula::box(p, body);
    }

    FormulaPtr f_atom() {
        if (eat_kw("true")) return Formula::truth();
        if (eat_kw("false")) return Formula::falsity();
        if (at_set_start()) {
            SetExprPtr l = set_expr(std::nullopt);
            expect_punct("=");
            SetExprPtr r = set_expr(l->uni);
            return Formula::set_eqf(l, r);
        }
        if (at_punct("(")) {
            size_t save = pos;
            try {
                pos++;
                FormulaPtr f = formula();
                expect_punct(")");
                return f;
            } catch (const std::runtime_error&) {
                pos = save;
            }
            return relation();
        }
        if (peek().k == Tok::K::Ident && !kKeywords.count(peek().text)) {
            const SymbolDecl* d = ds.find(peek().text);
            if (d && d->kind == SymKind::Pred) {
                pos++;
                auto [chans, args] = app_args(*d);
                return Formula::pred(ds, d->name, chans, std::move(args));
            }
            if (d && d->kind == SymKind::SpacePred) {
                pos++;
                SetExprPtr chans = SetExpr::make(GroundSet::all(Universe::Chans));
                SetExprPtr vars = SetExpr::make(GroundSet::all(Universe::Vars));
                if (at_punct("{")) {
                    pos++;
                    chans = set_expr(Universe::Chans);
                    expect_punct("}");
                    expect_punct("{");
                    vars = set_expr(Universe::Vars);
                    expect_punct("}");
                }
                return Formula::space_pred(ds, d->name, chans, vars);
            }
        }
        return relation();
    }

    FormulaPtr relation() {
        TermPtr l = term();
        if (eat_punct("=")) return Formula::eq(l, term());
        if (eat_punct(">=")) return Formula::geq(l, term());
        if (eat_punct("<=")) return Formula::geq(term(), l);
        if (eat_kw("pre")) return Formula::prefix(l, term());
        if (eat_kw("in")) return Formula::in_set(l, set_expr(Universe::Chans));
        error("expected a relation symbol");
    }

    // -- programs -----------------------------------------------------------
    ProgramPtr program() { return p_par(); }

    ProgramPtr p_par() {
        ProgramPtr l = p_choice();
        while (eat_punct("||")) l = Program::par(l, p_choice());
        return l;
    }
    ProgramPtr p_choice() {
        ProgramPtr l = p_seq();
        while (eat_punct("++")) l = Program::choice(l, p_seq());
        return l;
    }
    ProgramPtr p_seq() {
        ProgramPtr l = p_postfix();
        while (eat_punct(";")) l = Program::seq(l, p_postfix());
        return l;
    }
    ProgramPtr p_postfix() {
        ProgramPtr p = p_primary();
        while (at_punct("*")) {
            pos++;
            p = Program::star(p);
        }
        return p;
    }

    ProgramPtr p_primary() {
        if (eat_punct("(")) {
            ProgramPtr p = program();
            expect_punct(")");
            return p;
        }
        if (eat_punct("?")) {
            FormulaPtr chi;
            if (at_punct("(")) {
                pos++;
                chi = formula();
                expect_punct(")");
            } else {
                chi = f_unary();
            }
            return Program::test(chi);
        }
        if (at_punct("{")) {
            pos++;
            std::vector<std::pair<Atom, TermPtr>> eqs;
            do {
                if (peek().k != Tok::K::PrimedIdent) error("expected x' on an equation lhs");
                auto v = ds.lookup_var(peek().text, false);
                if (!v) error("undeclared variable '" + peek().text + "'");
                pos++;
                expect_punct("=");
                eqs.emplace_back(*v, term());
            } while (eat_punct(","));
            FormulaPtr chi;
            if (at_punct("&")) {
                pos++;
                chi = formula();
            }
            expect_punct("}");
            return Program::ode(std::move(eqs), chi);
        }
        if (peek().k != Tok::K::Ident || kKeywords.count(peek().text))
            error("expected a program");
        std::string name = peek().text;
        if (auto c = ds.lookup_chan(name)) {
            pos++;
            expect_punct("(");
            std::string rec = ident();
            auto h = ds.lookup_var(rec, false);
            if (!h || h->sort != Sort::Trace) error("'" + rec + "' is not a trace variable");
            expect_punct(")");
            if (eat_punct("!")) return Program::send(*c, *h, term());
            if (eat_punct("?")) {
                std::string tgt = ident();
                auto x = ds.lookup_var(tgt, false);
                if (!x) error("undeclared variable '" + tgt + "'");
                return Program::receive(*c, *h, *x);
            }
            error("expected '!' or '?' after the recorder");
        }
        if (auto v = ds.lookup_var(name, false)) {
            pos++;
            expect_punct(":=");
            if (eat_punct("*")) return Program::random(*v);
            return Program::assign(*v, term());
        }
        const SymbolDecl* d = ds.find(name);
        if (d && d->kind == SymKind::ProgConst) {
            pos++;
            SetExprPtr chans = SetExpr::make(GroundSet::all(Universe::Chans));
            SetExprPtr vars =
                SetExpr::make(set_union(GroundSet::rvar(), GroundSet::tvar()));
            if (at_punct("{")) {
                pos++;
                chans = set_expr(Universe::Chans);
                expect_punct("}");
                expect_punct("{");
                vars = set_expr(Universe::Vars);
                expect_punct("}");
            }
            return Program::prog_const(ds, name, chans, vars);
        }
        error("'" + name + "' is not a program symbol");
    }

    // -- substitutions ------------------------------------------------------
    bool at_binding_start() const {
        if (peek().k != Tok::K::Ident || kKeywords.count(peek().text)) return false;
        const SymbolDecl* d = ds.find(peek().text);
        return d != nullptr;
    }

    void one_binding(Substitution& sigma) {
        std::string name = ident();
        const SymbolDecl* d = ds.find(name);
        if (!d) error("'" + name + "' is not a declared symbol");
        // optional decorative slots on the left-hand side
        if (eat_punct("(")) {
            while (!at_punct(")") && peek().k != Tok::K::End) pos++;
            expect_punct(")");
        } else if (at_punct("{")) {
            for (int i = 0; i < 2; i++) {
                expect_punct("{");
                while (!at_punct("}") && peek().k != Tok::K::End) pos++;
                expect_punct("}");
            }
        }
        expect_punct("->");
        switch (d->kind) {
            case SymKind::Func: {
                dotSorts = &d->argSorts;
                TermPtr t = term();
                dotSorts = nullptr;
                if (t->sort != d->result && t->kind == Term::Kind::RealLit) {
                    Rat q = t->rlit;
                    q.canonicalize();
                    if (d->result == Sort::Int && q.get_den() == 1) t = Term::int_lit(q.get_num());
                }
                sigma.funcs[name] = t;
                break;
            }
            case SymKind::Pred: {
                dotSorts = &d->argSorts;
                FormulaPtr f = formula();
                dotSorts = nullptr;
                sigma.preds[name] = f;
                break;
            }
            case SymKind::SpacePred:
                sigma.spacePreds[name] = formula();
                break;
            case SymKind::ProgConst:
                sigma.progs[name] = program();
                break;
            case SymKind::SetVar:
                sigma.setVars[name] = set_expr(d->setUni);
                break;
        }
    }

    Substitution bindings(bool insideBraces) {
        Substitution sigma;
        for (;;) {
            if (insideBraces && at_punct("}")) break;
            if (peek().k == Tok::K::End) break;
            one_binding(sigma);
            if (eat_punct(",")) continue;
            if (!at_binding_start()) break;
        }
        return sigma;
    }

    // -- proof scripts ------------------------------------------------------
    ProofScript proof() {
        decls_loop();
        ProofScript sc;
        sc.decls = ds;
        while (eat_kw("step")) {
            ProofStep st;
            if (peek().k != Tok::K::Ident && peek().k != Tok::K::Number)
                error("expected a step id");
            st.id = toks[pos++].text;
            if (eat_kw("axiom")) {
                st.kind = ProofStep::Kind::Axiom;
                if (peek().k != Tok::K::Ident) error("expected an axiom name");
                st.name = toks[pos++].text;
            } else if (eat_kw("us")) {
                st.kind = ProofStep::Kind::US;
                st.ref1 = step_ref();
                expect_punct("{");
                st.sigma = bindings(true);
                expect_punct("}");
            } else if (eat_kw("mp")) {
                st.kind = ProofStep::Kind::MP;
                st.ref1 = step_ref();
                st.ref2 = step_ref();
            } else if (eat_kw("rule")) {
                st.kind = ProofStep::Kind::RuleInst;
                if (peek().k != Tok::K::Ident) error("expected a rule name");
                st.name = toks[pos++].text;
                expect_punct("{");
                st.sigma = bindings(true);
                expect_punct("}");
                st.refs = refs_tail();
            } else if (eat_kw("rename")) {
                st.kind = ProofStep::Kind::Rename;
                st.ref1 = step_ref();
                st.renameA = rename_atom();
                expect_punct("<->");
                st.renameB = rename_atom();
            } else if (eat_kw("taut")) {
                st.kind = ProofStep::Kind::Taut;
                st.goal = formula();
                st.refs = refs_tail();
            } else if (eat_kw("setfact")) {
                st.kind = ProofStep::Kind::SetFact;
                st.goal = formula();
            } else if (eat_kw("tracefact")) {
                st.kind = ProofStep::Kind::TraceFact;
                TermPtr l = term();
                expect_punct("=");
                st.goal = Formula::eq(l, term());
            } else if (eat_kw("arith")) {
                st.kind = ProofStep::Kind::Arith;
                st.goal = formula();
            } else if (eat_kw("hyp")) {
                st.kind = ProofStep::Kind::Hyp;
                st.goal = formula();
            } else {
                error("unknown step kind");
            }
            sc.steps.push_back(std::move(st));
        }
        if (!eat_kw("qed")) error("expected 'qed'");
        sc.claim = formula();
        if (peek().k != Tok::K::End) error("trailing input after qed");
        return sc;
    }

    std::string step_ref() {
        if (peek().k == Tok::K::Number) return toks[pos++].text;
        if (peek().k != Tok::K::Ident || kKeywords.count(peek().text))
            error("expected a step reference");
        return toks[pos++].text;
    }

    std::vector<std::string> refs_tail() {
        std::vector<std::string> out;
        while (peek().k == Tok::K::Number ||
               (peek().k == Tok::K::Ident && !kKeywords.count(peek().text)))
            out.push_back(toks[pos++].text);
        return out;
    }

    Atom rename_atom() {
        const Tok& t = peek();
        if (t.k != Tok::K::Ident) error("expected a variable or channel");
        if (auto v = ds.lookup_var(t.text, false)) {
            pos++;
            return *v;
        }
        if (auto c = ds.lookup_chan(t.text)) {
            pos++;
            return *c;
        }
        error("undeclared name '" + t.text + "'");
    }

    void expect_end() {
        if (peek().k != Tok::K::End) error("trailing input");
    }
};

Parser::Parser(std::string text) : impl(new Impl) { impl->toks = lex(text); }
Parser::Parser(std::string text, Decls decls) : impl(new Impl) {
    impl->toks = lex(text);
    impl->ds = std::move(decls);
}
Parser::~Parser() { delete impl; }
Decls& Parser::decls() { return impl->ds; }
void Parser::parse_decls() { impl->decls_loop(); }

TermPtr Parser::term_all() {
    impl->decls_loop();
    TermPtr t = impl->term();
    impl->expect_end();
    return t;
}
FormulaPtr Parser::formula_all() {
    impl->decls_loop();
    FormulaPtr f = impl->formula();
    impl->expect_end();
    return f;
}
ProgramPtr Parser::program_all() {
    impl->decls_loop();
    ProgramPtr p = impl->program();
    impl->expect_end();
    return p;
}
SetExprPtr Parser::set_all() {
    impl->decls_loop();
    SetExprPtr s = impl->set_expr(std::nullopt);
    impl->expect_end();
    return s;
}
Substitution Parser::substitution_all() {
    impl->decls_loop();
    Substitution s = impl->bindings(false);
    impl->expect_end();
    return s;
}
ProofScript Parser::proof_all() { return impl->proof(); }

TermPtr parse_term(const std::string& text, Decls& decls) {
    Parser p(text, decls);
    TermPtr t = p.term_all();
    decls = p.decls();
    return t;
}
FormulaPtr parse_formula(const std::string& text, Decls& decls) {
    Parser p(text, decls);
    FormulaPtr f = p.formula_all();
    decls = p.decls();
    return f;
}
ProgramPtr parse_program(const std::string& text, Decls& decls) {
    Parser p(text, decls);
    ProgramPtr r = p.program_all();
    decls = p.decls();
    return r;
}
SetExprPtr parse_set(const std::string& text, Decls& decls) {
    Parser p(text, decls);
    SetExprPtr s = p.set_all();
    decls = p.decls();
    return s;
}
Substitution parse_substitution(const std::string& text, Decls& decls) {
    Parser p(text, decls);
    Substitution s = p.substitution_all();
    decls = p.decls();
    return s;
}
ProofScript parse_proof(const std::string& text) {
    Parser p(text);
    return p.proof_all();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string pset(const SetExprPtr& s, int level);

bool needs_parens_text(const std::string& t) {
    return t.find(" | ") != std::string::npos || t.find(" \\ ") != std::string::npos;
}

std::string pset(const SetExprPtr& s, int level) {
    switch (s->kind) {
        case SetExpr::Kind::Ground: {
            std::string t = ground_text(s->ground);
            if (level > 1 && needs_parens_text(t)) return "(" + t + ")";
            return t;
        }
        case SetExpr::Kind::SetVar:
            return s->name;
        case SetExpr::Kind::Complement:
            return "~" + pset(s->l, 4);
        case SetExpr::Kind::Inter: {
            std::string t = pset(s->l, 3) + " & " + pset(s->r, 4);
            return level > 3 ? "(" + t + ")" : t;
        }
        case SetExpr::Kind::Minus: {
            std::string t = pset(s->l, 2) + " \\ " + pset(s->r, 3);
            return level > 2 ? "(" + t + ")" : t;
        }
        case SetExpr::Kind::Union: {
            std::string t = pset(s->l, 1) + " | " + pset(s->r, 2);
            return level > 1 ? "(" + t + ")" : t;
        }
    }
    return "?";
}

// term levels: 1 sum/concat, 2 product, 3 postfix, 4 primary
std::string pterm(const TermPtr& t, int level);
std::string pformula(const FormulaPtr& f, int level);
std::string pprogram(const ProgramPtr& p, int level);

std::string wrap(std::string s, bool parens) { return parens ? "(" + s + ")" : s; }

std::string pterm(const TermPtr& t, int level) {
    switch (t->kind) {
        case Term::Kind::Var:
        case Term::Kind::ChanLit:
            return atom_text(t->var);
        case Term::Kind::RealLit:
            return rat_text(t->rlit);
        case Term::Kind::IntLit:
            return int_text(t->ilit);
        case Term::Kind::EmptyTrace:
            return "eps";
        case Term::Kind::Dot:
            return t->dotIndex == 0 ? "." : "." + std::to_string(t->dotIndex);
        case Term::Kind::FuncApp: {
            std::string out = t->sym;
            bool chanSlot = !(t->chanSet->is_ground() && t->chanSet->ground.is_empty());
            if (t->args.empty() && !chanSlot) return out;
            out += "(";
            bool first = true;
            if (chanSlot) {
                out += pset(t->chanSet, 0);
                first = false;
            }
            for (const TermPtr& a : t->args) {
                if (!first) out += ", ";
                out += pterm(a, 0);
                first = false;
            }
            return out + ")";
        }
        case Term::Kind::Plus:
        case Term::Kind::IntPlus:
            return wrap(pterm(t->a, 1) + " + " + pterm(t->b, 2), level > 1);
        case Term::Kind::Concat:
            return wrap(pterm(t->a, 1) + " . " + pterm(t->b, 2), level > 1);
        case Term::Kind::Times:
            return wrap(pterm(t->a, 2) + " * " + pterm(t->b, 3), level > 2);
        case Term::Kind::Differential:
            return "(" + pterm(t->a, 0) + ")'";
        case Term::Kind::Val:
            return "val(" + pterm(t->a, 0) + ")";
        case Term::Kind::Stamp:
            return "stamp(" + pterm(t->a, 0) + ")";
        case Term::Kind::Len:
            return "len(" + pterm(t->a, 0) + ")";
        case Term::Kind::ChanOf:
            return "chanof(" + pterm(t->a, 0) + ")";
        case Term::Kind::CommItem:
            return "<" + pterm(t->a, 0) + ", " + pterm(t->b, 0) + ", " + pterm(t->c, 0) + ">";
        case Term::Kind::Proj:
            return wrap(pterm(t->a, 3) + " down " + pset(t->projSet, 4), level > 3);
        case Term::Kind::At:
            return wrap(pterm(t->a, 3) + "[" + pterm(t->b, 0) + "]", level > 3);
    }
    return "?";
}

// Sugar recognition on the core encoding.
const FormulaPtr& truth_pattern() {
    static FormulaPtr t = Formula::truth();
    return t;
}
const FormulaPtr& falsity_pattern() {
    static FormulaPtr f = Formula::falsity();
    return f;
}

bool match_imply(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    if (f->kind != Formula::Kind::Not || f->f1->kind != Formula::Kind::And) return false;
    const FormulaPtr& l = f->f1->f1;
    const FormulaPtr& r = f->f1->f2;
    if (r->kind != Formula::Kind::Not) return false;
    a = l;
    b = r->f1;
    return true;
}

bool match_or(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    FormulaPtr x, y;
    if (!match_imply(f, x, y)) return false;
    if (x->kind != Formula::Kind::Not) return false;
    a = x->f1;
    b = y;
    return true;
}

bool match_equiv(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    if (f->kind != Formula::Kind::And) return false;
    FormulaPtr a1, b1, a2, b2;
    if (!match_imply(f->f1, a1, b1) || !match_imply(f->f2, a2, b2)) return false;
    if (!syntactic_eq(a1, b2) || !syntactic_eq(b1, a2)) return false;
    a = a1;
    b = b1;
    return true;
}

// formula levels: 1 equiv, 2 imply, 3 or, 4 and, 5 unary, 6 atom
std::string pformula(const FormulaPtr& f, int level) {
    if (syntactic_eq(f, truth_pattern())) return "true";
    if (syntactic_eq(f, falsity_pattern())) return "false";
    FormulaPtr a, b;
    switch (f->kind) {
        case Formula::Kind::Not: {
            if (match_or(f, a, b))
                return wrap(pformula(a, 3) + " | " + pformula(b, 4), level > 3);
            if (match_imply(f, a, b))
                return wrap(pformula(a, 3) + " -> " + pformula(b, 2), level > 2);
            const FormulaPtr& g = f->f1;
            if (g->kind == Formula::Kind::Forall && g->f1->kind == Formula::Kind::Not)
                return wrap("exists " + atom_text(g->qvar) + " " + pformula(g->f1->f1, 5),
                            level > 5);
            if (g->kind == Formula::Kind::Box && g->f1->kind == Formula::Kind::Not)
                return wrap("<" + pprogram(g->prog, 0) + "> " + pformula(g->f1->f1, 5),
                            level > 5);
            if (g->kind == Formula::Kind::AcBox && g->f1->kind == Formula::Kind::Not &&
                g->commit->kind == Formula::Kind::Not)
                return wrap("<" + pprogram(g->prog, 0) + ">{" + pformula(g->assume, 0) +
                                ", " + pformula(g->commit->f1, 0) + "} " +
                                pformula(g->f1->f1, 5),
                            level > 5);
            bool paren = g->kind == Formula::Kind::Eq || g->kind == Formula::Kind::Geq ||
                         g->kind == Formula::Kind::Prefix || g->kind == Formula::Kind::InSet ||
                         g->kind == Formula::Kind::SetEq;
            return wrap("!" + (paren ? "(" + pformula(g, 0) + ")" : pformula(g, 5)),
                        level > 5);
        }
        case Formula::Kind::And:
            if (match_equiv(f, a, b))
                return wrap(pformula(a, 2) + " <-> " + pformula(b, 2), level > 1);
            return wrap(pformula(f->f1, 4) + " & " + pformula(f->f2, 5), level > 4);
        case Formula::Kind::Eq:
            return pterm(f->t1, 0) + " = " + pterm(f->t2, 0);
        case Formula::Kind::Geq:
            return pterm(f->t1, 0) + " >= " + pterm(f->t2, 0);
        case Formula::Kind::Prefix:
            return pterm(f->t1, 0) + " pre " + pterm(f->t2, 0);
        // Set-valued relations take parens whenever nested: a bare trailing
        // set would otherwise swallow a following formula connective.
        case Formula::Kind::InSet:
            return wrap(pterm(f->t1, 0) + " in " + pset(f->s1, 2), level > 0);
        case Formula::Kind::SetEq:
            return wrap(pset(f->s1, 2) + " = " + pset(f->s2, 2), level > 0);
        case Formula::Kind::PredApp: {
            std::string out = f->sym;
            bool chanSlot = !(f->chanSet->is_ground() && f->chanSet->ground.is_empty());
            if (f->args.empty() && !chanSlot) return out;
            out += "(";
            bool first = true;
            if (chanSlot) {
                out += pset(f->chanSet, 0);
                first = false;
            }
            for (const TermPtr& t : f->args) {
                if (!first) out += ", ";
                out += pterm(t, 0);
                first = false;
            }
            return out + ")";
        }
        case Formula::Kind::SpacePred: {
            bool allC = f->chanSet->is_ground() && f->chanSet->ground.is_all();
            bool allV = f->varSet->is_ground() && f->varSet->ground.is_all();
            if (allC && allV) return f->sym;
            return f->sym + "{" + pset(f->chanSet, 0) + "}{" + pset(f->varSet, 0) + "}";
        }
        case Formula::Kind::Forall:
            return wrap("forall " + atom_text(f->qvar) + " " + pformula(f->f1, 5), level > 5);
        case Formula::Kind::Box:
            return wrap("[" + pprogram(f->prog, 0) + "] " + pformula(f->f1, 5), level > 5);
        case Formula::Kind::AcBox:
            return wrap("[" + pprogram(f->prog, 0) + "]{" + pformula(f->assume, 0) + ", " +
                            pformula(f->commit, 0) + "} " + pformula(f->f1, 5),
                        level > 5);
    }
    return "?";
}

// program levels: 1 par, 2 choice, 3 seq, 4 postfix, 5 primary
std::string pprogram(const ProgramPtr& p, int level) {
    switch (p->kind) {
        case Program::Kind::ProgConst: {
            bool allC = p->chanSet->is_ground() && p->chanSet->ground.is_all();
            bool defV = p->varSet->is_ground() &&
                        p->varSet->ground == set_union(GroundSet::rvar(), GroundSet::tvar());
            if (allC && defV) return p->sym;
            return p->sym + "{" + pset(p->chanSet, 0) + "}{" + pset(p->varSet, 0) + "}";
        }
        case Program::Kind::Assign:
            return atom_text(p->x) + " := " + pterm(p->rhs, 0);
        case Program::Kind::Random:
            return atom_text(p->x) + " := *";
        case Program::Kind::Test: {
            std::string c = pformula(p->chi, 6);
            bool atomic = p->chi->kind == Formula::Kind::Eq ||
                          p->chi->kind == Formula::Kind::Geq ||
                          p->chi->kind == Formula::Kind::PredApp ||
                          c == "true" || c == "false";
            return "?" + (atomic ? pformula(p->chi, 0) : "(" + pformula(p->chi, 0) + ")");
        }
        case Program::Kind::ODE: {
            std::string out = "{";
            for (size_t i = 0; i < p->odes.size(); i++) {
                if (i) out += ", ";
                out += atom_text(p->odes[i].first) + "' = " + pterm(p->odes[i].second, 0);
            }
            return out + " & " + pformula(p->chi, 0) + "}";
        }
        case Program::Kind::Send:
            return p->ch.name + "(" + atom_text(p->h) + ")!" + pterm(p->rhs, 0);
        case Program::Kind::Receive:
            return p->ch.name + "(" + atom_text(p->h) + ")?" + atom_text(p->x);
        case Program::Kind::Seq:
            return wrap(pprogram(p->p1, 3) + " ; " + pprogram(p->p2, 4), level > 3);
        case Program::Kind::Choice:
            return wrap(pprogram(p->p1, 2) + " ++ " + pprogram(p->p2, 3), level > 2);
        case Program::Kind::Par:
            return wrap(pprogram(p->p1, 1) + " || " + pprogram(p->p2, 2), level > 1);
        case Program::Kind::Star: {
            bool atomic = p->p1->kind == Program::Kind::ProgConst;
            return (atomic ? pprogram(p->p1, 5) : "(" + pprogram(p->p1, 0) + ")") + "*";
        }
    }
    return "?";
}

}  // namespace

std::string print_term(const TermPtr& t) { return pterm(t, 0); }
std::string print_formula(const FormulaPtr& f) { return pformula(f, 0); }
std::string print_program(const ProgramPtr& p) { return pprogram(p, 0); }
std::string print_set(const SetExprPtr& s) { return pset(normalize(s), 0); }

}  // namespace chp

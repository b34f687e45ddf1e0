// Command-line front end: parse -> operate -> print with stable exit codes.
//   0 success / proved      1 failure, clash, or refuted
//   2 usage or parse error  3 proved modulo hypotheses or tainted steps

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "chp/axioms.hh"
#include "chp/kernel.hh"
#include "chp/oracle.hh"
#include "chp/statics.hh"
#include "chp/textio.hh"
#include "chp/usubst.hh"

using namespace chp;

namespace {

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Output {
    std::ofstream file;
    std::ostream& out() { return file.is_open() ? file : std::cout; }
    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw std::runtime_error("cannot write '" + path + "'");
    }
};

int run_parse(const std::string& kind, const std::string& text, std::ostream& out) {
    Parser p(text);
    if (kind == "term") out << print_term(p.term_all()) << "\n";
    else if (kind == "formula") out << print_formula(p.formula_all()) << "\n";
    else if (kind == "program") out << print_program(p.program_all()) << "\n";
    else if (kind == "set") out << print_set(p.set_all()) << "\n";
    else if (kind == "proof") {
        ProofScript s = p.proof_all();
        out << "proof with " << s.steps.size() << " step(s), claim "
            << print_formula(s.claim) << "\n";
    } else {
        throw std::runtime_error("unknown kind '" + kind + "'");
    }
    return 0;
}

int run_statics(const std::string& kind, const std::string& text, std::ostream& out) {
    Parser p(text);
    if (kind == "program") {
        ProgStatics st = statics_program(p.program_all());
        out << "fv  = " << ground_text(st.fv) << "\n"
            << "bv  = " << ground_text(st.bv) << "\n"
            << "mbv = " << ground_text(st.mbv) << "\n"
            << "cn  = " << ground_text(st.cn) << "\n";
    } else {
        TermStatics st =
            kind == "term" ? statics_term(p.term_all()) : statics_formula(p.formula_all());
        out << "fv  = " << ground_text(st.fv) << "\n"
            << "cn  = " << ground_text(st.cn) << "\n";
    }
    return 0;
}

int run_subst(const std::string& substPath, const std::string& kind,
              const std::string& exprText, const std::string& tabooVars,
              const std::string& tabooChans, const std::string& context,
              std::ostream& out) {
    Parser sp(slurp(substPath));
    sp.parse_decls();
    Decls decls = sp.decls();
    Substitution sigma = sp.substitution_all();
    validate_substitution(sigma, decls);

    Taboo z;
    if (!tabooVars.empty()) z.vars = force_ground(parse_set(tabooVars, decls));
    if (!tabooChans.empty()) z.chans = force_ground(parse_set(tabooChans, decls));
    GroundSet b = GroundSet::empty(Universe::Vars);
    if (!context.empty()) b = force_ground(parse_set(context, decls));

    Parser ep(exprText, decls);
    try {
        if (kind == "term") {
            out << print_term(usub_term(sigma, z, ep.term_all())) << "\n";
        } else if (kind == "program") {
            ProgSubstResult r = usub_program(sigma, z, b, ep.program_all());
            out << print_program(r.prog) << "\n"
                << "output taboo vars  = " << ground_text(r.out.vars) << "\n"
                << "output taboo chans = " << ground_text(r.out.chans) << "\n";
        } else {
            out << print_formula(usub_formula(sigma, z, ep.formula_all())) << "\n";
        }
    } catch (const clash_error& e) {
        out << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_axiom(const std::string& id, std::ostream& out) {
    if (!has_axiom(id)) {
        out << "unknown axiom or rule '" << id << "'\n";
        return 1;
    }
    const AxiomEntry& e = get_axiom(id);
    for (const FormulaPtr& pr : e.premises) out << "premise: " << print_formula(pr) << "\n";
    out << print_formula(e.conclusion) << "\n";
    return 0;
}

int run_simplify(const std::string& text, std::ostream& out) {
    Parser p(text);
    out << print_term(trace_simplify(p.term_all())) << "\n";
    return 0;
}

int run_check(const std::string& text, std::ostream& out) {
    ProofScript script = parse_proof(text);
    CheckReport rep = check_proof(script);
    switch (rep.status) {
        case CheckReport::Status::Proved: {
            std::string quals;
            if (!rep.hypotheses.empty())
                quals += " (" + std::to_string(rep.hypotheses.size()) + " hypothesis" +
                         (rep.hypotheses.size() == 1 ? "" : "es") + ")";
            if (!rep.tainted.empty()) quals += " (tainted arithmetic)";
            out << "proved" << quals << ": " << print_formula(rep.conclusion) << "\n";
            for (const std::string& h : rep.hypotheses) out << "hypothesis step: " << h << "\n";
            for (const std::string& t : rep.tainted) out << "tainted step: " << t << "\n";
            return rep.clean() ? 0 : 3;
        }
        case CheckReport::Status::Failed:
            out << "failed at step " << rep.failStep << ": " << rep.reason << "\n";
            return 1;
    }
    return 1;
}

// State bindings: `x = 3/2, h = [(h, ch, 4, 0)], n = 2` — trace values list
// (recorder, channel, value, stamp) events.  Written with a tiny ad-hoc
// scanner since the binding form is not part of the expression grammar.
struct BindScanner {
    std::string s;
    size_t i = 0;
    void ws() { while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) i++; }
    bool eat(char c) {
        ws();
        if (i < s.size() && s[i] == c) return i++, true;
        return false;
    }
    void expect(char c) {
        if (!eat(c)) throw std::runtime_error(std::string("expected '") + c + "' in bindings");
    }
    bool done() {
        ws();
        return i >= s.size();
    }
    std::string ident() {
        ws();
        size_t start = i;
        while (i < s.size() && (isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) i++;
        if (start == i) throw std::runtime_error("expected an identifier in bindings");
        return s.substr(start, i - start);
    }
    Rat rat() {
        ws();
        size_t start = i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) i++;
        while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) i++;
        if (eat('/')) {
            ws();
            while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) i++;
        }
        std::string txt = s.substr(start, i - start);
        if (txt.empty()) throw std::runtime_error("expected a number in bindings");
        Rat q(txt);
        q.canonicalize();
        return q;
    }
};

State parse_state(const std::string& bindings, const Decls& decls) {
    State v;
    BindScanner sc{bindings};
    while (!sc.done()) {
        std::string name = sc.ident();
        std::optional<Atom> x = decls.lookup_var(name, false);
        if (!x) throw std::runtime_error("'" + name + "' is not a declared variable");
        sc.expect('=');
        if (x->sort == Sort::Trace) {
            sc.expect('[');
            TraceVal tr;
            while (!sc.eat(']')) {
                sc.expect('(');
                sc.ident();  // recorder name, implied by the bound variable
                sc.expect(',');
                std::string ch = sc.ident();
                if (!decls.lookup_chan(ch))
                    throw std::runtime_error("'" + ch + "' is not a declared channel");
                sc.expect(',');
                Rat value = sc.rat();
                sc.expect(',');
                Rat stamp = sc.rat();
                sc.expect(')');
                tr.push_back(Comm{Atom::chan(ch), value, stamp});
                sc.eat(',');
            }
            v.m[*x] = Value::trace(std::move(tr));
        } else if (x->sort == Sort::Int) {
            v.m[*x] = Value::integer(Int(sc.rat().get_num()));
        } else {
            v.m[*x] = Value::real(sc.rat());
        }
        sc.eat(',');
    }
    return v;
}

// Domain spec: `x : -1, 0, 1 ; y : 0, 2`.
OracleConfig parse_domains(const std::string& spec, const Decls& decls, unsigned fuel) {
    OracleConfig cfg;
    cfg.starFuel = fuel;
    BindScanner sc{spec};
    while (!sc.done()) {
        std::string name = sc.ident();
        std::optional<Atom> x = decls.lookup_var(name, false);
        if (!x) throw std::runtime_error("'" + name + "' is not a declared variable");
        sc.expect(':');
        std::vector<Value>& dom = cfg.domains[*x];
        do {
            Rat q = sc.rat();
            dom.push_back(x->sort == Sort::Int ? Value::integer(Int(q.get_num()))
                                               : Value::real(q));
        } while (sc.eat(','));
        sc.eat(';');
    }
    return cfg;
}

Interp interp_for(const Decls& decls) {
    Interp I;
    for (const auto& [name, declared] : decls.chans)
        if (declared) {
            I.defaultChan = Atom::chan(name);
            break;
        }
    return I;
}

int run_oracle_eval(const std::string& text, const std::string& stateBindings,
                    const std::string& domainSpec, unsigned fuel, std::ostream& out) {
    Parser p(text);
    p.parse_decls();
    Decls decls = p.decls();
    FormulaPtr f = p.formula_all();
    State v = parse_state(stateBindings, decls);
    OracleConfig cfg = parse_domains(domainSpec, decls, fuel);
    bool holds = eval_formula(interp_for(decls), v, f, cfg);
    out << (holds ? "true" : "false") << " at " << state_text(v) << "\n";
    return holds ? 0 : 1;
}

int run_oracle_validate(const std::string& text, const std::string& domainSpec,
                        unsigned fuel, std::ostream& out) {
    Parser p(text);
    p.parse_decls();
    Decls decls = p.decls();
    FormulaPtr f = p.formula_all();
    OracleConfig cfg = parse_domains(domainSpec, decls, fuel);
    std::vector<Atom> vars;
    for (const auto& [x, dom] : cfg.domains) vars.push_back(x);
    SampleReport rep =
        validate_on_samples(interp_for(decls), f, cfg, state_grid(cfg, vars));
    out << (rep.valid ? "valid on samples" : "counterexample") << ": " << rep.note << "\n";
    return rep.valid ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"communicating hybrid programs checker"};
    app.require_subcommand(1);
    std::string outPath;
    app.add_option("-o", outPath, "write results to a file instead of stdout");

    std::string parseKind = "formula", parseFile;
    CLI::App* cmdParse = app.add_subcommand("parse", "echo the canonical form");
    cmdParse->add_option("--kind", parseKind, "term|formula|program|set|proof");
    cmdParse->add_option("file", parseFile, "input path or -")->required();

    std::string staticsKind = "program", staticsFile;
    CLI::App* cmdStatics = app.add_subcommand("statics", "print the static sets");
    cmdStatics->add_option("--kind", staticsKind, "term|formula|program");
    cmdStatics->add_option("file", staticsFile, "input path or -")->required();

    std::string substFile, substKind = "formula", substExpr, tabooVars, tabooChans, context;
    CLI::App* cmdSubst = app.add_subcommand("subst", "apply a uniform substitution");
    cmdSubst->add_option("--kind", substKind, "term|formula|program");
    cmdSubst->add_option("--taboo-vars", tabooVars, "taboo variable set");
    cmdSubst->add_option("--taboo-chans", tabooChans, "taboo channel set");
    cmdSubst->add_option("--context", context, "parallel context variable set");
    cmdSubst->add_option("subst", substFile, "substitution path (decls + bindings)")
        ->required();
    cmdSubst->add_option("expr", substExpr, "expression text")->required();

    std::string axiomId;
    CLI::App* cmdAxiom = app.add_subcommand("axiom", "print a registry entry");
    cmdAxiom->add_option("id", axiomId, "axiom or rule id")->required();

    std::string simplifyText;
    CLI::App* cmdSimplify = app.add_subcommand("simplify", "normalize a trace term");
    cmdSimplify->add_option("term", simplifyText, "term text (decls + term)")->required();

    std::string checkFile;
    CLI::App* cmdCheck = app.add_subcommand("check", "replay a proof script");
    cmdCheck->add_option("file", checkFile, "proof path or -")->required();

    CLI::App* cmdOracle = app.add_subcommand("oracle", "evaluate against the semantics");
    cmdOracle->require_subcommand(1);
    std::string evalState, evalFile, evalDomains, valDomains, valFile;
    unsigned evalFuel = 4, valFuel = 4;
    CLI::App* cmdEval = cmdOracle->add_subcommand("eval", "evaluate in one state");
    cmdEval->add_option("--state", evalState, "bindings `x = 3/2, h = [(h, ch, 4, 0)]`");
    cmdEval->add_option("--domains", evalDomains,
                        "sample domains for receives and quantifiers");
    cmdEval->add_option("--fuel", evalFuel, "loop unrolling bound");
    cmdEval->add_option("file", evalFile, "formula path or -")->required();
    CLI::App* cmdValidate = cmdOracle->add_subcommand("validate", "sample a state grid");
    cmdValidate->add_option("--domains", valDomains, "domains `x : -1, 0, 1 ; y : 0`")
        ->required();
    cmdValidate->add_option("--fuel", valFuel, "loop unrolling bound");
    cmdValidate->add_option("file", valFile, "formula path or -")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);  // prints usage/help
        return rc == 0 ? 0 : 2;
    }

    try {
        Output sink;
        sink.open(outPath);
        std::ostream& out = sink.out();
        if (*cmdParse) return run_parse(parseKind, slurp(parseFile), out);
        if (*cmdStatics) return run_statics(staticsKind, slurp(staticsFile), out);
        if (*cmdSubst)
            return run_subst(substFile, substKind, substExpr, tabooVars, tabooChans,
                             context, out);
        if (*cmdAxiom) return run_axiom(axiomId, out);
        if (*cmdSimplify) return run_simplify(simplifyText, out);
        if (*cmdCheck) return run_check(slurp(checkFile), out);
        if (*cmdEval)
            return run_oracle_eval(slurp(evalFile), evalState, evalDomains, evalFuel, out);
        if (*cmdValidate)
            return run_oracle_validate(slurp(valFile), valDomains, valFuel, out);
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

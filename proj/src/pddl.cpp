#include "gsp/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gsp::pddl {

namespace {

struct Token {
    enum Kind { LParen, RParen, Symbol, End } kind = End;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_trivia();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_.kind = Token::End;
            tok_.text.clear();
            return;
        }
        char c = text_[pos_];
        if (c == '(') {
            tok_ = {Token::LParen, "(", line_, col_};
            consume();
            return;
        }
        if (c == ')') {
            tok_ = {Token::RParen, ")", line_, col_};
            consume();
            return;
        }
        std::string sym;
        while (pos_ < text_.size()) {
            c = text_[pos_];
            if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c)))
                break;
            sym.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            consume();
        }
        tok_.kind = Token::Symbol;
        tok_.text = std::move(sym);
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') consume();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                consume();
            } else {
                break;
            }
        }
    }

    void consume() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

[[noreturn]] void syntax_error(const Token& t, const std::string& expected) {
    std::string got = t.kind == Token::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + expected + ", got " + got, t.line, t.col);
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    Domain domain() {
        expect_lparen();
        expect_symbol("define");
        expect_lparen();
        expect_symbol("domain");
        Domain dom;
        dom.name = name("domain name");
        expect_rparen();
        dom.types.push_back({"object", ""});

        while (lex_.peek().kind == Token::LParen) {
            expect_lparen();
            Token head = lex_.next();
            if (head.kind != Token::Symbol)
                syntax_error(head, "section keyword");
            if (head.text == ":requirements") {
                requirements(head);
            } else if (head.text == ":types") {
                types_section(dom);
            } else if (head.text == ":predicates") {
                predicates_section(dom);
            } else if (head.text == ":action") {
                dom.schemas.push_back(action_section(dom));
            } else {
                throw UnsupportedFeature("unsupported domain section " + head.text,
                                         head.line, head.col);
            }
        }
        expect_rparen();
        expect_end();
        check_domain(dom);
        return dom;
    }

    Instance instance(const Domain& dom) {
        expect_lparen();
        expect_symbol("define");
        expect_lparen();
        expect_symbol("problem");
        Instance inst;
        inst.name = name("problem name");
        expect_rparen();

        bool saw_init = false, saw_goal = false;
        while (lex_.peek().kind == Token::LParen) {
            expect_lparen();
            Token head = lex_.next();
            if (head.kind != Token::Symbol)
                syntax_error(head, "section keyword");
            if (head.text == ":domain") {
                inst.domain_name = name("domain name");
                expect_rparen();
            } else if (head.text == ":objects") {
                inst.objects = typed_list("object name");
                expect_rparen();
            } else if (head.text == ":init") {
                saw_init = true;
                while (lex_.peek().kind == Token::LParen) {
                    expect_lparen();
                    add_unique(inst.init, plain_atom());
                }
                expect_rparen();
            } else if (head.text == ":goal") {
                saw_goal = true;
                for (Atom& a : conjunction("goal"))
                    add_unique(inst.goal, std::move(a));
                expect_rparen();
            } else {
                throw UnsupportedFeature("unsupported problem section " + head.text,
                                         head.line, head.col);
            }
        }
        expect_rparen();
        expect_end();
        if (!saw_init)
            throw SyntaxError("problem is missing an :init section");
        if (!saw_goal)
            throw SyntaxError("problem is missing a :goal section");
        check_instance(inst, dom);
        return inst;
    }

private:
    void expect_lparen() {
        Token t = lex_.next();
        if (t.kind != Token::LParen) syntax_error(t, "'('");
    }

    void expect_rparen() {
        Token t = lex_.next();
        if (t.kind != Token::RParen) syntax_error(t, "')'");
    }

    void expect_end() {
        Token t = lex_.next();
        if (t.kind != Token::End) syntax_error(t, "end of input");
    }

    void expect_symbol(const std::string& sym) {
        Token t = lex_.next();
        if (t.kind != Token::Symbol || t.text != sym) syntax_error(t, "'" + sym + "'");
    }

    std::string name(const std::string& what) {
        Token t = lex_.next();
        if (t.kind != Token::Symbol || t.text.empty() || t.text[0] == ':' || t.text[0] == '?')
            syntax_error(t, what);
        return t.text;
    }

    void requirements(const Token& head) {
        while (lex_.peek().kind == Token::Symbol) {
            Token t = lex_.next();
            if (t.text != ":strips" && t.text != ":typing")
                throw UnsupportedFeature("unsupported requirement " + t.text, t.line, t.col);
        }
        (void)head;
        expect_rparen();
    }

    // name... [- type] repeated until ')'
    std::vector<TypedName> typed_list(const std::string& what) {
        std::vector<TypedName> out;
        std::size_t untyped_from = 0;
        while (lex_.peek().kind == Token::Symbol) {
            Token t = lex_.next();
            if (t.text == "-") {
                std::string type = name("type name");
                if (untyped_from == out.size())
                    throw SyntaxError("dangling '-' in typed list", t.line, t.col);
                for (std::size_t i = untyped_from; i < out.size(); ++i)
                    out[i].type = type;
                untyped_from = out.size();
            } else {
                if (t.text[0] == ':')
                    syntax_error(t, what);
                out.push_back({t.text, "object"});
            }
        }
        return out;
    }

    std::vector<TypedName> variable_list() {
        auto vars = typed_list("variable");
        for (const auto& v : vars) {
            if (v.name[0] != '?')
                throw SyntaxError("action parameter '" + v.name + "' must start with '?'");
        }
        return vars;
    }

    void types_section(Domain& dom) {
        auto decls = typed_list("type name");
        for (const auto& d : decls) {
            if (d.name == "object") {
                if (d.type != "object")
                    throw SemanticError("the root type 'object' cannot have a parent");
                continue;
            }
            auto it = std::find_if(dom.types.begin(), dom.types.end(),
                                   [&](const TypeDecl& t) { return t.name == d.name; });
            if (it != dom.types.end()) {
                if (it->parent != d.type)
                    throw SemanticError("type '" + d.name + "' declared with two parents");
            } else {
                dom.types.push_back({d.name, d.type});
            }
        }
        expect_rparen();
    }

    void predicates_section(Domain& dom) {
        while (lex_.peek().kind == Token::LParen) {
            expect_lparen();
            PredicateDecl p;
            p.name = name("predicate name");
            for (const auto& v : variable_list())
                p.param_types.push_back(v.type);
            expect_rparen();
            dom.predicates.push_back(std::move(p));
        }
        expect_rparen();
    }

    Atom plain_atom() {
        Token head = lex_.next();
        if (head.kind != Token::Symbol)
            syntax_error(head, "predicate name");
        if (head.text == "=" )
            throw UnsupportedFeature("equality atoms are not supported", head.line, head.col);
        if (head.text == "not" || head.text == "and" || head.text == "or" ||
            head.text == "forall" || head.text == "exists" || head.text == "when" ||
            head.text == "imply")
            throw UnsupportedFeature("unsupported construct (" + head.text + " ...)",
                                     head.line, head.col);
        Atom a;
        a.pred = head.text;
        while (lex_.peek().kind == Token::Symbol)
            a.args.push_back(lex_.next().text);
        expect_rparen();
        return a;
    }

    // () | (p ...) | (and (p ...) ...); negation and nesting rejected
    std::vector<Atom> conjunction(const std::string& where) {
        std::vector<Atom> atoms;
        expect_lparen();
        Token head = lex_.peek();
        if (head.kind == Token::RParen) {   // ()
            lex_.next();
            return atoms;
        }
        if (head.kind != Token::Symbol)
            syntax_error(head, "predicate name or 'and'");
        if (head.text == "and") {
            lex_.next();
            while (lex_.peek().kind == Token::LParen)
                atoms.push_back(plain_atom_checked(where));
            expect_rparen();
        } else {
            reject_unsupported_head(head, where);
            atoms.push_back(plain_atom());
        }
        return atoms;
    }

    Atom plain_atom_checked(const std::string& where) {
        expect_lparen();
        Token head = lex_.peek();
        if (head.kind == Token::Symbol)
            reject_unsupported_head(head, where);
        // rewind trick: plain_atom expects to consume the head itself
        Atom a;
        a.pred = name("predicate name");
        while (lex_.peek().kind == Token::Symbol)
            a.args.push_back(lex_.next().text);
        expect_rparen();
        return a;
    }

    void reject_unsupported_head(const Token& head, const std::string& where) {
        if (head.text == "not")
            throw UnsupportedFeature("negative literal in " + where +
                                     " (:negative-preconditions)", head.line, head.col);
        if (head.text == "or")
            throw UnsupportedFeature("disjunction in " + where +
                                     " (:disjunctive-preconditions)", head.line, head.col);
        if (head.text == "forall" || head.text == "exists")
            throw UnsupportedFeature("quantifier in " + where, head.line, head.col);
        if (head.text == "when")
            throw UnsupportedFeature("conditional effect in " + where, head.line, head.col);
        if (head.text == "=")
            throw UnsupportedFeature("equality atom in " + where, head.line, head.col);
    }

    ActionSchema action_section(const Domain& dom) {
        (void)dom;
        ActionSchema schema;
        schema.name = name("action name");
        while (lex_.peek().kind == Token::Symbol) {
            Token key = lex_.next();
            if (key.text == ":parameters") {
                expect_lparen();
                schema.params = variable_list();
                expect_rparen();
            } else if (key.text == ":precondition") {
                for (Atom& a : conjunction("precondition"))
                    add_unique(schema.precondition, std::move(a));
            } else if (key.text == ":effect") {
                effect(schema);
            } else {
                throw UnsupportedFeature("unsupported action field " + key.text,
                                         key.line, key.col);
            }
        }
        expect_rparen();
        return schema;
    }

    void effect(ActionSchema& schema) {
        expect_lparen();
        Token head = lex_.peek();
        if (head.kind == Token::RParen) {
            lex_.next();
            return;
        }
        if (head.kind != Token::Symbol)
            syntax_error(head, "effect");
        if (head.text == "and") {
            lex_.next();
            while (lex_.peek().kind == Token::LParen) {
                expect_lparen();
                effect_item(schema);
            }
            expect_rparen();
        } else {
            effect_item(schema);
        }
    }

    // parses one effect literal; '(' already consumed
    void effect_item(ActionSchema& schema) {
        Token head = lex_.peek();
        if (head.kind != Token::Symbol)
            syntax_error(head, "effect literal");
        if (head.text == "not") {
            lex_.next();
            add_unique(schema.del_effects, plain_atom_checked("delete effect"));
            expect_rparen();
            return;
        }
        if (head.text == "when" || head.text == "forall")
            throw UnsupportedFeature("conditional/quantified effect (" + head.text + " ...)",
                                     head.line, head.col);
        Atom a;
        a.pred = name("predicate name");
        while (lex_.peek().kind == Token::Symbol)
            a.args.push_back(lex_.next().text);
        expect_rparen();
        add_unique(schema.add_effects, std::move(a));
    }

    static void add_unique(std::vector<Atom>& set, Atom a) {
        if (std::find(set.begin(), set.end(), a) == set.end())
            set.push_back(std::move(a));
    }

    void check_domain(const Domain& dom) {
        std::unordered_set<std::string> type_names;
        for (const auto& t : dom.types) {
            if (!type_names.insert(t.name).second)
                throw SemanticError("duplicate type '" + t.name + "'");
        }
        for (const auto& t : dom.types) {
            if (t.name == "object") continue;
            if (!type_names.count(t.parent))
                throw SemanticError("type '" + t.name + "' has undeclared parent '" +
                                    t.parent + "'");
        }
        std::unordered_set<std::string> names;
        for (const auto& p : dom.predicates) {
            if (!names.insert(p.name).second)
                throw SemanticError("duplicate predicate '" + p.name + "'");
            for (const auto& ty : p.param_types)
                if (!type_names.count(ty))
                    throw SemanticError("predicate '" + p.name + "' uses undeclared type '" +
                                        ty + "'");
        }
        for (const auto& s : dom.schemas) {
            if (!names.insert(s.name).second)
                throw SemanticError("schema name '" + s.name +
                                    "' clashes with another predicate or schema");
            std::unordered_map<std::string, std::string> params;
            for (const auto& v : s.params) {
                if (!params.emplace(v.name, v.type).second)
                    throw SemanticError("duplicate parameter '" + v.name + "' in action '" +
                                        s.name + "'");
                if (!type_names.count(v.type))
                    throw SemanticError("action '" + s.name + "' uses undeclared type '" +
                                        v.type + "'");
            }
            auto check_atoms = [&](const std::vector<Atom>& atoms, const char* part) {
                for (const auto& a : atoms) {
                    const PredicateDecl* p = dom.find_predicate(a.pred);
                    if (!p)
                        throw SemanticError("action '" + s.name + "' " + part +
                                            " uses undeclared predicate '" + a.pred + "'");
                    if (p->arity() != a.args.size())
                        throw SemanticError("arity mismatch for '" + a.pred + "' in action '" +
                                            s.name + "'");
                    for (const auto& arg : a.args) {
                        if (arg.empty() || arg[0] != '?')
                            throw UnsupportedFeature("constant '" + arg +
                                                     "' in action body of '" + s.name + "'");
                        if (!params.count(arg))
                            throw SemanticError("variable '" + arg +
                                                "' not declared in action '" + s.name + "'");
                    }
                }
            };
            check_atoms(s.precondition, "precondition");
            check_atoms(s.add_effects, "effect");
            check_atoms(s.del_effects, "effect");
        }
    }

    void check_instance(const Instance& inst, const Domain& dom) {
        if (inst.domain_name != dom.name)
            throw SemanticError("problem references domain '" + inst.domain_name +
                                "' but '" + dom.name + "' is loaded");
        std::unordered_map<std::string, std::string> objects;
        for (const auto& o : inst.objects) {
            if (!objects.emplace(o.name, o.type).second)
                throw SemanticError("duplicate object '" + o.name + "'");
            if (dom.type_index(o.type) < 0)
                throw SemanticError("object '" + o.name + "' has undeclared type '" +
                                    o.type + "'");
        }
        auto check_atoms = [&](const std::vector<Atom>& atoms, const char* part) {
            for (const auto& a : atoms) {
                const PredicateDecl* p = dom.find_predicate(a.pred);
                if (!p)
                    throw SemanticError(std::string(part) + " uses undeclared predicate '" +
                                        a.pred + "'");
                if (p->arity() != a.args.size())
                    throw SemanticError("arity mismatch for '" + a.pred + "' in " + part);
                for (std::size_t i = 0; i < a.args.size(); ++i) {
                    auto it = objects.find(a.args[i]);
                    if (it == objects.end())
                        throw SemanticError(std::string(part) + " atom '" + a.pred +
                                            "' references undeclared object '" + a.args[i] + "'");
                    if (!dom.is_subtype(it->second, p->param_types[i]))
                        throw SemanticError("object '" + a.args[i] + "' of type '" +
                                            it->second + "' is not a '" + p->param_types[i] +
                                            "' (argument " + std::to_string(i + 1) + " of '" +
                                            a.pred + "')");
                }
            }
        };
        check_atoms(inst.init, "init");
        check_atoms(inst.goal, "goal");
    }

    Lexer lex_;
};

void print_atom(std::ostringstream& out, const Atom& a) {
    out << '(' << a.pred;
    for (const auto& arg : a.args) out << ' ' << arg;
    out << ')';
}

} // namespace

const PredicateDecl* Domain::find_predicate(std::string_view pname) const {
    for (const auto& p : predicates)
        if (p.name == pname) return &p;
    return nullptr;
}

int Domain::type_index(std::string_view tname) const {
    for (std::size_t i = 0; i < types.size(); ++i)
        if (types[i].name == tname) return static_cast<int>(i);
    return -1;
}

bool Domain::is_subtype(std::string_view sub, std::string_view super) const {
    std::string cur(sub);
    while (true) {
        if (cur == super) return true;
        int idx = type_index(cur);
        if (idx < 0 || types[static_cast<std::size_t>(idx)].parent.empty()) return false;
        cur = types[static_cast<std::size_t>(idx)].parent;
    }
}

Domain parse_domain(std::string_view text) {
    return Parser(text).domain();
}

Instance parse_instance(std::string_view text, const Domain& dom) {
    return Parser(text).instance(dom);
}

std::string to_pddl(const Domain& dom) {
    std::ostringstream out;
    out << "(define (domain " << dom.name << ")\n";
    out << "  (:requirements :strips :typing)\n";
    if (dom.types.size() > 1) {
        out << "  (:types";
        for (const auto& t : dom.types)
            if (t.name != "object") out << ' ' << t.name << " - " << t.parent;
        out << ")\n";
    }
    out << "  (:predicates";
    for (const auto& p : dom.predicates) {
        out << "\n    (" << p.name;
        for (std::size_t i = 0; i < p.param_types.size(); ++i)
            out << " ?x" << i << " - " << p.param_types[i];
        out << ')';
    }
    out << ")\n";
    for (const auto& s : dom.schemas) {
        out << "  (:action " << s.name << "\n    :parameters (";
        for (std::size_t i = 0; i < s.params.size(); ++i) {
            if (i) out << ' ';
            out << s.params[i].name << " - " << s.params[i].type;
        }
        out << ")\n    :precondition (and";
        for (const auto& a : s.precondition) {
            out << ' ';
            print_atom(out, a);
        }
        out << ")\n    :effect (and";
        for (const auto& a : s.add_effects) {
            out << ' ';
            print_atom(out, a);
        }
        for (const auto& a : s.del_effects) {
            out << " (not ";
            print_atom(out, a);
            out << ')';
        }
        out << "))\n";
    }
    out << ")\n";
    return out.str();
}

std::string to_pddl(const Instance& inst, const Domain& dom) {
    std::ostringstream out;
    out << "(define (problem " << inst.name << ")\n";
    out << "  (:domain " << dom.name << ")\n";
    out << "  (:objects";
    for (const auto& o : inst.objects) out << ' ' << o.name << " - " << o.type;
    out << ")\n  (:init";
    for (const auto& a : inst.init) {
        out << ' ';
        print_atom(out, a);
    }
    out << ")\n  (:goal (and";
    for (const auto& a : inst.goal) {
        out << ' ';
        print_atom(out, a);
    }
    out << ")))\n";
    return out.str();
}

} // namespace gsp::pddl

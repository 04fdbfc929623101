#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gsp::pddl {

// Supported subset: :strips + :typing. Conjunctive positive preconditions
// and goals, add/delete effects, typed objects. Everything else is rejected
// up front with UnsupportedFeature.

struct ParseError : std::runtime_error {
    int line = 0;
    int col = 0;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
          line(line_), col(col_) {}
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SyntaxError : ParseError {
    using ParseError::ParseError;
};

struct UnsupportedFeature : ParseError {
    using ParseError::ParseError;
};

struct SemanticError : ParseError {
    using ParseError::ParseError;
};

struct PredicateDecl {
    std::string name;
    std::vector<std::string> param_types;   // arity == param_types.size()

    std::size_t arity() const { return param_types.size(); }
    bool operator==(const PredicateDecl&) const = default;
};

// Atom over variables (schema bodies) or objects (init/goal).
struct Atom {
    std::string pred;
    std::vector<std::string> args;

    bool operator==(const Atom&) const = default;
};

struct TypedName {
    std::string name;
    std::string type;   // "object" when unspecified

    bool operator==(const TypedName&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> params;
    std::vector<Atom> precondition;
    std::vector<Atom> add_effects;
    std::vector<Atom> del_effects;

    bool operator==(const ActionSchema&) const = default;
};

struct TypeDecl {
    std::string name;
    std::string parent; // "" only for the root "object"

    bool operator==(const TypeDecl&) const = default;
};

struct Domain {
    std::string name;
    std::vector<TypeDecl> types;            // always starts with the root "object"
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> schemas;

    const PredicateDecl* find_predicate(std::string_view name) const;
    int type_index(std::string_view name) const;   // -1 when unknown
    // true when `sub` equals `super` or is a descendant of it
    bool is_subtype(std::string_view sub, std::string_view super) const;

    bool operator==(const Domain&) const = default;
};

struct Instance {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;
    std::vector<Atom> init;     // set semantics, first-occurrence order
    std::vector<Atom> goal;

    bool operator==(const Instance&) const = default;
};

Domain parse_domain(std::string_view text);
Instance parse_instance(std::string_view text, const Domain& dom);

// Canonical pretty-printers; re-parsing the output yields an equal value.
std::string to_pddl(const Domain& dom);
std::string to_pddl(const Instance& inst, const Domain& dom);

} // namespace gsp::pddl

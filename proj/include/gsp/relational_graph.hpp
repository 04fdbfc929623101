#pragma once

#include "gsp/grounding.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gsp::graph {

using RelationId = std::uint32_t;
using NodeId = std::uint32_t;

enum class RelationKind : std::uint8_t { state = 0, goal = 1, action = 2 };

enum class GoalMode : std::uint8_t {
    distinguished = 0,  // goal atoms under per-predicate "<p>_goal" relations
    literal = 1,        // s ∪ g emitted as written
};

struct Relation {
    std::string name;
    std::uint32_t arity;
    RelationKind kind;

    bool operator==(const Relation&) const = default;
};

// Fixed relation vocabulary of a domain: state relation per predicate, goal
// relation per predicate, action relation per schema (arity 1 + schema arity,
// action object at position 0). Relation ids are dense in that order, so
// they are stable across instances of the domain.
struct RelationSignature {
    std::vector<Relation> relations;

    static RelationSignature from_domain(const pddl::Domain& dom);

    RelationId state_relation(ground::PredicateId p) const { return p; }
    RelationId goal_relation(ground::PredicateId p) const {
        return static_cast<RelationId>(num_predicates + p);
    }
    RelationId action_relation(ground::SchemaId s) const {
        return static_cast<RelationId>(2 * num_predicates + s);
    }

    std::size_t size() const { return relations.size(); }
    std::uint32_t num_predicates = 0;
    std::uint32_t num_schemas = 0;

    bool operator==(const RelationSignature&) const = default;
};

struct GraphAtom {
    RelationId rel;
    std::vector<NodeId> args;

    bool operator==(const GraphAtom&) const = default;
};

// Input structure for the value network: object nodes 0..num_objects-1 in
// task object order, then one action-object node per applicable action.
struct RelationalGraph {
    std::uint32_t num_objects = 0;
    std::vector<ground::ActionId> action_nodes;   // ground action per action node
    std::vector<GraphAtom> atoms;

    std::uint32_t num_nodes() const {
        return num_objects + static_cast<std::uint32_t>(action_nodes.size());
    }
    NodeId action_node(std::size_t k) const {
        return num_objects + static_cast<NodeId>(k);
    }
};

RelationalGraph encode(const ground::GroundTask& task, const ground::State& s,
                       std::span<const ground::ActionId> applicable,
                       const RelationSignature& sig,
                       GoalMode mode = GoalMode::distinguished);

// One atom per line, `relation(node,...)`; object nodes print their name,
// action nodes print as oa<k>.
std::string dump(const RelationalGraph& g, const ground::GroundTask& task,
                 const RelationSignature& sig);

} // namespace gsp::graph

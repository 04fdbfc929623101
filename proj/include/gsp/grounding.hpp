#pragma once

#include "gsp/pddl.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsp::ground {

using PredicateId = std::uint32_t;
using SchemaId = std::uint32_t;
using ObjectId = std::uint32_t;
using AtomId = std::uint32_t;
using ActionId = std::uint32_t;

struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotApplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GroundAtom {
    PredicateId pred;
    std::vector<ObjectId> args;
};

struct GroundAction {
    SchemaId schema;
    std::vector<ObjectId> args;
    std::vector<AtomId> pre;    // sorted
    std::vector<AtomId> add;    // sorted
    std::vector<AtomId> del;    // sorted, disjoint from add (delete-then-add)
};

// Set of true atom ids, strictly increasing, with a cached FNV-1a hash.
class State {
public:
    State() = default;
    explicit State(std::vector<AtomId> sorted_atoms);
    static State from_unsorted(std::vector<AtomId> atoms);

    const std::vector<AtomId>& atoms() const { return atoms_; }
    std::uint64_t hash() const { return hash_; }
    std::size_t size() const { return atoms_.size(); }
    bool contains(AtomId a) const;
    bool contains_all(std::span<const AtomId> sorted_ids) const;

    bool operator==(const State& o) const { return hash_ == o.hash_ && atoms_ == o.atoms_; }

private:
    std::vector<AtomId> atoms_;
    std::uint64_t hash_ = 0;
};

struct StateHash {
    std::size_t operator()(const State& s) const { return static_cast<std::size_t>(s.hash()); }
};

struct GroundOptions {
    std::uint64_t max_actions = 10'000'000;
};

struct GroundTask {
    std::string domain_name;
    std::string instance_name;

    std::vector<std::string> object_names;
    std::vector<std::string> object_types;
    std::vector<std::string> predicate_names;   // indexed by PredicateId
    std::vector<std::string> schema_names;      // indexed by SchemaId
    std::vector<std::uint32_t> schema_arities;

    std::vector<GroundAtom> atoms;      // AtomId = index
    std::vector<GroundAction> actions;  // ActionId = index
    State init;
    std::vector<AtomId> goal;           // sorted

    // per-atom indices
    std::vector<std::vector<ActionId>> achievers;   // atom -> actions adding it
    std::vector<std::vector<ActionId>> consumers;   // atom -> actions requiring it
    std::vector<ActionId> no_precondition_actions;  // always applicable

    std::string atom_name(AtomId a) const;
    std::string action_name(ActionId a) const;
};

GroundTask ground(const pddl::Domain& dom, const pddl::Instance& inst,
                  const GroundOptions& opts = {});

// Actions a with pre(a) ⊆ s, ascending action id.
std::vector<ActionId> applicable_actions(const GroundTask& task, const State& s);

// s' = (s \ del(a)) ∪ add(a); throws NotApplicable when pre(a) ⊄ s.
State apply(const GroundTask& task, const State& s, ActionId a);

bool is_goal(const GroundTask& task, const State& s);

} // namespace gsp::ground

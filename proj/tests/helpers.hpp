#pragma once

#include "gsp/generators.hpp"
#include "gsp/grounding.hpp"
#include "gsp/pddl.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace testutil {

inline gsp::pddl::Domain blocksworld_domain() {
    return gsp::pddl::parse_domain(gsp::gen::domain_text("blocksworld"));
}

// the 3-block single-tower instance: b3 on b2 on b1, goal on(b1,b2)
inline gsp::pddl::Instance three_block_instance(const gsp::pddl::Domain& dom) {
    const char* text = R"(
(define (problem tower3)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on b3 b2) (on b2 b1) (clear b3) (ontable b1))
  (:goal (on b1 b2)))
)";
    return gsp::pddl::parse_instance(text, dom);
}

inline gsp::ground::GroundTask three_block_task() {
    auto dom = blocksworld_domain();
    return gsp::ground::ground(dom, three_block_instance(dom));
}

inline gsp::ground::ActionId find_action(const gsp::ground::GroundTask& task,
                                         const std::string& name) {
    for (gsp::ground::ActionId a = 0; a < task.actions.size(); ++a)
        if (task.action_name(a) == name) return a;
    throw std::runtime_error("no action named " + name);
}

inline gsp::ground::AtomId find_atom(const gsp::ground::GroundTask& task,
                                     const std::string& name) {
    for (gsp::ground::AtomId a = 0; a < task.atoms.size(); ++a)
        if (task.atom_name(a) == name) return a;
    throw std::runtime_error("no atom named " + name);
}

inline gsp::ground::State state_of(const gsp::ground::GroundTask& task,
                                   const std::vector<std::string>& atoms) {
    std::vector<gsp::ground::AtomId> ids;
    for (const auto& a : atoms) ids.push_back(find_atom(task, a));
    return gsp::ground::State::from_unsorted(std::move(ids));
}

// Synthetic single-token chain/graph task: atom p<i> marks "at node i";
// edges become move actions. Used by search and learning tests.
struct GraphTaskBuilder {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;
    int init_node = 0;
    std::vector<int> goal_nodes;

    std::shared_ptr<const gsp::ground::GroundTask> build() const {
        auto task = std::make_shared<gsp::ground::GroundTask>();
        task->domain_name = "chain";
        task->instance_name = "chain";
        for (int i = 0; i < nodes; ++i) {
            task->predicate_names.push_back("p" + std::to_string(i));
            task->atoms.push_back({static_cast<gsp::ground::PredicateId>(i), {}});
        }
        task->schema_names.push_back("mv");
        task->schema_arities.push_back(0);
        for (auto [from, to] : edges) {
            gsp::ground::GroundAction act;
            act.schema = 0;
            act.pre = {static_cast<gsp::ground::AtomId>(from)};
            act.add = {static_cast<gsp::ground::AtomId>(to)};
            act.del = {static_cast<gsp::ground::AtomId>(from)};
            task->actions.push_back(std::move(act));
        }
        task->init = gsp::ground::State({static_cast<gsp::ground::AtomId>(init_node)});
        for (int gnode : goal_nodes)
            task->goal.push_back(static_cast<gsp::ground::AtomId>(gnode));
        std::sort(task->goal.begin(), task->goal.end());
        task->achievers.resize(task->atoms.size());
        task->consumers.resize(task->atoms.size());
        for (gsp::ground::ActionId a = 0; a < task->actions.size(); ++a) {
            for (auto p : task->actions[a].pre) task->consumers[p].push_back(a);
            for (auto p : task->actions[a].add) task->achievers[p].push_back(a);
            if (task->actions[a].pre.empty()) task->no_precondition_actions.push_back(a);
        }
        return task;
    }
};

inline gsp::ground::State node_state(int node) {
    return gsp::ground::State({static_cast<gsp::ground::AtomId>(node)});
}

} // namespace testutil

#include "gsp/relational_graph.hpp"

#include "gsp/rng.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace gsp;
using graph::GoalMode;

namespace {

// canonical multiset of atoms under a node relabeling
std::multiset<std::string> canonical(const graph::RelationalGraph& g,
                                     const std::vector<graph::NodeId>& relabel) {
    std::multiset<std::string> out;
    for (const auto& a : g.atoms) {
        std::string s = std::to_string(a.rel) + ":";
        for (auto n : a.args) s += std::to_string(relabel[n]) + ",";
        out.insert(s);
    }
    return out;
}

} // namespace

TEST_CASE("literal mode on the 3-block example: 4 nodes, 6 atoms") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto applicable = ground::applicable_actions(task, task.init);
    REQUIRE(applicable.size() == 1);   // only unstack(b3,b2)

    auto g = graph::encode(task, task.init, applicable, sig, GoalMode::literal);
    CHECK(g.num_nodes() == 4);         // 3 objects + 1 action object
    CHECK(g.atoms.size() == 6);        // |s ∪ g| = 5 state/goal atoms + 1 action atom
    CHECK(g.action_nodes.size() == 1);
}

TEST_CASE("distinguished mode separates goal atoms by relation") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto applicable = ground::applicable_actions(task, task.init);

    auto g = graph::encode(task, task.init, applicable, sig, GoalMode::distinguished);
    // 4 state atoms + 1 goal atom + 1 action atom
    CHECK(g.atoms.size() == 6);
    std::size_t goal_atoms = 0;
    for (const auto& a : g.atoms)
        if (sig.relations[a.rel].kind == graph::RelationKind::goal) ++goal_atoms;
    CHECK(goal_atoms == 1);

    // an achieved goal atom shows up under both the state and goal relation
    auto satisfied = testutil::state_of(task, {"on(b1,b2)", "ontable(b2)", "clear(b1)",
                                               "ontable(b3)", "clear(b3)"});
    auto g2 = graph::encode(task, satisfied, {}, sig, GoalMode::distinguished);
    std::size_t on_state = 0, on_goal = 0;
    for (const auto& a : g2.atoms) {
        if (sig.relations[a.rel].name == "on") ++on_state;
        if (sig.relations[a.rel].name == "on_goal") ++on_goal;
    }
    CHECK(on_state == 1);
    CHECK(on_goal == 1);
    // literal mode collapses it into the union
    auto g3 = graph::encode(task, satisfied, {}, sig, GoalMode::literal);
    CHECK(g3.atoms.size() == satisfied.size());
}

TEST_CASE("empty applicable list leaves only object nodes and state/goal atoms") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto g = graph::encode(task, task.init, {}, sig, GoalMode::literal);
    CHECK(g.num_nodes() == 3);
    CHECK(g.action_nodes.empty());
    CHECK(g.atoms.size() == 5);
}

TEST_CASE("action-object bookkeeping: one node per applicable action, arity 1+schema") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto mid = ground::apply(task, task.init,
                             testutil::find_action(task, "unstack(b3,b2)"));
    auto applicable = ground::applicable_actions(task, mid);
    REQUIRE(applicable.size() > 1);
    auto g = graph::encode(task, mid, applicable, sig, GoalMode::distinguished);
    CHECK(g.action_nodes.size() == applicable.size());
    std::set<ground::ActionId> distinct(g.action_nodes.begin(), g.action_nodes.end());
    CHECK(distinct.size() == applicable.size());

    // each action node appears in exactly one action atom, at position 0
    std::map<graph::NodeId, int> hits;
    for (const auto& a : g.atoms) {
        if (sig.relations[a.rel].kind != graph::RelationKind::action) continue;
        CHECK(a.args.size() == sig.relations[a.rel].arity);
        CHECK(a.args[0] >= g.num_objects);
        ++hits[a.args[0]];
        const auto& act = task.actions[g.action_nodes[a.args[0] - g.num_objects]];
        CHECK(sig.relations[a.rel].name == task.schema_names[act.schema]);
        CHECK(a.args.size() == act.args.size() + 1);
    }
    for (std::size_t k = 0; k < g.action_nodes.size(); ++k)
        CHECK(hits[g.action_node(k)] == 1);
}

TEST_CASE("literal mode relation multiset equals state/goal predicates plus schemas") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto applicable = ground::applicable_actions(task, task.init);
    auto g = graph::encode(task, task.init, applicable, sig, GoalMode::literal);

    std::multiset<std::string> got, expect;
    for (const auto& a : g.atoms) got.insert(sig.relations[a.rel].name);
    std::vector<ground::AtomId> uni;
    std::set_union(task.init.atoms().begin(), task.init.atoms().end(), task.goal.begin(),
                   task.goal.end(), std::back_inserter(uni));
    for (auto id : uni) expect.insert(task.predicate_names[task.atoms[id].pred]);
    for (auto a : applicable) expect.insert(task.schema_names[task.actions[a].schema]);
    CHECK(got == expect);
}

TEST_CASE("object renaming yields an isomorphic graph") {
    auto dom = testutil::blocksworld_domain();
    // same structure, objects listed in a different order
    auto inst1 = pddl::parse_instance(R"(
        (define (problem p) (:domain blocksworld) (:objects b1 b2 b3 - block)
          (:init (on b3 b2) (on b2 b1) (clear b3) (ontable b1)) (:goal (on b1 b2))))",
                                      dom);
    auto inst2 = pddl::parse_instance(R"(
        (define (problem p) (:domain blocksworld) (:objects b3 b1 b2 - block)
          (:init (on b3 b2) (on b2 b1) (clear b3) (ontable b1)) (:goal (on b1 b2))))",
                                      dom);
    auto t1 = ground::ground(dom, inst1);
    auto t2 = ground::ground(dom, inst2);
    auto sig = graph::RelationSignature::from_domain(dom);

    auto a1 = ground::applicable_actions(t1, t1.init);
    auto a2 = ground::applicable_actions(t2, t2.init);
    auto g1 = graph::encode(t1, t1.init, a1, sig, GoalMode::literal);
    auto g2 = graph::encode(t2, t2.init, a2, sig, GoalMode::literal);
    REQUIRE(g1.num_nodes() == g2.num_nodes());

    // relabel graph-2 nodes by object name; action nodes map by action name
    std::vector<graph::NodeId> identity(g1.num_nodes());
    for (graph::NodeId n = 0; n < g1.num_nodes(); ++n) identity[n] = n;
    std::vector<graph::NodeId> relabel(g2.num_nodes());
    for (graph::NodeId n = 0; n < g2.num_objects; ++n) {
        auto it = std::find(t1.object_names.begin(), t1.object_names.end(),
                            t2.object_names[n]);
        relabel[n] = static_cast<graph::NodeId>(it - t1.object_names.begin());
    }
    for (std::size_t k = 0; k < g2.action_nodes.size(); ++k) {
        auto name = t2.action_name(g2.action_nodes[k]);
        for (std::size_t j = 0; j < g1.action_nodes.size(); ++j)
            if (t1.action_name(g1.action_nodes[j]) == name)
                relabel[g2.action_node(k)] = g1.action_node(j);
    }
    CHECK(canonical(g1, identity) == canonical(g2, relabel));
}

TEST_CASE("encoding is deterministic") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto applicable = ground::applicable_actions(task, task.init);
    auto g1 = graph::encode(task, task.init, applicable, sig);
    auto g2 = graph::encode(task, task.init, applicable, sig);
    CHECK(g1.atoms == g2.atoms);
    CHECK(g1.action_nodes == g2.action_nodes);
}

TEST_CASE("debug dump golden") {
    auto task = testutil::three_block_task();
    auto dom = testutil::blocksworld_domain();
    auto sig = graph::RelationSignature::from_domain(dom);
    auto applicable = ground::applicable_actions(task, task.init);
    auto g = graph::encode(task, task.init, applicable, sig, GoalMode::distinguished);
    CHECK(graph::dump(g, task, sig) ==
          "on(b2,b1)\n"
          "on(b3,b2)\n"
          "ontable(b1)\n"
          "clear(b3)\n"
          "on_goal(b1,b2)\n"
          "unstack(oa0,b3,b2)\n");
}

TEST_CASE("signature covers every relation an encoding can produce") {
    for (const auto& name : gsp::gen::domain_names()) {
        auto dom = pddl::parse_domain(gsp::gen::domain_text(name));
        auto sig = graph::RelationSignature::from_domain(dom);
        CHECK(sig.size() == 2 * dom.predicates.size() + dom.schemas.size());
        for (std::size_t p = 0; p < dom.predicates.size(); ++p) {
            CHECK(sig.relations[sig.state_relation(static_cast<ground::PredicateId>(p))].arity ==
                  dom.predicates[p].arity());
            CHECK(sig.relations[sig.goal_relation(static_cast<ground::PredicateId>(p))].name ==
                  dom.predicates[p].name + "_goal");
        }
        for (std::size_t s = 0; s < dom.schemas.size(); ++s)
            CHECK(sig.relations[sig.action_relation(static_cast<ground::SchemaId>(s))].arity ==
                  dom.schemas[s].params.size() + 1);
    }
}

#include "gsp/relational_graph.hpp"

#include <algorithm>
#include <sstream>

namespace gsp::graph {

RelationSignature RelationSignature::from_domain(const pddl::Domain& dom) {
    RelationSignature sig;
    sig.num_predicates = static_cast<std::uint32_t>(dom.predicates.size());
    sig.num_schemas = static_cast<std::uint32_t>(dom.schemas.size());
    for (const auto& p : dom.predicates)
        sig.relations.push_back({p.name, static_cast<std::uint32_t>(p.arity()),
                                 RelationKind::state});
    for (const auto& p : dom.predicates)
        sig.relations.push_back({p.name + "_goal", static_cast<std::uint32_t>(p.arity()),
                                 RelationKind::goal});
    for (const auto& s : dom.schemas)
        sig.relations.push_back({s.name, static_cast<std::uint32_t>(s.params.size() + 1),
                                 RelationKind::action});
    return sig;
}

namespace {

GraphAtom make_atom(const ground::GroundTask& task, ground::AtomId id, RelationId rel) {
    const auto& a = task.atoms[id];
    GraphAtom out;
    out.rel = rel;
    out.args.assign(a.args.begin(), a.args.end());
    return out;
}

} // namespace

RelationalGraph encode(const ground::GroundTask& task, const ground::State& s,
                       std::span<const ground::ActionId> applicable,
                       const RelationSignature& sig, GoalMode mode) {
    RelationalGraph g;
    g.num_objects = static_cast<std::uint32_t>(task.object_names.size());
    g.action_nodes.assign(applicable.begin(), applicable.end());

    if (mode == GoalMode::literal) {
        // s ∪ g as written, one atom per element of the union
        std::vector<ground::AtomId> uni;
        std::set_union(s.atoms().begin(), s.atoms().end(), task.goal.begin(),
                       task.goal.end(), std::back_inserter(uni));
        for (ground::AtomId id : uni)
            g.atoms.push_back(make_atom(task, id, sig.state_relation(task.atoms[id].pred)));
    } else {
        for (ground::AtomId id : s.atoms())
            g.atoms.push_back(make_atom(task, id, sig.state_relation(task.atoms[id].pred)));
        for (ground::AtomId id : task.goal)
            g.atoms.push_back(make_atom(task, id, sig.goal_relation(task.atoms[id].pred)));
    }

    for (std::size_t k = 0; k < g.action_nodes.size(); ++k) {
        const auto& act = task.actions[g.action_nodes[k]];
        GraphAtom atom;
        atom.rel = sig.action_relation(act.schema);
        atom.args.push_back(g.action_node(k));
        atom.args.insert(atom.args.end(), act.args.begin(), act.args.end());
        g.atoms.push_back(std::move(atom));
    }
    return g;
}

std::string dump(const RelationalGraph& g, const ground::GroundTask& task,
                 const RelationSignature& sig) {
    std::ostringstream out;
    for (const auto& atom : g.atoms) {
        out << sig.relations[atom.rel].name << '(';
        for (std::size_t i = 0; i < atom.args.size(); ++i) {
            if (i) out << ',';
            NodeId n = atom.args[i];
            if (n < g.num_objects)
                out << task.object_names[n];
            else
                out << "oa" << (n - g.num_objects);
        }
        out << ")\n";
    }
    return out.str();
}

} // namespace gsp::graph

#include "gsp/grounding.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_map>

namespace gsp::ground {

namespace {

std::uint64_t fnv1a(const std::vector<AtomId>& ids) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (AtomId id : ids) {
        for (int shift = 0; shift < 32; shift += 8) {
            h ^= (id >> shift) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

} // namespace

State::State(std::vector<AtomId> sorted_atoms) : atoms_(std::move(sorted_atoms)) {
    assert(std::is_sorted(atoms_.begin(), atoms_.end()));
    assert(std::adjacent_find(atoms_.begin(), atoms_.end()) == atoms_.end());
    hash_ = fnv1a(atoms_);
}

State State::from_unsorted(std::vector<AtomId> atoms) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return State(std::move(atoms));
}

bool State::contains(AtomId a) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

bool State::contains_all(std::span<const AtomId> sorted_ids) const {
    return std::includes(atoms_.begin(), atoms_.end(), sorted_ids.begin(), sorted_ids.end());
}

std::string GroundTask::atom_name(AtomId a) const {
    const GroundAtom& atom = atoms[a];
    std::ostringstream out;
    out << predicate_names[atom.pred] << '(';
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out << ',';
        out << object_names[atom.args[i]];
    }
    out << ')';
    return out.str();
}

std::string GroundTask::action_name(ActionId a) const {
    const GroundAction& act = actions[a];
    std::ostringstream out;
    out << schema_names[act.schema] << '(';
    for (std::size_t i = 0; i < act.args.size(); ++i) {
        if (i) out << ',';
        out << object_names[act.args[i]];
    }
    out << ')';
    return out.str();
}

namespace {

struct Grounder {
    const pddl::Domain& dom;
    const pddl::Instance& inst;
    const GroundOptions& opts;
    GroundTask task;

    std::unordered_map<std::string, ObjectId> object_ids;
    std::unordered_map<std::string, PredicateId> predicate_ids;
    // atom key: pred id + args, packed into a string of ids
    std::unordered_map<std::string, AtomId> atom_ids;
    // objects compatible with each domain type, in object-id order
    std::unordered_map<std::string, std::vector<ObjectId>> objects_by_type;

    AtomId atom_id(PredicateId p, const std::vector<ObjectId>& args) {
        std::string key;
        key.reserve(4 + args.size() * 4);
        auto append = [&key](std::uint32_t v) {
            key.append(reinterpret_cast<const char*>(&v), 4);
        };
        append(p);
        for (ObjectId o : args) append(o);
        auto [it, inserted] = atom_ids.emplace(std::move(key),
                                               static_cast<AtomId>(task.atoms.size()));
        if (inserted) task.atoms.push_back({p, args});
        return it->second;
    }

    void run() {
        task.domain_name = dom.name;
        task.instance_name = inst.name;
        for (const auto& o : inst.objects) {
            object_ids[o.name] = static_cast<ObjectId>(task.object_names.size());
            task.object_names.push_back(o.name);
            task.object_types.push_back(o.type);
        }
        for (const auto& p : dom.predicates) {
            predicate_ids[p.name] = static_cast<PredicateId>(task.predicate_names.size());
            task.predicate_names.push_back(p.name);
        }
        for (const auto& t : dom.types) {
            auto& bucket = objects_by_type[t.name];
            for (ObjectId o = 0; o < task.object_names.size(); ++o)
                if (dom.is_subtype(task.object_types[o], t.name)) bucket.push_back(o);
        }

        // atom universe: every type-consistent instantiation of every
        // predicate, ordered by (predicate, lexicographic argument tuple)
        for (const auto& p : dom.predicates) {
            std::vector<ObjectId> args(p.arity());
            enumerate_atoms(p, 0, args);
        }

        for (const auto& s : dom.schemas) {
            task.schema_names.push_back(s.name);
            task.schema_arities.push_back(static_cast<std::uint32_t>(s.params.size()));
        }
        for (SchemaId sid = 0; sid < dom.schemas.size(); ++sid) {
            const auto& schema = dom.schemas[sid];
            std::vector<ObjectId> binding(schema.params.size());
            std::vector<bool> used(task.object_names.size(), false);
            enumerate_actions(schema, sid, 0, binding, used);
        }

        std::vector<AtomId> init_ids;
        for (const auto& a : inst.init) init_ids.push_back(atom_of(a));
        task.init = State::from_unsorted(std::move(init_ids));
        for (const auto& a : inst.goal) task.goal.push_back(atom_of(a));
        std::sort(task.goal.begin(), task.goal.end());
        task.goal.erase(std::unique(task.goal.begin(), task.goal.end()), task.goal.end());

        task.achievers.resize(task.atoms.size());
        task.consumers.resize(task.atoms.size());
        for (ActionId aid = 0; aid < task.actions.size(); ++aid) {
            const auto& act = task.actions[aid];
            if (act.pre.empty()) task.no_precondition_actions.push_back(aid);
            for (AtomId p : act.pre) task.consumers[p].push_back(aid);
            for (AtomId p : act.add) task.achievers[p].push_back(aid);
        }
    }

    AtomId atom_of(const pddl::Atom& a) {
        PredicateId pid = predicate_ids.at(a.pred);
        std::vector<ObjectId> args;
        for (const auto& arg : a.args) args.push_back(object_ids.at(arg));
        return atom_id(pid, args);
    }

    void enumerate_atoms(const pddl::PredicateDecl& p, std::size_t pos,
                         std::vector<ObjectId>& args) {
        if (pos == p.arity()) {
            atom_id(predicate_ids.at(p.name), args);
            return;
        }
        for (ObjectId o : objects_by_type.at(p.param_types[pos])) {
            args[pos] = o;
            enumerate_atoms(p, pos + 1, args);
        }
    }

    // Bindings are type-consistent and pairwise distinct across parameters.
    void enumerate_actions(const pddl::ActionSchema& schema, SchemaId sid, std::size_t pos,
                           std::vector<ObjectId>& binding, std::vector<bool>& used) {
        if (pos == schema.params.size()) {
            emit_action(schema, sid, binding);
            return;
        }
        for (ObjectId o : objects_by_type.at(schema.params[pos].type)) {
            if (used[o]) continue;
            used[o] = true;
            binding[pos] = o;
            enumerate_actions(schema, sid, pos + 1, binding, used);
            used[o] = false;
        }
    }

    void emit_action(const pddl::ActionSchema& schema, SchemaId sid,
                     const std::vector<ObjectId>& binding) {
        if (task.actions.size() >= opts.max_actions)
            throw CapacityExceeded("ground action universe exceeds " +
                                   std::to_string(opts.max_actions));
        std::unordered_map<std::string, ObjectId> subst;
        for (std::size_t i = 0; i < schema.params.size(); ++i)
            subst[schema.params[i].name] = binding[i];

        auto instantiate = [&](const std::vector<pddl::Atom>& atoms) {
            std::vector<AtomId> out;
            for (const auto& a : atoms) {
                std::vector<ObjectId> args;
                for (const auto& arg : a.args) args.push_back(subst.at(arg));
                out.push_back(atom_id(predicate_ids.at(a.pred), args));
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };

        GroundAction act;
        act.schema = sid;
        act.args = binding;
        act.pre = instantiate(schema.precondition);
        act.add = instantiate(schema.add_effects);
        act.del = instantiate(schema.del_effects);
        // delete-then-add: an atom both deleted and added ends up true,
        // so it is dropped from del
        std::vector<AtomId> del;
        std::set_difference(act.del.begin(), act.del.end(), act.add.begin(), act.add.end(),
                            std::back_inserter(del));
        act.del = std::move(del);
        task.actions.push_back(std::move(act));
    }
};

} // namespace

GroundTask ground(const pddl::Domain& dom, const pddl::Instance& inst,
                  const GroundOptions& opts) {
    Grounder g{dom, inst, opts, {}};
    g.run();
    return std::move(g.task);
}

std::vector<ActionId> applicable_actions(const GroundTask& task, const State& s) {
    std::vector<std::uint32_t> hits(task.actions.size(), 0);
    std::vector<ActionId> out;
    for (AtomId p : s.atoms())
        for (ActionId a : task.consumers[p])
            ++hits[a];
    for (ActionId a = 0; a < task.actions.size(); ++a)
        if (!task.actions[a].pre.empty() && hits[a] == task.actions[a].pre.size())
            out.push_back(a);
    if (!task.no_precondition_actions.empty()) {
        out.insert(out.end(), task.no_precondition_actions.begin(),
                   task.no_precondition_actions.end());
        std::sort(out.begin(), out.end());
    }
    return out;
}

State apply(const GroundTask& task, const State& s, ActionId a) {
    const GroundAction& act = task.actions[a];
    if (!s.contains_all(act.pre))
        throw NotApplicable("action " + task.action_name(a) + " is not applicable");
    std::vector<AtomId> next;
    next.reserve(s.size() + act.add.size());
    std::set_difference(s.atoms().begin(), s.atoms().end(), act.del.begin(), act.del.end(),
                        std::back_inserter(next));
    std::vector<AtomId> merged;
    merged.reserve(next.size() + act.add.size());
    std::set_union(next.begin(), next.end(), act.add.begin(), act.add.end(),
                   std::back_inserter(merged));
    return State(std::move(merged));
}

bool is_goal(const GroundTask& task, const State& s) {
    return s.contains_all(task.goal);
}

} // namespace gsp::ground

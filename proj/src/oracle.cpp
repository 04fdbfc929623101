#include "gsp/oracle.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace gsp::oracle {

StateSpace enumerate_states(const ground::GroundTask& task, std::size_t max_states) {
    StateSpace space;
    space.states.push_back(task.init);
    space.index.emplace(task.init, 0);
    space.successors.emplace_back();

    std::deque<std::uint32_t> open{0};
    while (!open.empty()) {
        std::uint32_t cur = open.front();
        open.pop_front();
        ground::State s = space.states[cur];   // copy: states vector may grow
        for (ground::ActionId a : ground::applicable_actions(task, s)) {
            ground::State next = ground::apply(task, s, a);
            auto it = space.index.find(next);
            std::uint32_t nid;
            if (it == space.index.end()) {
                if (space.states.size() >= max_states) {
                    space.complete = false;
                    continue;
                }
                nid = static_cast<std::uint32_t>(space.states.size());
                space.states.push_back(next);
                space.index.emplace(std::move(next), nid);
                space.successors.emplace_back();
                open.push_back(nid);
            } else {
                nid = it->second;
            }
            space.successors[cur].push_back({a, nid});
        }
    }
    return space;
}

std::vector<double> optimal_costs(const ground::GroundTask& task, const StateSpace& space) {
    if (!space.complete)
        throw std::invalid_argument("optimal_costs needs a complete state space");
    std::vector<std::vector<std::uint32_t>> preds(space.states.size());
    for (std::uint32_t s = 0; s < space.states.size(); ++s)
        for (const auto& tr : space.successors[s])
            preds[tr.next].push_back(s);

    std::vector<double> cost(space.states.size(), kInfiniteCost);
    std::deque<std::uint32_t> open;
    for (std::uint32_t s = 0; s < space.states.size(); ++s) {
        if (ground::is_goal(task, space.states[s])) {
            cost[s] = 0.0;
            open.push_back(s);
        }
    }
    while (!open.empty()) {
        std::uint32_t cur = open.front();
        open.pop_front();
        for (std::uint32_t p : preds[cur]) {
            if (cost[p] == kInfiniteCost) {
                cost[p] = cost[cur] + 1.0;
                open.push_back(p);
            }
        }
    }
    return cost;
}

std::optional<std::vector<ground::ActionId>> bfs_plan(const ground::GroundTask& task,
                                                      std::size_t max_states) {
    if (ground::is_goal(task, task.init)) return std::vector<ground::ActionId>{};

    std::unordered_map<ground::State, std::uint32_t, ground::StateHash> index;
    std::vector<ground::State> states{task.init};
    std::vector<std::uint32_t> parent{0};
    std::vector<ground::ActionId> via{0};
    index.emplace(task.init, 0);

    std::deque<std::uint32_t> open{0};
    while (!open.empty()) {
        std::uint32_t cur = open.front();
        open.pop_front();
        ground::State s = states[cur];
        for (ground::ActionId a : ground::applicable_actions(task, s)) {
            ground::State next = ground::apply(task, s, a);
            if (index.count(next)) continue;
            auto nid = static_cast<std::uint32_t>(states.size());
            if (nid >= max_states) return std::nullopt;
            states.push_back(next);
            parent.push_back(cur);
            via.push_back(a);
            index.emplace(std::move(next), nid);
            if (ground::is_goal(task, states[nid])) {
                std::vector<ground::ActionId> plan;
                for (std::uint32_t n = nid; n != 0; n = parent[n]) plan.push_back(via[n]);
                std::reverse(plan.begin(), plan.end());
                return plan;
            }
            open.push_back(nid);
        }
    }
    return std::nullopt;
}

OracleQ OracleQ::build(const ground::GroundTask& task, std::size_t max_states) {
    StateSpace space = enumerate_states(task, max_states);
    if (!space.complete)
        throw std::invalid_argument("state space exceeds the oracle cap");
    auto costs = optimal_costs(task, space);
    return OracleQ(std::move(space), std::move(costs));
}

std::vector<double> OracleQ::evaluate(const ground::GroundTask& task, const ground::State& s,
                                      std::span<const ground::ActionId> applicable) const {
    constexpr double kHopeless = -1e15;
    std::vector<double> out;
    out.reserve(applicable.size());
    for (ground::ActionId a : applicable) {
        ground::State next = ground::apply(task, s, a);
        auto it = space_.index.find(next);
        if (it == space_.index.end()) {
            out.push_back(kHopeless);
            continue;
        }
        double c = costs_[it->second];
        out.push_back(c == kInfiniteCost ? kHopeless : -1.0 - c);
    }
    return out;
}

} // namespace gsp::oracle

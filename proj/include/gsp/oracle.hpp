#pragma once

#include "gsp/grounding.hpp"
#include "gsp/qvalue.hpp"

#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

namespace gsp::oracle {

constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct Transition {
    ground::ActionId action;
    std::uint32_t next;
};

struct StateSpace {
    std::vector<ground::State> states;      // index 0 = initial state
    std::unordered_map<ground::State, std::uint32_t, ground::StateHash> index;
    std::vector<std::vector<Transition>> successors;
    bool complete = true;                   // false when max_states was hit
};

// Breadth-first enumeration of the reachable state space (up to max_states).
StateSpace enumerate_states(const ground::GroundTask& task, std::size_t max_states);

// Unit-cost optimal cost-to-go per state; +inf where the goal is unreachable.
// Requires a complete enumeration.
std::vector<double> optimal_costs(const ground::GroundTask& task, const StateSpace& space);

// Step-optimal plan from the initial state, or nullopt when unsolvable
// within max_states.
std::optional<std::vector<ground::ActionId>> bfs_plan(const ground::GroundTask& task,
                                                      std::size_t max_states);

// Exact return-to-go evaluator: Q*(s,a) = -1 - cost*(a(s)). States outside
// the enumerated space or with unreachable goals score -1e15.
class OracleQ : public QEvaluator {
public:
    OracleQ(StateSpace space, std::vector<double> costs)
        : space_(std::move(space)), costs_(std::move(costs)) {}

    static OracleQ build(const ground::GroundTask& task, std::size_t max_states);

    std::vector<double> evaluate(const ground::GroundTask& task, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override;

    const StateSpace& space() const { return space_; }
    const std::vector<double>& costs() const { return costs_; }

private:
    StateSpace space_;
    std::vector<double> costs_;
};

} // namespace gsp::oracle

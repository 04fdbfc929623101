#pragma once

#include "gsp/grounding.hpp"
#include "gsp/qvalue.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace gsp::search {

using ground::ActionId;

enum class TupleKind : std::uint8_t { goal_path = 0, dead_end = 1, bootstrap = 2 };

// (s, a, R̲) with R̲ = suffix return (goal-path), fixed penalty (dead-end),
// or -inf (bootstrap). States live in the episode arena.
struct ReplayTuple {
    static constexpr std::uint32_t kNoSuccessor = std::numeric_limits<std::uint32_t>::max();

    std::uint32_t state = 0;
    ActionId action = 0;
    double bound = 0.0;
    TupleKind kind = TupleKind::bootstrap;
    std::uint32_t successor = kNoSuccessor;
};

// Ships the task and the state arena with the tuples so the learner never
// re-runs search to materialize states.
struct EpisodeContext {
    std::shared_ptr<const ground::GroundTask> task;
    std::vector<ground::State> arena;
};

enum class Outcome : std::uint8_t { goal = 0, budget_exhausted = 1, frontier_empty = 2 };
enum class BudgetHit : std::uint8_t { none = 0, expansions = 1, time = 2 };
// secondary detail for rollouts
enum class StopDetail : std::uint8_t { none = 0, stuck = 1, revisit = 2, step_limit = 3 };

struct EpisodeResult {
    Outcome outcome = Outcome::budget_exhausted;
    std::uint64_t expansions = 0;
    std::optional<std::vector<ActionId>> plan;
    double wall_seconds = 0.0;
    BudgetHit budget_hit = BudgetHit::none;
    StopDetail detail = StopDetail::none;

    bool solved() const { return outcome == Outcome::goal; }
};

struct Budget {
    std::uint64_t max_expansions = 0;   // 0 = unlimited
    double max_seconds = 0.0;           // 0 = unlimited
};

struct Episode {
    std::shared_ptr<EpisodeContext> ctx;
    std::vector<ReplayTuple> tuples;
    EpisodeResult result;
};

// Training episode: best-first over state-action pairs with priority
// g(s) + w·Q(s,a), replay emission for goal paths, dead-ends, and bootstrap
// transitions. Ties broken LIFO. The trace stream, when given, receives one
// line per expansion: iteration, state hash, action id, g, Q, priority.
Episode run_episode(std::shared_ptr<const ground::GroundTask> task, const QEvaluator& q,
                    double w, const Budget& budget, double dead_end_return,
                    std::ostream* trace = nullptr);

// Test-time solvers; same node discipline, no replay. `batch` pairs are
// popped per iteration and goals are re-checked after the whole batch.
EpisodeResult wastar_solve(const ground::GroundTask& task, const QEvaluator& q, double w,
                           int batch, const Budget& budget, std::ostream* trace = nullptr);

// priority = Q(s,a) alone
EpisodeResult gbfs_solve(const ground::GroundTask& task, const QEvaluator& q, int batch,
                         const Budget& budget, std::ostream* trace = nullptr);

// argmax_a Q(s,a) from s0, ties by lowest action id; stops on goal, dead
// end, state revisit, or after max_steps.
EpisodeResult greedy_rollout(const ground::GroundTask& task, const QEvaluator& q,
                             std::uint64_t max_steps);

// Replays the plan from the initial state; true iff it is applicable
// throughout and ends in a goal state.
bool plan_reaches_goal(const ground::GroundTask& task, const std::vector<ActionId>& plan);

} // namespace gsp::search

#include "gsp/search.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace gsp::search {

namespace {

using ground::GroundTask;
using ground::State;

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct QueueEntry {
    double priority;
    std::uint64_t order;        // push counter; ties pop newest first (LIFO)
    std::uint32_t state;
    ActionId action;
    double q;
};

struct EntryLess {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.order < b.order;
    }
};

using Frontier = std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryLess>;

// Search-tree bookkeeping over interned states.
struct Arena {
    std::vector<State> states;
    std::unordered_map<State, std::uint32_t, ground::StateHash> index;
    std::vector<std::int64_t> g;
    std::vector<std::uint32_t> parent_state;
    std::vector<ActionId> parent_action;
    std::vector<bool> visited;

    static constexpr std::uint32_t kRoot = std::numeric_limits<std::uint32_t>::max();

    std::uint32_t intern(const State& s) {
        auto it = index.find(s);
        if (it != index.end()) return it->second;
        auto id = static_cast<std::uint32_t>(states.size());
        states.push_back(s);
        index.emplace(s, id);
        g.push_back(0);
        parent_state.push_back(kRoot);
        parent_action.push_back(0);
        visited.push_back(false);
        return id;
    }
};

void trace_line(std::ostream* trace, std::uint64_t iter, const State& s, const QueueEntry& e,
                std::int64_t g) {
    if (!trace) return;
    (*trace) << iter << ' ' << std::hex << s.hash() << std::dec << ' ' << e.action << " g="
             << g << " q=" << e.q << " f=" << e.priority << '\n';
}

std::vector<ActionId> extract_plan(const Arena& arena, std::uint32_t leaf_state,
                                   ActionId last_action) {
    std::vector<ActionId> plan;
    plan.push_back(last_action);
    std::uint32_t cur = leaf_state;
    while (arena.parent_state[cur] != Arena::kRoot) {
        plan.push_back(arena.parent_action[cur]);
        cur = arena.parent_state[cur];
    }
    std::reverse(plan.begin(), plan.end());
    return plan;
}

EpisodeResult make_result(const GroundTask& task, Outcome outcome, std::uint64_t expansions,
                          std::optional<std::vector<ActionId>> plan, double wall,
                          BudgetHit hit = BudgetHit::none,
                          StopDetail detail = StopDetail::none) {
    if (outcome == Outcome::goal) {
        if (!plan || !plan_reaches_goal(task, *plan))
            throw std::logic_error("search produced an invalid plan");
    }
    EpisodeResult r;
    r.outcome = outcome;
    r.expansions = expansions;
    r.plan = std::move(plan);
    r.wall_seconds = wall;
    r.budget_hit = hit;
    r.detail = detail;
    return r;
}

} // namespace

bool plan_reaches_goal(const GroundTask& task, const std::vector<ActionId>& plan) {
    State s = task.init;
    for (ActionId a : plan) {
        if (!s.contains_all(task.actions[a].pre)) return false;
        s = ground::apply(task, s, a);
    }
    return ground::is_goal(task, s);
}

Episode run_episode(std::shared_ptr<const ground::GroundTask> task, const QEvaluator& q,
                    double w, const Budget& budget, double dead_end_return,
                    std::ostream* trace) {
    const auto start = Clock::now();
    const GroundTask& t = *task;

    Episode ep;
    ep.ctx = std::make_shared<EpisodeContext>();
    ep.ctx->task = task;

    Arena arena;
    // ep arena aliases the search arena at the end; tuples index into it
    std::uint32_t root = arena.intern(t.init);
    arena.visited[root] = true;

    if (ground::is_goal(t, t.init)) {
        ep.ctx->arena = arena.states;
        ep.result = make_result(t, Outcome::goal, 0, std::vector<ActionId>{},
                                elapsed_seconds(start));
        return ep;
    }

    Frontier frontier;
    std::uint64_t push_counter = 0;
#ifndef NDEBUG
    std::unordered_set<std::uint64_t> pushed_pairs;
#endif
    auto push_all = [&](std::uint32_t sid) {
        const State& s = arena.states[sid];
        auto applicable = ground::applicable_actions(t, s);
        auto values = q.evaluate(t, s, applicable);
        for (std::size_t i = 0; i < applicable.size(); ++i) {
            double prio = static_cast<double>(arena.g[sid]) + w * values[i];
#ifndef NDEBUG
            assert(pushed_pairs.insert((static_cast<std::uint64_t>(sid) << 32) |
                                       applicable[i]).second &&
                   "state-action pair pushed twice");
            assert(std::abs(prio - (static_cast<double>(arena.g[sid]) + w * values[i])) <
                   1e-9);
#endif
            frontier.push({prio, push_counter++, sid, applicable[i], values[i]});
        }
    };
    push_all(root);

    std::vector<ReplayTuple> tuples;
    std::uint64_t expansions = 0;
    Outcome outcome = Outcome::budget_exhausted;
    BudgetHit hit = BudgetHit::none;
    std::optional<std::vector<ActionId>> plan;

    while (true) {
        if (budget.max_expansions && expansions >= budget.max_expansions) {
            hit = BudgetHit::expansions;
            break;
        }
        if (budget.max_seconds > 0 && elapsed_seconds(start) >= budget.max_seconds) {
            hit = BudgetHit::time;
            break;
        }
        if (frontier.empty()) {
            outcome = Outcome::frontier_empty;
            break;
        }
        QueueEntry top = frontier.top();
        frontier.pop();
        ++expansions;
        trace_line(trace, expansions, arena.states[top.state], top, arena.g[top.state]);

        State succ = ground::apply(t, arena.states[top.state], top.action);

        if (ground::is_goal(t, succ)) {
            std::uint32_t succ_id = arena.intern(succ);
            // backtrack, replacing bootstrap tuples by suffix returns
            double ret = 0.0;
            std::uint32_t sid = top.state;
            ActionId act = top.action;
            std::uint32_t next_id = succ_id;
            while (true) {
                ret -= 1.0;
                auto stale = std::find_if(tuples.begin(), tuples.end(), [&](const ReplayTuple& rt) {
                    return rt.kind == TupleKind::bootstrap && rt.state == sid &&
                           rt.action == act;
                });
                if (stale != tuples.end()) tuples.erase(stale);
                tuples.push_back({sid, act, ret, TupleKind::goal_path, next_id});
                if (arena.parent_state[sid] == Arena::kRoot) break;
                next_id = sid;
                act = arena.parent_action[sid];
                sid = arena.parent_state[sid];
            }
            plan = extract_plan(arena, top.state, top.action);
            outcome = Outcome::goal;
            break;
        }

        auto applicable = ground::applicable_actions(t, succ);
        if (applicable.empty()) {
            tuples.push_back({top.state, top.action, dead_end_return, TupleKind::dead_end,
                              ReplayTuple::kNoSuccessor});
            continue;
        }

        std::uint32_t succ_id = arena.intern(succ);
        tuples.push_back({top.state, top.action, -std::numeric_limits<double>::infinity(),
                          TupleKind::bootstrap, succ_id});
        if (!arena.visited[succ_id]) {
            arena.visited[succ_id] = true;
            arena.g[succ_id] = arena.g[top.state] - 1;
            arena.parent_state[succ_id] = top.state;
            arena.parent_action[succ_id] = top.action;
            push_all(succ_id);
        }
    }

    ep.ctx->arena = std::move(arena.states);
    ep.tuples = std::move(tuples);
    ep.result = make_result(t, outcome, expansions, std::move(plan), elapsed_seconds(start),
                            outcome == Outcome::budget_exhausted ? hit : BudgetHit::none);
    return ep;
}

namespace {

EpisodeResult best_first(const GroundTask& t, const QEvaluator& q, double w, bool use_g,
                         int batch, const Budget& budget, std::ostream* trace) {
    const auto start = Clock::now();
    if (batch < 1) batch = 1;

    if (ground::is_goal(t, t.init))
        return make_result(t, Outcome::goal, 0, std::vector<ActionId>{},
                           elapsed_seconds(start));

    Arena arena;
    std::uint32_t root = arena.intern(t.init);
    arena.visited[root] = true;

    Frontier frontier;
    std::uint64_t push_counter = 0;
    auto push_all = [&](std::uint32_t sid) {
        const State& s = arena.states[sid];
        auto applicable = ground::applicable_actions(t, s);
        auto values = q.evaluate(t, s, applicable);
        for (std::size_t i = 0; i < applicable.size(); ++i) {
            double prio = (use_g ? static_cast<double>(arena.g[sid]) : 0.0) + w * values[i];
            frontier.push({prio, push_counter++, sid, applicable[i], values[i]});
        }
    };
    push_all(root);

    std::uint64_t expansions = 0;
    std::vector<std::pair<QueueEntry, State>> generated;

    while (true) {
        if (budget.max_expansions && expansions >= budget.max_expansions)
            return make_result(t, Outcome::budget_exhausted, expansions, std::nullopt,
                               elapsed_seconds(start), BudgetHit::expansions);
        if (budget.max_seconds > 0 && elapsed_seconds(start) >= budget.max_seconds)
            return make_result(t, Outcome::budget_exhausted, expansions, std::nullopt,
                               elapsed_seconds(start), BudgetHit::time);
        if (frontier.empty())
            return make_result(t, Outcome::frontier_empty, expansions, std::nullopt,
                               elapsed_seconds(start));

        generated.clear();
        for (int k = 0; k < batch && !frontier.empty(); ++k) {
            QueueEntry top = frontier.top();
            frontier.pop();
            ++expansions;
            trace_line(trace, expansions, arena.states[top.state], top, arena.g[top.state]);
            generated.emplace_back(top, ground::apply(t, arena.states[top.state], top.action));
        }

        // goals are re-checked only after the whole batch is generated
        for (const auto& [entry, succ] : generated) {
            if (ground::is_goal(t, succ)) {
                auto plan = extract_plan(arena, entry.state, entry.action);
                return make_result(t, Outcome::goal, expansions, std::move(plan),
                                   elapsed_seconds(start));
            }
        }

        for (const auto& [entry, succ] : generated) {
            auto it = arena.index.find(succ);
            if (it != arena.index.end() && arena.visited[it->second]) continue;
            auto applicable = ground::applicable_actions(t, succ);
            if (applicable.empty()) continue;
            std::uint32_t sid = arena.intern(succ);
            arena.visited[sid] = true;
            arena.g[sid] = arena.g[entry.state] - 1;
            arena.parent_state[sid] = entry.state;
            arena.parent_action[sid] = entry.action;
            push_all(sid);
        }
    }
}

} // namespace

EpisodeResult wastar_solve(const GroundTask& task, const QEvaluator& q, double w, int batch,
                           const Budget& budget, std::ostream* trace) {
    return best_first(task, q, w, /*use_g=*/true, batch, budget, trace);
}

EpisodeResult gbfs_solve(const GroundTask& task, const QEvaluator& q, int batch,
                         const Budget& budget, std::ostream* trace) {
    return best_first(task, q, /*w=*/1.0, /*use_g=*/false, batch, budget, trace);
}

EpisodeResult greedy_rollout(const GroundTask& task, const QEvaluator& q,
                             std::uint64_t max_steps) {
    const auto start = Clock::now();
    State s = task.init;
    if (ground::is_goal(task, s))
        return make_result(task, Outcome::goal, 0, std::vector<ActionId>{},
                           elapsed_seconds(start));

    std::unordered_set<State, ground::StateHash> seen;
    seen.insert(s);
    std::vector<ActionId> plan;
    std::uint64_t steps = 0;

    while (steps < max_steps) {
        auto applicable = ground::applicable_actions(task, s);
        if (applicable.empty())
            return make_result(task, Outcome::budget_exhausted, steps, std::nullopt,
                               elapsed_seconds(start), BudgetHit::none, StopDetail::stuck);
        auto values = q.evaluate(task, s, applicable);
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] > values[best]) best = i;   // ties keep the lowest action id
        ActionId a = applicable[best];
        s = ground::apply(task, s, a);
        plan.push_back(a);
        ++steps;
        if (ground::is_goal(task, s))
            return make_result(task, Outcome::goal, steps, std::move(plan),
                               elapsed_seconds(start));
        if (!seen.insert(s).second)
            return make_result(task, Outcome::budget_exhausted, steps, std::nullopt,
                               elapsed_seconds(start), BudgetHit::none, StopDetail::revisit);
    }
    return make_result(task, Outcome::budget_exhausted, steps, std::nullopt,
                       elapsed_seconds(start), BudgetHit::expansions, StopDetail::step_limit);
}

} // namespace gsp::search

#include "gsp/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gsp::eval {

double h_max(const ground::GroundTask& task, const ground::State& s) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(task.atoms.size(), kInf);
    for (ground::AtomId a : s.atoms()) cost[a] = 0.0;

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& act : task.actions) {
            double pre = 0.0;
            for (ground::AtomId p : act.pre) {
                pre = std::max(pre, cost[p]);
                if (pre == kInf) break;
            }
            if (pre == kInf) continue;
            double c = 1.0 + pre;
            for (ground::AtomId q : act.add) {
                if (c < cost[q]) {
                    cost[q] = c;
                    changed = true;
                }
            }
        }
    }

    double h = 0.0;
    for (ground::AtomId g : task.goal) h = std::max(h, cost[g]);
    return h;
}

std::vector<double> HmaxQ::evaluate(const ground::GroundTask& task, const ground::State& s,
                                    std::span<const ground::ActionId> applicable) const {
    std::vector<double> out;
    out.reserve(applicable.size());
    for (ground::ActionId a : applicable)
        out.push_back(-1.0 - h_max(task, ground::apply(task, s, a)));
    return out;
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::greedy: return "greedy";
        case Mode::wastar: return "wastar";
        case Mode::gbfs: return "gbfs";
        case Mode::hmax: return "hmax";
        case Mode::blind: return "blind";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    for (Mode m : {Mode::greedy, Mode::wastar, Mode::gbfs, Mode::hmax, Mode::blind})
        if (name == mode_name(m)) return m;
    throw std::invalid_argument("unknown eval mode '" + name + "'");
}

EvalRow eval_one(const std::string& instance_name, const ground::GroundTask& task, Mode mode,
                 const QEvaluator* q, const EvalOptions& opts) {
    search::Budget budget{opts.max_expansions, opts.max_seconds};
    search::EpisodeResult res;
    ZeroQ zero;
    HmaxQ hm;
    switch (mode) {
        case Mode::greedy:
            if (!q) throw std::invalid_argument("greedy mode needs a checkpoint");
            res = search::greedy_rollout(task, *q, opts.max_expansions);
            break;
        case Mode::wastar:
            if (!q) throw std::invalid_argument("wastar mode needs a checkpoint");
            res = search::wastar_solve(task, *q, opts.w, opts.batch, budget);
            break;
        case Mode::gbfs:
            if (!q) throw std::invalid_argument("gbfs mode needs a checkpoint");
            res = search::gbfs_solve(task, *q, opts.batch, budget);
            break;
        case Mode::hmax:
            res = search::wastar_solve(task, hm, opts.w, opts.batch, budget);
            break;
        case Mode::blind:
            res = search::wastar_solve(task, zero, opts.w, opts.batch, budget);
            break;
    }
    EvalRow row;
    row.instance = instance_name;
    row.mode = mode;
    row.solved = res.solved();
    row.plan_length = res.plan ? static_cast<std::int64_t>(res.plan->size()) : -1;
    row.expansions = res.expansions;
    row.wall_seconds = res.wall_seconds;
    row.budget_hit = res.budget_hit;
    return row;
}

std::vector<EvalRow> run_eval(
    const std::vector<std::pair<std::string, std::shared_ptr<const ground::GroundTask>>>& tasks,
    const std::vector<Mode>& modes, const QEvaluator* q, const EvalOptions& opts, int jobs) {
    std::vector<EvalRow> rows(tasks.size() * modes.size());
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) break;
            for (std::size_t m = 0; m < modes.size(); ++m)
                rows[i * modes.size() + m] =
                    eval_one(tasks[i].first, *tasks[i].second, modes[m], q, opts);
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || tasks.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace {

const char* budget_hit_name(search::BudgetHit b) {
    switch (b) {
        case search::BudgetHit::none: return "none";
        case search::BudgetHit::expansions: return "expansions";
        case search::BudgetHit::time: return "time";
    }
    return "?";
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<ModeSummary> summarize(const std::vector<EvalRow>& rows) {
    std::vector<ModeSummary> out;
    for (Mode m : {Mode::greedy, Mode::wastar, Mode::gbfs, Mode::hmax, Mode::blind}) {
        ModeSummary s;
        s.mode = m;
        std::vector<double> steps;
        double exp_sum = 0.0, sec_sum = 0.0;
        for (const auto& r : rows) {
            if (r.mode != m) continue;
            ++s.instances;
            if (r.solved) {
                ++s.solved;
                steps.push_back(static_cast<double>(r.plan_length));
                exp_sum += static_cast<double>(r.expansions);
                sec_sum += r.wall_seconds;
            }
        }
        if (s.instances == 0) continue;
        s.coverage = static_cast<double>(s.solved) / static_cast<double>(s.instances);
        if (s.solved > 0) {
            double n = static_cast<double>(s.solved);
            double sum = 0.0;
            for (double x : steps) sum += x;
            s.mean_steps_solved = sum / n;
            s.median_steps_solved = median(steps);
            s.mean_expansions_solved = exp_sum / n;
            s.mean_seconds_solved = sec_sum / n;
        }
        out.push_back(s);
    }
    return out;
}

std::string rows_to_csv(const std::vector<EvalRow>& rows) {
    std::ostringstream out;
    out << "instance,mode,solved,plan_length,expansions,wall_seconds,budget_hit\n";
    for (const auto& r : rows) {
        out << r.instance << ',' << mode_name(r.mode) << ',' << (r.solved ? 1 : 0) << ','
            << r.plan_length << ',' << r.expansions << ',' << r.wall_seconds << ','
            << budget_hit_name(r.budget_hit) << '\n';
    }
    return out.str();
}

std::string rows_to_ndjson(const std::vector<EvalRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        nlohmann::json j{{"instance", r.instance},
                         {"mode", mode_name(r.mode)},
                         {"solved", r.solved},
                         {"plan_length", r.plan_length},
                         {"expansions", r.expansions},
                         {"wall_seconds", r.wall_seconds},
                         {"budget_hit", budget_hit_name(r.budget_hit)}};
        out << j.dump() << '\n';
    }
    return out.str();
}

std::string summaries_to_csv(const std::vector<ModeSummary>& sums) {
    std::ostringstream out;
    out << "mode,instances,solved,coverage,mean_steps_solved,median_steps_solved,"
           "mean_expansions_solved,mean_seconds_solved\n";
    for (const auto& s : sums) {
        out << mode_name(s.mode) << ',' << s.instances << ',' << s.solved << ',' << s.coverage
            << ',' << s.mean_steps_solved << ',' << s.median_steps_solved << ','
            << s.mean_expansions_solved << ',' << s.mean_seconds_solved << '\n';
    }
    return out.str();
}

} // namespace gsp::eval

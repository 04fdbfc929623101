#pragma once

#include "gsp/qvalue.hpp"
#include "gsp/search.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gsp::eval {

// Delete-relaxation h_max: fixpoint over atom costs, action cost
// 1 + max over precondition costs, atom cost min over achievers;
// h = max over goal atoms, +inf when some goal atom is unreachable.
double h_max(const ground::GroundTask& task, const ground::State& s);

// Heuristic-interface adapter so the baseline runs through the same search
// engines: Q(s,a) = -1 - h_max(a(s)).
class HmaxQ : public QEvaluator {
public:
    std::vector<double> evaluate(const ground::GroundTask& task, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override;
};

enum class Mode { greedy, wastar, gbfs, hmax, blind };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct EvalOptions {
    double w = 2.0;
    int batch = 1;
    std::uint64_t max_expansions = 10'000;
    double max_seconds = 3600.0;
};

struct EvalRow {
    std::string instance;
    Mode mode = Mode::greedy;
    bool solved = false;
    std::int64_t plan_length = -1;
    std::uint64_t expansions = 0;
    double wall_seconds = 0.0;
    search::BudgetHit budget_hit = search::BudgetHit::none;
};

// q may be null for hmax/blind modes.
EvalRow eval_one(const std::string& instance_name, const ground::GroundTask& task, Mode mode,
                 const QEvaluator* q, const EvalOptions& opts);

// One row per (instance, mode), instances in the given order; instances run
// in parallel when jobs > 1, each search single-threaded. q may be null when
// only hmax/blind modes are requested.
std::vector<EvalRow> run_eval(
    const std::vector<std::pair<std::string, std::shared_ptr<const ground::GroundTask>>>& tasks,
    const std::vector<Mode>& modes, const QEvaluator* q, const EvalOptions& opts, int jobs);

struct ModeSummary {
    Mode mode;
    std::size_t instances = 0;
    std::size_t solved = 0;
    double coverage = 0.0;
    double mean_steps_solved = 0.0;     // over solved instances
    double median_steps_solved = 0.0;
    double mean_expansions_solved = 0.0;
    double mean_seconds_solved = 0.0;
};

std::vector<ModeSummary> summarize(const std::vector<EvalRow>& rows);

std::string rows_to_csv(const std::vector<EvalRow>& rows);
std::string rows_to_ndjson(const std::vector<EvalRow>& rows);
std::string summaries_to_csv(const std::vector<ModeSummary>& sums);

} // namespace gsp::eval

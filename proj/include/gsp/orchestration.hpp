#pragma once

#include "gsp/learning.hpp"
#include "gsp/pddl.hpp"
#include "gsp/search.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace gsp::orch {

struct AllEmpty : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PoolLabel : std::uint8_t { unsolved = 0, solved = 1, satisficed = 2 };

// weight assignment for (solved, unsolved, satisficed):
//   rationale: 1 : β : β²   (satisficed episodes carry the most signal)
//   literal:   β : 1 : β²   (pools as listed, increasing weights)
enum class PoolWeightOrder : std::uint8_t { rationale = 0, literal = 1 };

// plan found and expansions == plan length -> solved; plan found -> satisficed
PoolLabel classify(const search::EpisodeResult& result);

class InstancePools {
public:
    explicit InstancePools(std::size_t n) : labels_(n, PoolLabel::unsolved) {}

    void update(std::size_t instance, PoolLabel label) { labels_.at(instance) = label; }
    PoolLabel label(std::size_t instance) const { return labels_.at(instance); }
    std::size_t size() const { return labels_.size(); }
    std::size_t count(PoolLabel label) const;

    // pool chosen by β-weights restricted to non-empty pools, uniform within
    std::size_t sample(Rng& rng, double beta, PoolWeightOrder order) const;

private:
    std::vector<PoolLabel> labels_;
};

struct ValidationScore {
    double coverage = 0.0;
    double total_steps = std::numeric_limits<double>::infinity();   // over solved
    double rmse = std::numeric_limits<double>::infinity();          // over solved

    // lexicographic: coverage desc, steps asc, rmse asc
    bool better_than(const ValidationScore& o) const;
};

// greedy rollout over the validation set; rmse pairs -(plan length) with
// Q(s0, first action) on solved instances
ValidationScore validate(const QEvaluator& q,
                         const std::vector<std::shared_ptr<const ground::GroundTask>>& tasks,
                         std::uint64_t max_steps);

struct TrainConfig {
    net::NetConfig net;
    double w = 2.0;
    int workers = 5;
    double episode_seconds = 60.0;
    std::uint64_t episode_expansions = 0;       // 0 = wall-clock budget only
    std::size_t batch_size = 256;
    std::size_t buffer_batches = 40;
    double lr_gnn = 1e-4;
    double lr_readout = 1e-3;
    int target_refresh_passes = 10;
    double pool_beta = 4.0;
    PoolWeightOrder pool_order = PoolWeightOrder::rationale;
    double dead_end_return = -2000.0;
    double total_seconds = 600.0;
    std::uint64_t max_episodes = 0;             // 0 = until the wall budget
    std::uint64_t seed = 1;
    int validate_every_passes = 20;
    std::uint64_t validation_max_steps = 1000;
    int steps_per_episode = 4;                  // learner steps per episode (single-thread)
    std::uint64_t metrics_every_episodes = 10;
    bool single_thread = false;
    net::OptMode optimizer = net::OptMode::adam;
};

// `key = value` lines, '#' comments; keys mirror the config fields.
TrainConfig parse_config_file(const std::string& path, TrainConfig base = {});
void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value);

struct NamedInstance {
    std::string name;
    pddl::Instance instance;
};

struct TrainResult {
    std::string metrics_path;
    std::string best_checkpoint_dir;    // empty when nothing was written
    ValidationScore best_score;
    int checkpoints_written = 0;
    std::uint64_t episodes = 0;
    std::uint64_t learner_steps = 0;
};

// Full loop: sample instance -> search episode -> classify/pools -> replay
// push -> learner steps -> periodic validation and checkpoints. Writes
// metrics.ndjson and ckpt_<n>/ directories under out_dir. Single-thread
// mode is bit-reproducible under a fixed seed and reports virtual time.
TrainResult train(const TrainConfig& cfg, const pddl::Domain& dom,
                  const std::vector<NamedInstance>& train_set,
                  const std::vector<NamedInstance>& validation_set,
                  const std::string& out_dir);

} // namespace gsp::orch

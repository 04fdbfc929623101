#pragma once

#include "gsp/qvalue.hpp"
#include "gsp/rng.hpp"
#include "gsp/search.hpp"
#include "gsp/value_net.hpp"

#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace gsp::learn {

struct Underfull : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingSuccessor : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BufferEntry {
    std::shared_ptr<const search::EpisodeContext> ctx;
    search::ReplayTuple tuple;
};

// FIFO ring; capacity is usually batches × batch_size.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const std::shared_ptr<const search::EpisodeContext>& ctx,
              std::span<const search::ReplayTuple> tuples);
    void push(const search::Episode& ep) { push(ep.ctx, ep.tuples); }

    // uniform without replacement within one batch
    std::vector<BufferEntry> sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_pushed() const { return total_pushed_; }
    const BufferEntry& entry(std::size_t i) const { return ring_[i]; }   // FIFO order

private:
    std::size_t capacity_;
    std::deque<BufferEntry> ring_;
    std::uint64_t total_pushed_ = 0;
};

struct TargetSpec {
    static constexpr double step_reward = -1.0;   // fixed
    static constexpr double discount = 1.0;       // fixed
    double dead_end_return = -2000.0;

    double clamp_limit() const { return 10.0 * std::abs(dead_end_return); }
};

// One-step bounded Bellman targets on the frozen target network:
//   bootstrap:  y = -1 + max_{a'} Q(s',a')   (-1 when s' is a goal,
//               -1 + R_bot when s' has no actions)
//   goal-path:  y = max(R̲, bootstrap value)
//   dead-end:   y = R_bot
// clamped to |y| <= 10·|R_bot|.
std::vector<double> compute_targets(std::span<const BufferEntry> batch,
                                    const QEvaluator& target_net, const TargetSpec& spec);

// Trainable action-value function; the network and the tabular test stub
// share this surface so the learner machinery is identical for both.
class QModel : public QEvaluator {
public:
    virtual double train_batch(std::span<const BufferEntry> batch,
                               std::span<const double> targets) = 0;
    virtual std::unique_ptr<QModel> clone_frozen() const = 0;
    virtual std::uint64_t version() const = 0;
};

class NetworkModel final : public QModel {
public:
    NetworkModel(net::QNetwork network, net::OptMode mode, double lr_gnn, double lr_readout);

    std::vector<double> evaluate(const ground::GroundTask& task, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override;
    double train_batch(std::span<const BufferEntry> batch,
                       std::span<const double> targets) override;
    std::unique_ptr<QModel> clone_frozen() const override;
    std::uint64_t version() const override { return net_.version; }

    const net::QNetwork& network() const { return net_; }
    // immutable copy for publishing to search workers
    std::shared_ptr<const net::QNetwork> snapshot() const {
        return std::make_shared<const net::QNetwork>(net_);
    }

private:
    net::QNetwork net_;
    net::Optimizer opt_;
    double lr_gnn_;
    double lr_readout_;
};

// Exact lookup table behind the QModel surface; per-sample assignment
// update q += lr·(y - q). Oracle-test stub, not a paper component.
class TabularQ final : public QModel {
public:
    explicit TabularQ(double lr = 1.0, double default_q = 0.0)
        : lr_(lr), default_q_(default_q) {}

    std::vector<double> evaluate(const ground::GroundTask& task, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override;
    double train_batch(std::span<const BufferEntry> batch,
                       std::span<const double> targets) override;
    std::unique_ptr<QModel> clone_frozen() const override {
        return std::make_unique<TabularQ>(*this);
    }
    std::uint64_t version() const override { return version_; }

    double lookup(const ground::State& s, ground::ActionId a) const;

private:
    struct Key {
        ground::State state;
        ground::ActionId action;
        bool operator==(const Key& o) const {
            return action == o.action && state == o.state;
        }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(k.state.hash() ^
                                            (0x9e3779b97f4a7c15ull * (k.action + 1)));
        }
    };

    std::unordered_map<Key, double, KeyHash> table_;
    double lr_;
    double default_q_;
    std::uint64_t version_ = 0;
};

struct LearnerState {
    std::size_t batch_size = 256;
    std::size_t steps_per_pass = 40;    // ceil(capacity / batch_size)
    int refresh_passes = 10;
    std::uint64_t steps = 0;

    std::uint64_t passes() const { return steps / steps_per_pass; }
};

// sample → targets → fit; re-clones the target network every
// refresh_passes full passes through the buffer.
double learner_step(QModel& online, std::unique_ptr<QModel>& target, const ReplayBuffer& buf,
                    const TargetSpec& spec, LearnerState& st, Rng& rng);

} // namespace gsp::learn

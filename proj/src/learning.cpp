#include "gsp/learning.hpp"

#include <algorithm>
#include <cmath>

namespace gsp::learn {

void ReplayBuffer::push(const std::shared_ptr<const search::EpisodeContext>& ctx,
                        std::span<const search::ReplayTuple> tuples) {
    for (const auto& t : tuples) {
        ring_.push_back({ctx, t});
        ++total_pushed_;
        if (ring_.size() > capacity_) ring_.pop_front();
    }
}

std::vector<BufferEntry> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (ring_.size() < batch_size)
        throw Underfull("replay buffer holds " + std::to_string(ring_.size()) +
                        " tuples, need " + std::to_string(batch_size));
    // partial Fisher-Yates over an index vector
    std::vector<std::uint32_t> idx(ring_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    std::vector<BufferEntry> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.push_back(ring_[idx[i]]);
    }
    return out;
}

std::vector<double> compute_targets(std::span<const BufferEntry> batch,
                                    const QEvaluator& target_net, const TargetSpec& spec) {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& e : batch) {
        const auto& tuple = e.tuple;
        double y;
        if (tuple.kind == search::TupleKind::dead_end) {
            y = spec.dead_end_return;
        } else {
            if (tuple.successor == search::ReplayTuple::kNoSuccessor)
                throw MissingSuccessor("replay tuple has no successor handle");
            const auto& task = *e.ctx->task;
            const ground::State& succ = e.ctx->arena[tuple.successor];
            double bootstrap;
            if (ground::is_goal(task, succ)) {
                bootstrap = TargetSpec::step_reward;   // empty max: no cost to go
            } else {
                auto applicable = ground::applicable_actions(task, succ);
                if (applicable.empty()) {
                    bootstrap = TargetSpec::step_reward + spec.dead_end_return;
                } else {
                    auto q = target_net.evaluate(task, succ, applicable);
                    bootstrap = TargetSpec::step_reward +
                                *std::max_element(q.begin(), q.end());
                }
            }
            y = tuple.kind == search::TupleKind::goal_path ? std::max(tuple.bound, bootstrap)
                                                           : bootstrap;
        }
        const double limit = spec.clamp_limit();
        out.push_back(std::clamp(y, -limit, limit));
    }
    return out;
}

NetworkModel::NetworkModel(net::QNetwork network, net::OptMode mode, double lr_gnn,
                           double lr_readout)
    : net_(std::move(network)), lr_gnn_(lr_gnn), lr_readout_(lr_readout) {
    opt_.mode = mode;
}

std::vector<double> NetworkModel::evaluate(const ground::GroundTask& task,
                                           const ground::State& s,
                                           std::span<const ground::ActionId> applicable) const {
    auto g = graph::encode(task, s, applicable, net_.signature, net_.cfg.goal_mode);
    return net::forward(net_, g);
}

double NetworkModel::train_batch(std::span<const BufferEntry> batch,
                                 std::span<const double> targets) {
    std::deque<graph::RelationalGraph> graphs;   // stable addresses
    std::vector<net::BatchItem> items;
    items.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& e = batch[i];
        const auto& task = *e.ctx->task;
        const ground::State& s = e.ctx->arena[e.tuple.state];
        auto applicable = ground::applicable_actions(task, s);
        graphs.push_back(graph::encode(task, s, applicable, net_.signature,
                                       net_.cfg.goal_mode));
        items.push_back({&graphs.back(), e.tuple.action, targets[i]});
    }
    auto [loss, grads] = net::loss_and_grad(net_, items);
    net::apply_update(net_, grads, lr_gnn_, lr_readout_, opt_);
    return loss;
}

std::unique_ptr<QModel> NetworkModel::clone_frozen() const {
    auto copy = std::make_unique<NetworkModel>(net::clone_frozen(net_), opt_.mode, lr_gnn_,
                                               lr_readout_);
    return copy;
}

std::vector<double> TabularQ::evaluate(const ground::GroundTask&, const ground::State& s,
                                       std::span<const ground::ActionId> applicable) const {
    std::vector<double> out;
    out.reserve(applicable.size());
    for (ground::ActionId a : applicable) out.push_back(lookup(s, a));
    return out;
}

double TabularQ::lookup(const ground::State& s, ground::ActionId a) const {
    auto it = table_.find({s, a});
    return it == table_.end() ? default_q_ : it->second;
}

double TabularQ::train_batch(std::span<const BufferEntry> batch,
                             std::span<const double> targets) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& e = batch[i];
        Key key{e.ctx->arena[e.tuple.state], e.tuple.action};
        auto [it, inserted] = table_.emplace(key, default_q_);
        double err = it->second - targets[i];
        loss += err * err;
        it->second += lr_ * (targets[i] - it->second);
    }
    ++version_;
    return batch.empty() ? 0.0 : loss / static_cast<double>(batch.size());
}

double learner_step(QModel& online, std::unique_ptr<QModel>& target, const ReplayBuffer& buf,
                    const TargetSpec& spec, LearnerState& st, Rng& rng) {
    auto batch = buf.sample(st.batch_size, rng);
    auto targets = compute_targets(batch, *target, spec);
    double loss = online.train_batch(batch, targets);
    ++st.steps;
    const std::uint64_t refresh_every =
        st.steps_per_pass * static_cast<std::uint64_t>(st.refresh_passes);
    if (refresh_every > 0 && st.steps % refresh_every == 0) target = online.clone_frozen();
    return loss;
}

} // namespace gsp::learn

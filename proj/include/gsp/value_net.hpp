#pragma once

#include "gsp/qvalue.hpp"
#include "gsp/relational_graph.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gsp::net {

struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingRelation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteTarget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Boltzmann-weighted mean Σ v_i e^{αv_i} / Σ e^{αv_i}, max-shifted for
// stability. Bounded by [min v, max v], approaches max as α grows.
double smoothmax(std::span<const double> values, double alpha);

struct NetConfig {
    int dim = 32;
    int layers = 30;
    double alpha = 12.0;
    // hidden widths of the two-affine-layer perceptrons; 0 = output width
    int hidden_combiner = 0;
    int hidden_update = 0;
    int hidden_readout = 0;
    graph::GoalMode goal_mode = graph::GoalMode::distinguished;
};

// y = W x + b, row-major W (out × in)
struct Affine {
    std::uint32_t out = 0;
    std::uint32_t in = 0;
    std::vector<double> w;
    std::vector<double> b;
};

// two affine layers with silu between
struct Perceptron {
    Affine l1, l2;
};

struct ParamSet {
    std::vector<Perceptron> combiners;  // one per relation id
    Perceptron update;                  // 2d -> d
    Perceptron readout;                 // 2d -> 1
};

struct QNetwork {
    NetConfig cfg;
    graph::RelationSignature signature;
    ParamSet params;
    std::uint64_t version = 0;
};

struct Gradients {
    ParamSet params;    // shape-congruent with the producing network
    double loss = 0.0;
    std::size_t count = 0;
};

// Deterministic init: weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases zero.
QNetwork init(const graph::RelationSignature& sig, const NetConfig& cfg, std::uint64_t seed);

// One Q value per action node of the graph, aligned with g.action_nodes.
std::vector<double> forward(const QNetwork& net, const graph::RelationalGraph& g);

struct BatchItem {
    const graph::RelationalGraph* graph;
    ground::ActionId action;
    double target;
};

// Mean squared error over the batch with exact reverse-mode gradients.
std::pair<double, Gradients> loss_and_grad(const QNetwork& net,
                                           std::span<const BatchItem> batch);

enum class OptMode : std::uint8_t { sgd = 0, adam = 1 };

struct Optimizer {
    OptMode mode = OptMode::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    ParamSet m, v;      // sized lazily on first update
    bool initialized = false;
};

// lr_gnn drives combiner/update parameters, lr_readout the readout MLP.
void apply_update(QNetwork& net, const Gradients& grads, double lr_gnn, double lr_readout,
                  Optimizer& opt);

QNetwork clone_frozen(const QNetwork& net);

void save_checkpoint(const QNetwork& net, const std::string& path);
QNetwork load_checkpoint(const std::string& path);

class NetworkQ : public QEvaluator {
public:
    explicit NetworkQ(std::shared_ptr<const QNetwork> net) : net_(std::move(net)) {}

    std::vector<double> evaluate(const ground::GroundTask& task, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override {
        auto g = graph::encode(task, s, applicable, net_->signature, net_->cfg.goal_mode);
        return forward(*net_, g);
    }

    const QNetwork& network() const { return *net_; }
    std::shared_ptr<const QNetwork> shared() const { return net_; }

private:
    std::shared_ptr<const QNetwork> net_;
};

} // namespace gsp::net

#include "gsp/orchestration.hpp"

#include "gsp/grounding.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace gsp::orch {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

PoolLabel classify(const search::EpisodeResult& result) {
    if (!result.plan) return PoolLabel::unsolved;
    return result.expansions == result.plan->size() ? PoolLabel::solved
                                                    : PoolLabel::satisficed;
}

std::size_t InstancePools::count(PoolLabel label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::size_t InstancePools::sample(Rng& rng, double beta, PoolWeightOrder order) const {
    if (labels_.empty()) throw AllEmpty("no training instances");
    double weights[3] = {0.0, 0.0, 0.0};   // indexed by PoolLabel
    if (order == PoolWeightOrder::rationale) {
        weights[static_cast<int>(PoolLabel::solved)] = 1.0;
        weights[static_cast<int>(PoolLabel::unsolved)] = beta;
        weights[static_cast<int>(PoolLabel::satisficed)] = beta * beta;
    } else {
        weights[static_cast<int>(PoolLabel::unsolved)] = 1.0;
        weights[static_cast<int>(PoolLabel::solved)] = beta;
        weights[static_cast<int>(PoolLabel::satisficed)] = beta * beta;
    }
    std::size_t counts[3] = {count(PoolLabel::unsolved), count(PoolLabel::solved),
                             count(PoolLabel::satisficed)};
    double total = 0.0;
    for (int p = 0; p < 3; ++p)
        if (counts[p] > 0) total += weights[p];
    double roll = rng.real() * total;
    int chosen = -1;
    for (int p = 0; p < 3; ++p) {
        if (counts[p] == 0) continue;
        chosen = p;                      // the last non-empty pool absorbs rounding
        if (roll < weights[p]) break;
        roll -= weights[p];
    }
    // uniform within the chosen pool
    std::size_t k = static_cast<std::size_t>(rng.index(counts[chosen]));
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (static_cast<int>(labels_[i]) != chosen) continue;
        if (k == 0) return i;
        --k;
    }
    throw std::logic_error("pool sampling fell through");
}

bool ValidationScore::better_than(const ValidationScore& o) const {
    if (coverage != o.coverage) return coverage > o.coverage;
    if (total_steps != o.total_steps) return total_steps < o.total_steps;
    return rmse < o.rmse;
}

ValidationScore validate(const QEvaluator& q,
                         const std::vector<std::shared_ptr<const ground::GroundTask>>& tasks,
                         std::uint64_t max_steps) {
    ValidationScore score;
    if (tasks.empty()) return score;
    std::size_t solved = 0;
    double steps = 0.0;
    double sq_sum = 0.0;
    std::size_t sq_count = 0;
    for (const auto& task : tasks) {
        auto res = search::greedy_rollout(*task, q, max_steps);
        if (!res.solved()) continue;
        ++solved;
        steps += static_cast<double>(res.plan->size());
        if (!res.plan->empty()) {
            auto applicable = ground::applicable_actions(*task, task->init);
            auto values = q.evaluate(*task, task->init, applicable);
            auto it = std::find(applicable.begin(), applicable.end(), res.plan->front());
            double predicted = values[static_cast<std::size_t>(it - applicable.begin())];
            double realized = -static_cast<double>(res.plan->size());
            sq_sum += (predicted - realized) * (predicted - realized);
            ++sq_count;
        }
    }
    score.coverage = static_cast<double>(solved) / static_cast<double>(tasks.size());
    if (solved > 0) {
        score.total_steps = steps;
        score.rmse = sq_count > 0 ? std::sqrt(sq_sum / static_cast<double>(sq_count)) : 0.0;
    }
    return score;
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

} // namespace

void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dim") cfg.net.dim = std::stoi(value);
    else if (key == "layers") cfg.net.layers = std::stoi(value);
    else if (key == "alpha") cfg.net.alpha = std::stod(value);
    else if (key == "hidden_combiner") cfg.net.hidden_combiner = std::stoi(value);
    else if (key == "hidden_update") cfg.net.hidden_update = std::stoi(value);
    else if (key == "hidden_readout") cfg.net.hidden_readout = std::stoi(value);
    else if (key == "goal_mode") {
        if (value == "distinguished") cfg.net.goal_mode = graph::GoalMode::distinguished;
        else if (value == "literal") cfg.net.goal_mode = graph::GoalMode::literal;
        else throw std::invalid_argument("goal_mode must be distinguished|literal");
    } else if (key == "w") cfg.w = std::stod(value);
    else if (key == "workers") cfg.workers = std::stoi(value);
    else if (key == "episode_seconds") cfg.episode_seconds = std::stod(value);
    else if (key == "episode_expansions") cfg.episode_expansions = std::stoull(value);
    else if (key == "batch_size") cfg.batch_size = std::stoull(value);
    else if (key == "buffer_batches") cfg.buffer_batches = std::stoull(value);
    else if (key == "lr_gnn") cfg.lr_gnn = std::stod(value);
    else if (key == "lr_readout") cfg.lr_readout = std::stod(value);
    else if (key == "target_refresh_passes") cfg.target_refresh_passes = std::stoi(value);
    else if (key == "pool_beta") cfg.pool_beta = std::stod(value);
    else if (key == "pool_order") {
        if (value == "rationale") cfg.pool_order = PoolWeightOrder::rationale;
        else if (value == "literal") cfg.pool_order = PoolWeightOrder::literal;
        else throw std::invalid_argument("pool_order must be rationale|literal");
    } else if (key == "dead_end_return") cfg.dead_end_return = std::stod(value);
    else if (key == "total_seconds") cfg.total_seconds = std::stod(value);
    else if (key == "max_episodes") cfg.max_episodes = std::stoull(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "validate_every_passes") cfg.validate_every_passes = std::stoi(value);
    else if (key == "validation_max_steps") cfg.validation_max_steps = std::stoull(value);
    else if (key == "steps_per_episode") cfg.steps_per_episode = std::stoi(value);
    else if (key == "metrics_every_episodes") cfg.metrics_every_episodes = std::stoull(value);
    else if (key == "single_thread") cfg.single_thread = parse_bool(value);
    else if (key == "optimizer") {
        if (value == "adam") cfg.optimizer = net::OptMode::adam;
        else if (value == "sgd") cfg.optimizer = net::OptMode::sgd;
        else throw std::invalid_argument("optimizer must be adam|sgd");
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

TrainConfig parse_config_file(const std::string& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(base, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

namespace {

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

struct MetricsWindow {
    std::vector<double> expansions;
    std::size_t attempted = 0;
    std::size_t solved = 0;

    void record(const search::EpisodeResult& r) {
        ++attempted;
        if (r.plan) ++solved;
        expansions.push_back(static_cast<double>(r.expansions));
    }
    void reset() {
        expansions.clear();
        attempted = 0;
        solved = 0;
    }
};

struct Shared {
    const TrainConfig& cfg;
    std::vector<std::shared_ptr<const ground::GroundTask>> train_tasks;
    std::vector<std::shared_ptr<const ground::GroundTask>> val_tasks;

    std::ofstream metrics;
    std::string out_dir;

    InstancePools pools;
    MetricsWindow window;
    double last_loss = 0.0;
    int last_checkpoint = -1;
    int checkpoints_written = 0;
    ValidationScore best;
    std::string best_dir;
    std::uint64_t episodes = 0;
    std::uint64_t last_metrics_episode = 0;
    std::uint64_t last_validated_pass = 0;
    bool validated_once = false;

    Shared(const TrainConfig& c, std::size_t n) : cfg(c), pools(n) { best.coverage = -1.0; }
};

void emit_metrics(Shared& sh, double wall_seconds, std::size_t buffer_fill) {
    nlohmann::json j{
        {"wall_seconds", wall_seconds},
        {"episodes", sh.episodes},
        {"solve_rate", sh.window.attempted == 0
                           ? 0.0
                           : static_cast<double>(sh.window.solved) /
                                 static_cast<double>(sh.window.attempted)},
        {"expansions_p25", percentile(sh.window.expansions, 0.25)},
        {"expansions_p50", percentile(sh.window.expansions, 0.50)},
        {"expansions_p75", percentile(sh.window.expansions, 0.75)},
        {"learner_loss", sh.last_loss},
        {"buffer_fill", buffer_fill},
        {"checkpoint_id", sh.last_checkpoint},
    };
    sh.metrics << j.dump() << '\n';
    sh.metrics.flush();
    sh.window.reset();
    sh.last_metrics_episode = sh.episodes;
}

// infinities (empty solved set) are stored as strings; they are not valid JSON numbers
nlohmann::json finite_or_str(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

void write_checkpoint(Shared& sh, const net::QNetwork& network, const ValidationScore& score,
                      std::uint64_t learner_steps) {
    int id = sh.checkpoints_written;
    fs::path dir = fs::path(sh.out_dir) / ("ckpt_" + std::to_string(id));
    fs::create_directories(dir);
    net::save_checkpoint(network, (dir / "qnet.bin").string());
    nlohmann::json j{{"coverage", score.coverage},
                     {"total_steps", finite_or_str(score.total_steps)},
                     {"rmse", finite_or_str(score.rmse)},
                     {"episodes", sh.episodes},
                     {"learner_steps", learner_steps}};
    std::ofstream score_out(dir / "score.json");
    score_out << j.dump(2) << '\n';
    sh.last_checkpoint = id;
    ++sh.checkpoints_written;
    sh.best = score;
    sh.best_dir = dir.string();
}

void maybe_validate(Shared& sh, learn::NetworkModel& online, std::uint64_t passes,
                    std::uint64_t learner_steps, bool force) {
    const bool due = passes >= sh.last_validated_pass +
                                   static_cast<std::uint64_t>(sh.cfg.validate_every_passes);
    if (!force && (sh.validated_once && !due)) return;
    if (!force && !sh.validated_once && passes == 0) return;
    if (sh.val_tasks.empty()) return;
    sh.last_validated_pass = passes;
    sh.validated_once = true;
    net::NetworkQ snapshot(online.snapshot());
    ValidationScore score = validate(snapshot, sh.val_tasks, sh.cfg.validation_max_steps);
    if (score.better_than(sh.best)) write_checkpoint(sh, online.network(), score, learner_steps);
}

search::Budget episode_budget(const TrainConfig& cfg, double remaining_seconds) {
    search::Budget b;
    b.max_expansions = cfg.episode_expansions;
    b.max_seconds = cfg.episode_seconds;
    if (remaining_seconds > 0)
        b.max_seconds = b.max_seconds > 0 ? std::min(b.max_seconds, remaining_seconds)
                                          : remaining_seconds;
    return b;
}

} // namespace

TrainResult train(const TrainConfig& cfg, const pddl::Domain& dom,
                  const std::vector<NamedInstance>& train_set,
                  const std::vector<NamedInstance>& validation_set,
                  const std::string& out_dir) {
    if (train_set.empty()) throw AllEmpty("training set is empty");
    if (cfg.batch_size == 0 || cfg.buffer_batches == 0)
        throw std::invalid_argument("batch_size and buffer_batches must be positive");

    fs::create_directories(out_dir);
    Shared sh(cfg, train_set.size());
    sh.out_dir = out_dir;
    for (const auto& ni : train_set)
        sh.train_tasks.push_back(std::make_shared<const ground::GroundTask>(
            ground::ground(dom, ni.instance)));
    for (const auto& ni : validation_set)
        sh.val_tasks.push_back(std::make_shared<const ground::GroundTask>(
            ground::ground(dom, ni.instance)));

    sh.metrics.open(fs::path(out_dir) / "metrics.ndjson", std::ios::trunc);
    if (!sh.metrics) throw std::runtime_error("cannot write metrics under " + out_dir);

    auto sig = graph::RelationSignature::from_domain(dom);
    learn::NetworkModel online(net::init(sig, cfg.net, cfg.seed), cfg.optimizer, cfg.lr_gnn,
                               cfg.lr_readout);
    std::unique_ptr<learn::QModel> target = online.clone_frozen();

    learn::ReplayBuffer buffer(cfg.batch_size * cfg.buffer_batches);
    learn::TargetSpec spec;
    spec.dead_end_return = cfg.dead_end_return;
    learn::LearnerState lst;
    lst.batch_size = cfg.batch_size;
    lst.steps_per_pass = (buffer.capacity() + cfg.batch_size - 1) / cfg.batch_size;
    lst.refresh_passes = cfg.target_refresh_passes;

    Rng rng_sample(cfg.seed);
    Rng rng_learner(cfg.seed ^ 0x5851f42d4c957f2dull);

    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    if (cfg.single_thread) {
        // deterministic loop; time in the metrics stream is virtual
        // (one unit per episode) so reruns are byte-identical
        while (true) {
            if (cfg.max_episodes && sh.episodes >= cfg.max_episodes) break;
            if (cfg.total_seconds > 0 && elapsed() >= cfg.total_seconds) break;

            std::size_t idx = sh.pools.sample(rng_sample, cfg.pool_beta, cfg.pool_order);
            net::NetworkQ snapshot(online.snapshot());
            auto ep = search::run_episode(sh.train_tasks[idx], snapshot, cfg.w,
                                          episode_budget(cfg, 0), cfg.dead_end_return);
            ++sh.episodes;
            sh.pools.update(idx, classify(ep.result));
            sh.window.record(ep.result);
            buffer.push(ep);

            for (int k = 0; k < cfg.steps_per_episode; ++k) {
                if (buffer.size() < cfg.batch_size) break;
                sh.last_loss = learn::learner_step(online, target, buffer, spec, lst,
                                                   rng_learner);
            }
            maybe_validate(sh, online, lst.passes(), lst.steps, false);
            if (cfg.metrics_every_episodes &&
                sh.episodes - sh.last_metrics_episode >= cfg.metrics_every_episodes)
                emit_metrics(sh, static_cast<double>(sh.episodes), buffer.size());
        }
        maybe_validate(sh, online, lst.passes(), lst.steps, true);
        if (sh.window.attempted > 0)
            emit_metrics(sh, static_cast<double>(sh.episodes), buffer.size());
    } else {
        // one learner (this thread) + worker threads that run episodes
        struct Item {
            std::size_t instance;
            search::Episode episode;
        };
        std::mutex mx;
        std::condition_variable cv_push, cv_pop;
        std::deque<Item> queue;
        const std::size_t queue_cap = std::max<std::size_t>(2 * cfg.workers, 4);
        std::atomic<bool> stop{false};

        std::mutex coord_mx;   // pools + sampler rng + snapshot
        std::shared_ptr<const net::QNetwork> published = online.snapshot();

        auto worker_fn = [&](int wid) {
            Rng wrng(cfg.seed ^ (0x9e3779b97f4a7c15ull * (wid + 1)));
            while (!stop.load()) {
                double remaining = cfg.total_seconds > 0 ? cfg.total_seconds - elapsed() : 0;
                if (cfg.total_seconds > 0 && remaining <= 0) break;
                std::size_t idx;
                std::shared_ptr<const net::QNetwork> snap;
                {
                    std::lock_guard lock(coord_mx);
                    idx = sh.pools.sample(wrng, cfg.pool_beta, cfg.pool_order);
                    snap = published;
                }
                net::NetworkQ q(snap);
                auto ep = search::run_episode(sh.train_tasks[idx], q, cfg.w,
                                              episode_budget(cfg, remaining),
                                              cfg.dead_end_return);
                std::unique_lock lock(mx);
                cv_push.wait(lock, [&] { return queue.size() < queue_cap || stop.load(); });
                if (stop.load()) break;
                queue.push_back({idx, std::move(ep)});
                cv_pop.notify_one();
            }
        };

        std::vector<std::thread> workers;
        for (int wid = 0; wid < std::max(1, cfg.workers); ++wid)
            workers.emplace_back(worker_fn, wid);

        while (true) {
            if (cfg.max_episodes && sh.episodes >= cfg.max_episodes) break;
            if (cfg.total_seconds > 0 && elapsed() >= cfg.total_seconds) break;
            Item item;
            {
                std::unique_lock lock(mx);
                if (!cv_pop.wait_for(lock, std::chrono::milliseconds(100),
                                     [&] { return !queue.empty(); }))
                    continue;
                item = std::move(queue.front());
                queue.pop_front();
                cv_push.notify_one();
            }
            ++sh.episodes;
            {
                std::lock_guard lock(coord_mx);
                sh.pools.update(item.instance, classify(item.episode.result));
            }
            sh.window.record(item.episode.result);
            buffer.push(item.episode);

            for (int k = 0; k < cfg.steps_per_episode; ++k) {
                if (buffer.size() < cfg.batch_size) break;
                sh.last_loss = learn::learner_step(online, target, buffer, spec, lst,
                                                   rng_learner);
            }
            {
                std::lock_guard lock(coord_mx);
                published = online.snapshot();
            }
            maybe_validate(sh, online, lst.passes(), lst.steps, false);
            if (cfg.metrics_every_episodes &&
                sh.episodes - sh.last_metrics_episode >= cfg.metrics_every_episodes)
                emit_metrics(sh, elapsed(), buffer.size());
        }

        stop.store(true);
        cv_push.notify_all();
        for (auto& w : workers) w.join();
        maybe_validate(sh, online, lst.passes(), lst.steps, true);
        if (sh.window.attempted > 0) emit_metrics(sh, elapsed(), buffer.size());
    }

    TrainResult result;
    result.metrics_path = (fs::path(out_dir) / "metrics.ndjson").string();
    result.best_checkpoint_dir = sh.best_dir;
    result.best_score = sh.best;
    result.checkpoints_written = sh.checkpoints_written;
    result.episodes = sh.episodes;
    result.learner_steps = lst.steps;
    return result;
}

} // namespace gsp::orch

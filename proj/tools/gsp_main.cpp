#include "gsp/eval.hpp"
#include "gsp/generators.hpp"
#include "gsp/grounding.hpp"
#include "gsp/orchestration.hpp"
#include "gsp/relational_graph.hpp"
#include "gsp/value_net.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

gsp::pddl::Domain load_domain(const std::string& path) {
    return gsp::pddl::parse_domain(read_file(path));
}

bool looks_like_domain(const std::string& text) {
    auto def = text.find("(define");
    if (def == std::string::npos) return false;
    auto head = text.find('(', def + 1);
    return head != std::string::npos && text.compare(head, 8, "(domain ") == 0;
}

// all problem .pddl files in the directory, sorted by filename; a co-located
// domain.pddl is skipped
std::vector<gsp::orch::NamedInstance> load_instances(const std::string& dir,
                                                     const gsp::pddl::Domain& dom) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pddl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<gsp::orch::NamedInstance> out;
    for (const auto& f : files) {
        auto text = read_file(f.string());
        if (looks_like_domain(text)) continue;
        try {
            out.push_back({f.stem().string(), gsp::pddl::parse_instance(text, dom)});
        } catch (const gsp::pddl::ParseError& e) {
            throw std::runtime_error(f.string() + ": " + e.what());
        }
    }
    return out;
}

std::string checkpoint_file(const std::string& path) {
    if (fs::is_directory(path)) return (fs::path(path) / "qnet.bin").string();
    return path;
}

// every TrainConfig field is exposed as --<key> with underscores as dashes
const std::vector<std::string> kConfigKeys = {
    "dim", "layers", "alpha", "hidden_combiner", "hidden_update", "hidden_readout",
    "goal_mode", "w", "workers", "episode_seconds", "episode_expansions", "batch_size",
    "buffer_batches", "lr_gnn", "lr_readout", "target_refresh_passes", "pool_beta",
    "pool_order", "dead_end_return", "total_seconds", "max_episodes", "seed",
    "validate_every_passes", "validation_max_steps", "steps_per_episode",
    "metrics_every_episodes", "single_thread", "optimizer"};

struct TrainArgs {
    std::string domain, instances, val, out, config;
    std::map<std::string, std::string> overrides;
    bool single_thread_flag = false;
};

int run_train(const TrainArgs& args) {
    gsp::orch::TrainConfig cfg;
    if (!args.config.empty()) cfg = gsp::orch::parse_config_file(args.config, cfg);
    for (const auto& key : kConfigKeys) {
        auto it = args.overrides.find(key);
        if (it != args.overrides.end()) gsp::orch::apply_config_entry(cfg, key, it->second);
    }
    if (args.single_thread_flag) cfg.single_thread = true;

    auto dom = load_domain(args.domain);
    auto train_set = load_instances(args.instances, dom);
    std::vector<gsp::orch::NamedInstance> val_set;
    if (!args.val.empty()) val_set = load_instances(args.val, dom);

    auto result = gsp::orch::train(cfg, dom, train_set, val_set, args.out);
    std::cout << "episodes " << result.episodes << ", learner steps " << result.learner_steps
              << ", checkpoints " << result.checkpoints_written << '\n';
    if (!result.best_checkpoint_dir.empty())
        std::cout << "best checkpoint: " << result.best_checkpoint_dir << " (coverage "
                  << result.best_score.coverage << ")\n";
    std::cout << "metrics: " << result.metrics_path << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string domain, instances, checkpoint, out;
    std::vector<std::string> modes{"greedy"};
    double w = 2.0;
    int batch = 1;
    std::uint64_t max_expansions = 10'000;
    double max_seconds = 3600.0;
    int jobs = 1;
};

int run_eval_cmd(const EvalArgs& args) {
    auto dom = load_domain(args.domain);
    auto named = load_instances(args.instances, dom);

    std::vector<gsp::eval::Mode> modes;
    for (const auto& m : args.modes) modes.push_back(gsp::eval::mode_from_name(m));

    bool needs_net = false;
    for (auto m : modes)
        needs_net |= m == gsp::eval::Mode::greedy || m == gsp::eval::Mode::wastar ||
                     m == gsp::eval::Mode::gbfs;

    std::unique_ptr<gsp::net::NetworkQ> q;
    if (needs_net) {
        if (args.checkpoint.empty())
            throw CLI::ValidationError("--checkpoint is required for greedy/wastar/gbfs");
        q = std::make_unique<gsp::net::NetworkQ>(std::make_shared<const gsp::net::QNetwork>(
            gsp::net::load_checkpoint(checkpoint_file(args.checkpoint))));
    }

    std::vector<std::pair<std::string, std::shared_ptr<const gsp::ground::GroundTask>>> tasks;
    for (const auto& ni : named)
        tasks.emplace_back(ni.name, std::make_shared<const gsp::ground::GroundTask>(
                                        gsp::ground::ground(dom, ni.instance)));

    gsp::eval::EvalOptions opts;
    opts.w = args.w;
    opts.batch = args.batch;
    opts.max_expansions = args.max_expansions;
    opts.max_seconds = args.max_seconds;

    auto rows = gsp::eval::run_eval(tasks, modes, q.get(), opts, args.jobs);
    auto sums = gsp::eval::summarize(rows);

    if (named.empty()) std::cerr << "warning: no instances found in " << args.instances << '\n';

    fs::create_directories(args.out);
    std::ofstream((fs::path(args.out) / "results.csv")) << gsp::eval::rows_to_csv(rows);
    std::ofstream((fs::path(args.out) / "results.ndjson")) << gsp::eval::rows_to_ndjson(rows);
    std::ofstream((fs::path(args.out) / "summary.csv")) << gsp::eval::summaries_to_csv(sums);
    std::cout << gsp::eval::summaries_to_csv(sums);
    return kExitOk;
}

struct GenArgs {
    std::string domain, out;
    gsp::gen::GenOptions opts;
};

int run_gen(const GenArgs& args) {
    if (!gsp::gen::known_domain(args.domain))
        throw std::runtime_error("unknown domain '" + args.domain + "'; bundled: blocksworld, "
                                 "gripper, spanner, minisokoban");
    auto texts = gsp::gen::generate_texts(args.domain, args.opts);
    fs::create_directories(args.out);
    std::ofstream(fs::path(args.out) / "domain.pddl") << gsp::gen::domain_text(args.domain);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "p%03zu.pddl", i);
        std::ofstream(fs::path(args.out) / name) << texts[i];
    }
    std::cout << "wrote " << texts.size() << " instances to " << args.out << '\n';
    return kExitOk;
}

struct InspectArgs {
    std::string domain, instance;
    bool graph = false;
    std::string goal_mode = "distinguished";
};

int run_inspect(const InspectArgs& args) {
    auto dom = load_domain(args.domain);
    auto inst = gsp::pddl::parse_instance(read_file(args.instance), dom);
    auto task = gsp::ground::ground(dom, inst);
    auto applicable = gsp::ground::applicable_actions(task, task.init);

    std::cout << "domain " << task.domain_name << ", instance " << task.instance_name << '\n'
              << "objects " << task.object_names.size() << ", atoms " << task.atoms.size()
              << ", actions " << task.actions.size() << '\n'
              << "init " << task.init.size() << " atoms, goal " << task.goal.size()
              << " atoms, applicable(init) " << applicable.size() << '\n'
              << "h_max(init) " << gsp::eval::h_max(task, task.init) << '\n';
    if (args.graph) {
        auto sig = gsp::graph::RelationSignature::from_domain(dom);
        auto mode = args.goal_mode == "literal" ? gsp::graph::GoalMode::literal
                                                : gsp::graph::GoalMode::distinguished;
        auto g = gsp::graph::encode(task, task.init, applicable, sig, mode);
        std::cout << gsp::graph::dump(g, task, sig);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gsp: search-guided Q-learning for classical planning"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a Q heuristic on a set of instances");
    train->add_option("--domain", train_args.domain, "domain PDDL file")->required();
    train->add_option("--instances", train_args.instances, "training instance directory")
        ->required();
    train->add_option("--val", train_args.val, "validation instance directory");
    train->add_option("--out", train_args.out, "output run directory")->required();
    train->add_option("--config", train_args.config, "key = value config file");
    train->add_flag("--single-thread", train_args.single_thread_flag,
                    "deterministic single-thread mode");
    for (const auto& key : kConfigKeys) {
        if (key == "single_thread") continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        train->add_option_function<std::string>(
            flag,
            [&train_args, key](const std::string& v) { train_args.overrides[key] = v; },
            "config override (" + key + ")");
    }

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or baseline heuristics");
    eval->add_option("--domain", eval_args.domain, "domain PDDL file")->required();
    eval->add_option("--instances", eval_args.instances, "test instance directory")->required();
    eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file or ckpt_<n> dir");
    eval->add_option("--mode", eval_args.modes,
                     "evaluation modes: greedy wastar gbfs hmax blind")
        ->delimiter(',');
    eval->add_option("--w", eval_args.w, "weight for wastar/hmax/blind");
    eval->add_option("--batch", eval_args.batch, "batched pop size b");
    eval->add_option("--max-expansions", eval_args.max_expansions, "per-instance budget");
    eval->add_option("--max-seconds", eval_args.max_seconds, "per-instance budget");
    eval->add_option("--jobs", eval_args.jobs, "parallel instances");
    eval->add_option("--out", eval_args.out, "output directory for result tables")->required();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate solvable instances of a bundled domain");
    gen->add_option("domain", gen_args.domain, "blocksworld|gripper|spanner|minisokoban")
        ->required();
    gen->add_option("--out", gen_args.out, "output directory")->required();
    gen->add_option("--count", gen_args.opts.count, "number of instances");
    gen->add_option("--seed", gen_args.opts.seed, "generator seed");
    gen->add_option("--blocks", gen_args.opts.blocks, "blocksworld: block count");
    gen->add_option("--balls", gen_args.opts.balls, "gripper: ball count");
    gen->add_option("--locations", gen_args.opts.locations, "spanner: corridor length");
    gen->add_option("--spanners", gen_args.opts.spanners, "spanner: spanner count");
    gen->add_option("--nuts", gen_args.opts.nuts, "spanner: nut count");
    gen->add_option("--grid", gen_args.opts.grid, "minisokoban: grid size");
    gen->add_option("--boxes", gen_args.opts.boxes, "minisokoban: box count");

    InspectArgs inspect_args;
    auto* inspect = app.add_subcommand("inspect", "dump a ground task / relational graph");
    inspect->add_option("--domain", inspect_args.domain, "domain PDDL file")->required();
    inspect->add_option("--instance", inspect_args.instance, "instance PDDL file")->required();
    inspect->add_flag("--graph", inspect_args.graph, "dump the relational graph of the init state");
    inspect->add_option("--goal-mode", inspect_args.goal_mode, "distinguished|literal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) return run_eval_cmd(eval_args);
        if (gen->parsed()) return run_gen(gen_args);
        if (inspect->parsed()) return run_inspect(inspect_args);
        return kExitUsage;
    } catch (const gsp::pddl::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

#include "gsp/generators.hpp"

#include "gsp/grounding.hpp"
#include "gsp/oracle.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace gsp::gen {

namespace {

const char* kBlocksworld = R"((define (domain blocksworld)
  (:requirements :strips :typing)
  (:types block - object)
  (:predicates (on ?x - block ?y - block) (ontable ?x - block)
               (clear ?x - block) (holding ?x - block))
  (:action pickup
    :parameters (?x - block)
    :precondition (and (ontable ?x) (clear ?x))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x))))
  (:action putdown
    :parameters (?x - block)
    :precondition (and (holding ?x))
    :effect (and (ontable ?x) (clear ?x) (not (holding ?x))))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x))))
)
)";

const char* kGripper = R"((define (domain gripper)
  (:requirements :strips)
  (:predicates (room ?r) (ball ?b) (gripper ?g) (at-robby ?r) (at ?b ?r)
               (free ?g) (carry ?b ?g))
  (:action move
    :parameters (?from ?to)
    :precondition (and (room ?from) (room ?to) (at-robby ?from))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b ?r ?g)
    :precondition (and (ball ?b) (room ?r) (gripper ?g) (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b ?r ?g)
    :precondition (and (ball ?b) (room ?r) (gripper ?g) (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g))))
)
)";

const char* kSpanner = R"((define (domain spanner)
  (:requirements :strips :typing)
  (:types location locatable - object
          man nut spanner - locatable)
  (:predicates (at ?m - locatable ?l - location) (carrying ?m - man ?s - spanner)
               (usable ?s - spanner) (link ?l1 - location ?l2 - location)
               (tightened ?n - nut) (loose ?n - nut))
  (:action walk
    :parameters (?start - location ?end - location ?m - man)
    :precondition (and (at ?m ?start) (link ?start ?end))
    :effect (and (at ?m ?end) (not (at ?m ?start))))
  (:action pickup_spanner
    :parameters (?l - location ?s - spanner ?m - man)
    :precondition (and (at ?m ?l) (at ?s ?l))
    :effect (and (carrying ?m ?s) (not (at ?s ?l))))
  (:action tighten_nut
    :parameters (?l - location ?s - spanner ?m - man ?n - nut)
    :precondition (and (at ?m ?l) (at ?n ?l) (carrying ?m ?s) (usable ?s) (loose ?n))
    :effect (and (tightened ?n) (not (loose ?n)) (not (usable ?s))))
)
)";

const char* kMinisokoban = R"((define (domain minisokoban)
  (:requirements :strips :typing)
  (:types cell - object)
  (:predicates (at-player ?c - cell) (has-box ?c - cell) (clear ?c - cell)
               (adjacent ?a - cell ?b - cell) (push-line ?p - cell ?b - cell ?d - cell))
  (:action move
    :parameters (?from - cell ?to - cell)
    :precondition (and (at-player ?from) (adjacent ?from ?to) (clear ?to))
    :effect (and (at-player ?to) (clear ?from) (not (at-player ?from)) (not (clear ?to))))
  (:action push
    :parameters (?p - cell ?b - cell ?d - cell)
    :precondition (and (at-player ?p) (has-box ?b) (push-line ?p ?b ?d) (clear ?d))
    :effect (and (at-player ?b) (has-box ?d) (clear ?p)
                 (not (at-player ?p)) (not (has-box ?b)) (not (clear ?d))))
)
)";

struct Maker {
    virtual ~Maker() = default;
    virtual pddl::Instance make(Rng& rng, const GenOptions& opts, int idx) const = 0;
    virtual bool always_solvable() const { return true; }
};

pddl::Atom atom(std::string pred, std::vector<std::string> args) {
    return {std::move(pred), std::move(args)};
}

// random partition of shuffled blocks into towers, bottom first
std::vector<std::vector<std::string>> random_towers(Rng& rng,
                                                    const std::vector<std::string>& blocks) {
    std::vector<std::string> order = blocks;
    rng.shuffle(order);
    std::vector<std::vector<std::string>> towers;
    for (const auto& b : order) {
        if (towers.empty() || rng.coin(0.4))
            towers.push_back({b});
        else
            towers.back().push_back(b);
    }
    return towers;
}

struct BlocksMaker : Maker {
    pddl::Instance make(Rng& rng, const GenOptions& opts, int idx) const override {
        const int n = std::max(1, opts.blocks);
        std::vector<std::string> blocks;
        for (int i = 1; i <= n; ++i) blocks.push_back("b" + std::to_string(i));

        pddl::Instance inst;
        inst.name = "bw" + std::to_string(n) + "_s" + std::to_string(opts.seed) + "_i" +
                    std::to_string(idx);
        inst.domain_name = "blocksworld";
        for (const auto& b : blocks) inst.objects.push_back({b, "block"});

        for (const auto& tower : random_towers(rng, blocks)) {
            inst.init.push_back(atom("ontable", {tower.front()}));
            for (std::size_t i = 1; i < tower.size(); ++i)
                inst.init.push_back(atom("on", {tower[i], tower[i - 1]}));
            inst.init.push_back(atom("clear", {tower.back()}));
        }
        for (const auto& tower : random_towers(rng, blocks))
            for (std::size_t i = 1; i < tower.size(); ++i)
                inst.goal.push_back(atom("on", {tower[i], tower[i - 1]}));
        if (inst.goal.empty())
            for (const auto& b : blocks) inst.goal.push_back(atom("ontable", {b}));
        return inst;
    }
};

struct GripperMaker : Maker {
    pddl::Instance make(Rng& rng, const GenOptions& opts, int idx) const override {
        const int n = std::max(1, opts.balls);
        pddl::Instance inst;
        inst.name = "gripper" + std::to_string(n) + "_s" + std::to_string(opts.seed) + "_i" +
                    std::to_string(idx);
        inst.domain_name = "gripper";
        const std::vector<std::string> rooms{"rooma", "roomb"};
        for (const auto& r : rooms) {
            inst.objects.push_back({r, "object"});
            inst.init.push_back(atom("room", {r}));
        }
        for (const auto& g : {"left", "right"}) {
            inst.objects.push_back({g, "object"});
            inst.init.push_back(atom("gripper", {g}));
            inst.init.push_back(atom("free", {g}));
        }
        inst.init.push_back(atom("at-robby", {rng.pick(rooms)}));

        // delivery family: every ball must end up in one target room
        std::string target = rng.pick(rooms);
        bool any_displaced = false;
        std::vector<std::string> from(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            from[i] = rng.pick(rooms);
            any_displaced |= from[i] != target;
        }
        if (!any_displaced) from[static_cast<std::size_t>(rng.index(n))] =
            target == "rooma" ? "roomb" : "rooma";
        for (int i = 1; i <= n; ++i) {
            std::string ball = "ball" + std::to_string(i);
            inst.objects.push_back({ball, "object"});
            inst.init.push_back(atom("ball", {ball}));
            inst.init.push_back(atom("at", {ball, from[i - 1]}));
            inst.goal.push_back(atom("at", {ball, target}));
        }
        return inst;
    }
};

struct SpannerMaker : Maker {
    pddl::Instance make(Rng& rng, const GenOptions& opts, int idx) const override {
        const int locs = std::max(1, opts.locations);
        const int nuts = std::max(1, opts.nuts);
        const int spanners = std::max(nuts, opts.spanners);   // solvable by construction

        pddl::Instance inst;
        inst.name = "spanner" + std::to_string(locs) + "_s" + std::to_string(opts.seed) +
                    "_i" + std::to_string(idx);
        inst.domain_name = "spanner";

        std::vector<std::string> path{"shed"};
        for (int i = 1; i <= locs; ++i) path.push_back("loc" + std::to_string(i));
        path.push_back("gate");
        for (const auto& l : path) inst.objects.push_back({l, "location"});
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            inst.init.push_back(atom("link", {path[i], path[i + 1]}));

        inst.objects.push_back({"bob", "man"});
        inst.init.push_back(atom("at", {"bob", "shed"}));

        // spanners anywhere before the gate
        for (int i = 1; i <= spanners; ++i) {
            std::string s = "spanner" + std::to_string(i);
            inst.objects.push_back({s, "spanner"});
            inst.init.push_back(atom("usable", {s}));
            inst.init.push_back(
                atom("at", {s, path[static_cast<std::size_t>(rng.index(path.size() - 1))]}));
        }
        for (int i = 1; i <= nuts; ++i) {
            std::string nut = "nut" + std::to_string(i);
            inst.objects.push_back({nut, "nut"});
            inst.init.push_back(atom("at", {nut, "gate"}));
            inst.init.push_back(atom("loose", {nut}));
            inst.goal.push_back(atom("tightened", {nut}));
        }
        return inst;
    }
};

struct SokobanMaker : Maker {
    bool always_solvable() const override { return false; }

    pddl::Instance make(Rng& rng, const GenOptions& opts, int idx) const override {
        const int g = std::max(3, opts.grid);
        const int boxes = std::clamp(opts.boxes, 1, g - 1);

        pddl::Instance inst;
        inst.name = "soko" + std::to_string(g) + "x" + std::to_string(g) + "_s" +
                    std::to_string(opts.seed) + "_i" + std::to_string(idx);
        inst.domain_name = "minisokoban";

        auto cell = [](int r, int c) {
            return "c" + std::to_string(r) + "_" + std::to_string(c);
        };
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) inst.objects.push_back({cell(r, c), "cell"});

        const int dr[4] = {0, 0, 1, -1};
        const int dc[4] = {1, -1, 0, 0};
        auto inside = [&](int r, int c) { return r >= 0 && r < g && c >= 0 && c < g; };
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c)
                for (int k = 0; k < 4; ++k) {
                    int r2 = r + dr[k], c2 = c + dc[k];
                    if (!inside(r2, c2)) continue;
                    inst.init.push_back(atom("adjacent", {cell(r, c), cell(r2, c2)}));
                    int r3 = r2 + dr[k], c3 = c2 + dc[k];
                    if (inside(r3, c3))
                        inst.init.push_back(
                            atom("push-line", {cell(r, c), cell(r2, c2), cell(r3, c3)}));
                }

        // player + boxes on distinct cells; goals on distinct cells
        std::vector<int> cells(static_cast<std::size_t>(g) * g);
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
        rng.shuffle(cells);
        auto cname = [&](int id) { return cell(id / g, id % g); };

        std::set<int> occupied;
        inst.init.push_back(atom("at-player", {cname(cells[0])}));
        occupied.insert(cells[0]);
        for (int b = 0; b < boxes; ++b) {
            inst.init.push_back(atom("has-box", {cname(cells[1 + b])}));
            occupied.insert(cells[1 + b]);
        }
        for (int id = 0; id < g * g; ++id)
            if (!occupied.count(id)) inst.init.push_back(atom("clear", {cname(id)}));

        std::vector<int> goal_cells(cells.begin() + 1 + boxes, cells.end());
        rng.shuffle(goal_cells);
        for (int b = 0; b < boxes; ++b)
            inst.goal.push_back(atom("has-box", {cname(goal_cells[b])}));
        return inst;
    }
};

const Maker& maker_for(const std::string& name) {
    static const BlocksMaker blocks;
    static const GripperMaker gripper;
    static const SpannerMaker spanner;
    static const SokobanMaker sokoban;
    if (name == "blocksworld") return blocks;
    if (name == "gripper") return gripper;
    if (name == "spanner") return spanner;
    if (name == "minisokoban") return sokoban;
    throw std::invalid_argument("unknown bundled domain '" + name + "'");
}

} // namespace

std::vector<std::string> domain_names() {
    return {"blocksworld", "gripper", "spanner", "minisokoban"};
}

bool known_domain(const std::string& name) {
    auto names = domain_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string domain_text(const std::string& name) {
    if (name == "blocksworld") return kBlocksworld;
    if (name == "gripper") return kGripper;
    if (name == "spanner") return kSpanner;
    if (name == "minisokoban") return kMinisokoban;
    throw std::invalid_argument("unknown bundled domain '" + name + "'");
}

std::vector<pddl::Instance> generate(const std::string& domain_name, const GenOptions& opts) {
    const Maker& maker = maker_for(domain_name);
    const pddl::Domain dom = pddl::parse_domain(domain_text(domain_name));

    std::vector<pddl::Instance> out;
    std::set<std::string> seen;
    Rng rng(opts.seed);
    for (int i = 0; i < opts.count; ++i) {
        bool accepted = false;
        // re-roll duplicates and unsolvable layouts; tiny configuration
        // spaces (e.g. one block) may exhaust distinct layouts, in which
        // case duplicates are allowed through
        for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
            pddl::Instance inst = maker.make(rng, opts, i);
            std::string key = pddl::to_pddl(inst, dom);
            if (seen.count(key) && attempt + 1 < 64) continue;
            auto task = ground::ground(dom, inst);
            auto plan = oracle::bfs_plan(task, opts.solvability_cap);
            bool proven = plan.has_value();
            if (!proven && !maker.always_solvable()) continue;
            seen.insert(key);
            out.push_back(std::move(inst));
            accepted = true;
        }
        if (!accepted)
            throw std::runtime_error("could not generate a solvable '" + domain_name +
                                     "' instance for these parameters");
    }
    return out;
}

std::vector<std::string> generate_texts(const std::string& domain_name,
                                        const GenOptions& opts) {
    const pddl::Domain dom = pddl::parse_domain(domain_text(domain_name));
    std::vector<std::string> out;
    for (const auto& inst : generate(domain_name, opts))
        out.push_back(pddl::to_pddl(inst, dom));
    return out;
}

} // namespace gsp::gen

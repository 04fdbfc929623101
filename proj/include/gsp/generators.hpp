#pragma once

#include "gsp/pddl.hpp"
#include "gsp/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gsp::gen {

struct GenOptions {
    int count = 10;
    std::uint64_t seed = 0;
    // blocksworld
    int blocks = 4;
    // gripper
    int balls = 3;
    // spanner
    int locations = 4;
    int spanners = 2;
    int nuts = 2;
    // minisokoban
    int grid = 4;
    int boxes = 1;
    // BFS state cap for the solvability check at generation time
    std::size_t solvability_cap = 200'000;
};

std::vector<std::string> domain_names();
bool known_domain(const std::string& name);
std::string domain_text(const std::string& name);

// Seeded instance generation. Every emitted instance parses against the
// bundled domain and is solvable: proven by breadth-first search when the
// state space fits under the cap, by construction otherwise (blocksworld,
// gripper, and spanner instances are built solvable; minisokoban layouts
// are re-rolled until the oracle finds a plan).
std::vector<pddl::Instance> generate(const std::string& domain_name, const GenOptions& opts);

std::vector<std::string> generate_texts(const std::string& domain_name,
                                        const GenOptions& opts);

} // namespace gsp::gen

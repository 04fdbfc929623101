#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gsp {

// mt19937_64 with hand-rolled transforms: the std distributions are
// implementation-defined, which would break frozen test values and
// cross-run reproducibility of seeded pipelines.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, n)
    std::uint64_t index(std::uint64_t n) {
        // rejection sampling, no modulo bias
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x = gen_();
        while (x > limit) x = gen_();
        return x % n;
    }

    // uniform in [0, 1)
    double real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double real(double lo, double hi) { return lo + (hi - lo) * real(); }

    bool coin(double p) { return real() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(index(i))]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(index(v.size()))];
    }

    Rng split() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

private:
    std::mt19937_64 gen_;
};

} // namespace gsp

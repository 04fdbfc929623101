#pragma once

#include "gsp/grounding.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace gsp {

// Read-only action-value source used by the search engines. Implementations
// must be safe for concurrent evaluate() calls.
class QEvaluator {
public:
    virtual ~QEvaluator() = default;

    // Q(s,a) for each a in `applicable`, in the same order.
    virtual std::vector<double> evaluate(const ground::GroundTask& task,
                                         const ground::State& s,
                                         std::span<const ground::ActionId> applicable) const = 0;
};

class ZeroQ : public QEvaluator {
public:
    std::vector<double> evaluate(const ground::GroundTask&, const ground::State&,
                                 std::span<const ground::ActionId> applicable) const override {
        return std::vector<double>(applicable.size(), 0.0);
    }
};

// Hand-set values per (state, action); used by trace tests and stubs.
class FixedQ : public QEvaluator {
public:
    explicit FixedQ(double default_value = 0.0) : default_(default_value) {}

    void set(const ground::State& s, ground::ActionId a, double q) {
        table_[key(s, a)] = q;
    }

    std::vector<double> evaluate(const ground::GroundTask&, const ground::State& s,
                                 std::span<const ground::ActionId> applicable) const override {
        std::vector<double> out;
        out.reserve(applicable.size());
        for (ground::ActionId a : applicable) {
            auto it = table_.find(key(s, a));
            out.push_back(it == table_.end() ? default_ : it->second);
        }
        return out;
    }

private:
    static std::uint64_t key(const ground::State& s, ground::ActionId a) {
        std::uint64_t h = s.hash();
        h ^= 0x9e3779b97f4a7c15ull + a + (h << 6) + (h >> 2);
        return h;
    }

    std::unordered_map<std::uint64_t, double> table_;
    double default_;
};

} // namespace gsp

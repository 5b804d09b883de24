#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "fer/tensor.hpp"

namespace fer {

struct AdamConfig {
    double lr = 0.001;  // paper's starting learning rate
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam update. t is the 1-based step index of this
/// update; m and v are the running moment accumulators (updated in place).
void adam_update(std::span<double> theta, std::span<const double> grad,
                 std::span<double> m, std::span<double> v,
                 long long t, const AdamConfig& cfg);

/// Moment state and step counter for a set of named parameters. A step
/// first validates every gradient; a non-finite gradient rejects the whole
/// step (no parameter or moment is touched) and names the offending tensor.
class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<Parameter*>& params);

    long long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    /// Moment accumulators for one parameter (empty before its first step).
    struct Slot {
        std::vector<double> m, v;
    };
    const Slot* slot(const std::string& id) const;

private:
    AdamConfig cfg_;
    long long t_ = 0;
    std::unordered_map<std::string, Slot> slots_;
};

}  // namespace fer

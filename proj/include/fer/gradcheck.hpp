#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fer/tensor.hpp"

namespace fer {

struct GradCheckOptions {
    double epsilon = 1e-4;   // step is epsilon * max(1, |theta_i|)
    double tolerance = 1e-4;
    double rel_floor = 1e-6;          // denominators below this are floored
    int max_coords_per_param = -1;    // -1: sweep every coordinate
    std::uint64_t seed = 0;           // coordinate sampling stream
};

struct GradCheckEntry {
    std::string id;
    double max_rel_error = 0.0;
    int coords_checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Compares analytic parameter gradients against central finite differences
/// (f(theta+e) - f(theta-e)) / 2e of a deterministic scalar loss.
///
/// loss_fn evaluates the loss at the current parameter values and must not
/// touch gradients. grad_fn (called once, first) fills each parameter's
/// analytic gradient; pass nullptr if gradients are already in place.
/// Parameters are restored exactly after every probe.
GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const std::function<void()>& grad_fn,
                                        const std::vector<Parameter*>& params,
                                        const GradCheckOptions& opts = {});

}  // namespace fer

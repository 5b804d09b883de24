#include "fer/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "fer/rng.hpp"

namespace fer {

GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const std::function<void()>& grad_fn,
                                        const std::vector<Parameter*>& params,
                                        const GradCheckOptions& opts) {
    if (grad_fn) grad_fn();

    GradCheckReport report;
    report.tolerance = opts.tolerance;

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        auto& tensor = *p->tensor;
        tensor.ensure_grad();
        const std::size_t n = tensor.values.size();

        std::vector<std::size_t> coords;
        if (opts.max_coords_per_param < 0 || static_cast<std::size_t>(opts.max_coords_per_param) >= n) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            Rng rng(derive_seed(opts.seed, pi));
            for (int i = 0; i < opts.max_coords_per_param; ++i)
                coords.push_back(static_cast<std::size_t>(rng.uniform_index(n)));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        }

        GradCheckEntry entry;
        entry.id = p->id;
        for (std::size_t i : coords) {
            const double saved = tensor.values[i];
            const double delta = opts.epsilon * std::max(1.0, std::abs(saved));
            tensor.values[i] = saved + delta;
            const double f_plus = loss_fn();
            tensor.values[i] = saved - delta;
            const double f_minus = loss_fn();
            tensor.values[i] = saved;
            const double fd = (f_plus - f_minus) / (2.0 * delta);
            const double an = tensor.grad[i];
            const double denom = std::max({std::abs(fd), std::abs(an), opts.rel_floor});
            entry.max_rel_error = std::max(entry.max_rel_error, std::abs(fd - an) / denom);
            ++entry.coords_checked;
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    report.passed = report.max_rel_error < opts.tolerance;
    return report;
}

}  // namespace fer

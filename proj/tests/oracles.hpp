#pragma once

// Independent reference implementations used as test oracles. These are
// deliberately naive (nested loops, separate code paths) so they share no
// logic with the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

/// Six-nested-loop cross-correlation with zero same-padding, stride 1.
inline std::vector<double> conv2d(const std::vector<double>& x, int C, int H, int W,
                                  const std::vector<double>& w, int F, int k,
                                  const std::vector<double>& b) {
    const int P = k / 2;
    std::vector<double> y(static_cast<std::size_t>(F) * H * W, 0.0);
    for (int f = 0; f < F; ++f)
        for (int oy = 0; oy < H; ++oy)
            for (int ox = 0; ox < W; ++ox) {
                double acc = b[f];
                for (int c = 0; c < C; ++c)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy + ky - P;
                            const int ix = ox + kx - P;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += w[((static_cast<std::size_t>(f) * C + c) * k + ky) * k + kx] *
                                   x[(static_cast<std::size_t>(c) * H + iy) * W + ix];
                        }
                y[(static_cast<std::size_t>(f) * H + oy) * W + ox] = acc;
            }
    return y;
}

/// Exhaustive 2x2 stride-2 window max with clipped borders.
inline std::vector<double> maxpool2d(const std::vector<double>& x, int C, int H, int W) {
    const int OH = (H + 1) / 2, OW = (W + 1) / 2;
    std::vector<double> y(static_cast<std::size_t>(C) * OH * OW);
    for (int c = 0; c < C; ++c)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox) {
                double best = -1e300;
                for (int iy = 2 * oy; iy < std::min(2 * oy + 2, H); ++iy)
                    for (int ix = 2 * ox; ix < std::min(2 * ox + 2, W); ++ix)
                        best = std::max(best, x[(static_cast<std::size_t>(c) * H + iy) * W + ix]);
                y[(static_cast<std::size_t>(c) * OH + oy) * OW + ox] = best;
            }
    return y;
}

inline std::vector<double> dense(const std::vector<double>& x, const std::vector<double>& w,
                                 const std::vector<double>& b, int m, int n) {
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) {
        double acc = b[i];
        for (int j = 0; j < n; ++j) acc += w[static_cast<std::size_t>(i) * n + j] * x[j];
        y[i] = acc;
    }
    return y;
}

/// Extended-precision softmax.
inline std::vector<double> softmax(const std::vector<double>& x) {
    long double mx = x[0];
    for (double v : x) mx = std::max<long double>(mx, v);
    long double sum = 0.0L;
    std::vector<long double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(static_cast<long double>(x[i]) - mx);
        sum += e[i];
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<double>(e[i] / sum);
    return y;
}

/// Symbolic expansion of the Adam recurrence for a constant gradient,
/// starting from zeroed moments.
inline double adam_constant_gradient(double theta0, double g, int steps, double lr,
                                     double beta1, double beta2, double eps) {
    double m = 0.0, v = 0.0, theta = theta0;
    for (int t = 1; t <= steps; ++t) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double mhat = m / (1.0 - std::pow(beta1, t));
        const double vhat = v / (1.0 - std::pow(beta2, t));
        theta -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Brute-force enumeration of the coherence objective. Written directly from
// the formulas with explicit index lists; shares nothing with the library's
// term enumerator.
// ---------------------------------------------------------------------------

using Dist = std::array<double, 7>;

/// A batch for oracle purposes: per group, per frame, a label (0 = none,
/// 1..7 otherwise), a weight, and per-representation distributions indexed
/// like fer::all_representations() (0..6 appearance of face, mouth, left eye,
/// right eye, left eyebrow, right eyebrow, nose; 7..14 shape of those plus jaw).
struct LossBatch {
    struct Frame {
        int label = 0;
        double weight = 0.0;
        std::array<Dist, 15> dist{};
    };
    std::vector<std::vector<Frame>> groups;
};

struct LossTerms {
    double ce_app = 0, ce_shape = 0, temp_app = 0, temp_shape = 0, part_app = 0, part_shape = 0,
           app_shape = 0;
    long long n_ce_app = 0, n_ce_shape = 0, n_temp_app = 0, n_temp_shape = 0, n_part_app = 0,
              n_part_shape = 0, n_app_shape = 0;
};

inline double dot7(const Dist& p, const Dist& q) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += p[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
    return s;
}

/// active[r]: whether representation r participates.
inline LossTerms loss_terms_reference(const LossBatch& batch, const std::array<bool, 15>& active) {
    LossTerms t;
    const int app_reps[7] = {0, 1, 2, 3, 4, 5, 6};
    const int shape_reps[8] = {7, 8, 9, 10, 11, 12, 13, 14};

    for (const auto& group : batch.groups) {
        // Eq. (3): weighted cross-entropy over labeled frames, per kind.
        for (const auto& frame : group) {
            if (frame.label == 0) continue;
            for (int r : app_reps)
                if (active[static_cast<std::size_t>(r)]) {
                    const double p = frame.dist[static_cast<std::size_t>(r)][static_cast<std::size_t>(frame.label - 1)];
                    t.ce_app += frame.weight * -std::log(p < 1e-12 ? 1e-12 : p);
                    ++t.n_ce_app;
                }
            for (int r : shape_reps)
                if (active[static_cast<std::size_t>(r)]) {
                    const double p = frame.dist[static_cast<std::size_t>(r)][static_cast<std::size_t>(frame.label - 1)];
                    t.ce_shape += frame.weight * -std::log(p < 1e-12 ? 1e-12 : p);
                    ++t.n_ce_shape;
                }
        }
        // Temporal coherence: consecutive frames, all reps.
        for (std::size_t i = 1; i < group.size(); ++i) {
            for (int r : app_reps)
                if (active[static_cast<std::size_t>(r)]) {
                    t.temp_app += 1.0 - dot7(group[i - 1].dist[static_cast<std::size_t>(r)],
                                             group[i].dist[static_cast<std::size_t>(r)]);
                    ++t.n_temp_app;
                }
            for (int r : shape_reps)
                if (active[static_cast<std::size_t>(r)]) {
                    t.temp_shape += 1.0 - dot7(group[i - 1].dist[static_cast<std::size_t>(r)],
                                               group[i].dist[static_cast<std::size_t>(r)]);
                    ++t.n_temp_shape;
                }
        }
        // Part coherence: face vs each same-kind part (jaw only for shape).
        for (const auto& frame : group) {
            if (active[0])
                for (int r = 1; r <= 6; ++r)
                    if (active[static_cast<std::size_t>(r)]) {
                        t.part_app += 1.0 - dot7(frame.dist[0], frame.dist[static_cast<std::size_t>(r)]);
                        ++t.n_part_app;
                    }
            if (active[7])
                for (int r = 8; r <= 14; ++r)
                    if (active[static_cast<std::size_t>(r)]) {
                        t.part_shape += 1.0 - dot7(frame.dist[7], frame.dist[static_cast<std::size_t>(r)]);
                        ++t.n_part_shape;
                    }
        }
        // Eq. (4): appearance vs shape per part, jaw excluded.
        for (const auto& frame : group) {
            for (int p = 0; p <= 6; ++p)
                if (active[static_cast<std::size_t>(p)] && active[static_cast<std::size_t>(p + 7)]) {
                    t.app_shape += 1.0 - dot7(frame.dist[static_cast<std::size_t>(p)],
                                              frame.dist[static_cast<std::size_t>(p + 7)]);
                    ++t.n_app_shape;
                }
        }
    }
    return t;
}

/// Eq. (5) with optional per-term normalization by summand count.
inline double loss_total_reference(const LossTerms& t, double lt, double lc, double lr,
                                   bool normalized) {
    auto norm = [&](double v, long long n) { return normalized ? (n > 0 ? v / n : 0.0) : v; };
    return norm(t.ce_app, t.n_ce_app) + norm(t.ce_shape, t.n_ce_shape) +
           lt * (norm(t.temp_app, t.n_temp_app) + norm(t.temp_shape, t.n_temp_shape)) +
           lc * (norm(t.part_app, t.n_part_app) + norm(t.part_shape, t.n_part_shape)) +
           lr * norm(t.app_shape, t.n_app_shape);
}

}  // namespace oracle

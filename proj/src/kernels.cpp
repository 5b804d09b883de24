#include "fer/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "fer/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#define FER_PARALLEL_FOR _Pragma("omp parallel for schedule(static) num_threads(fer::compute_threads())")
#else
#define FER_PARALLEL_FOR
#endif

namespace fer::kernels {

namespace {

// Dot product with four independent accumulators. The summation order is
// fixed, so results are bit-identical across runs; the split lets the
// compiler vectorize the reduction without reassociating on its own.
inline double dot_unrolled(const double* a, const double* b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

void conv2d_forward(const double* x, int C, int H, int W,
                    const double* w, int F, int k,
                    const double* b, double* y) {
    const int P = k / 2;
    const int plane = H * W;
    FER_PARALLEL_FOR
    for (int f = 0; f < F; ++f) {
        double* yf = y + static_cast<std::int64_t>(f) * plane;
        std::fill(yf, yf + plane, b[f]);
        for (int c = 0; c < C; ++c) {
            const double* xc = x + static_cast<std::int64_t>(c) * plane;
            const double* wfc = w + (static_cast<std::int64_t>(f) * C + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const int dy = ky - P;
                const int oy0 = std::max(0, -dy);
                const int oy1 = std::min(H, H - dy);
                for (int oy = oy0; oy < oy1; ++oy) {
                    const double* xrow = xc + (oy + dy) * W;
                    double* yrow = yf + oy * W;
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wfc[ky * k + kx];
                        const int dx = kx - P;
                        const int ox0 = std::max(0, -dx);
                        const int ox1 = std::min(W, W - dx);
                        const double* xp = xrow + dx;
                        for (int ox = ox0; ox < ox1; ++ox) yrow[ox] += wv * xp[ox];
                    }
                }
            }
        }
    }
}

void conv2d_backward_input(const double* gy, int F, int H, int W,
                           const double* w, int C, int k, double* gx) {
    const int P = k / 2;
    const int plane = H * W;
    FER_PARALLEL_FOR
    for (int c = 0; c < C; ++c) {
        double* gxc = gx + static_cast<std::int64_t>(c) * plane;
        for (int f = 0; f < F; ++f) {
            const double* gyf = gy + static_cast<std::int64_t>(f) * plane;
            const double* wfc = w + (static_cast<std::int64_t>(f) * C + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const int dy = ky - P;
                // gx[iy] receives from gy[iy - dy]; valid when 0 <= iy - dy < H
                const int iy0 = std::max(0, dy);
                const int iy1 = std::min(H, H + dy);
                for (int iy = iy0; iy < iy1; ++iy) {
                    const double* gyrow = gyf + (iy - dy) * W;
                    double* gxrow = gxc + iy * W;
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wfc[ky * k + kx];
                        const int dx = kx - P;
                        const int ix0 = std::max(0, dx);
                        const int ix1 = std::min(W, W + dx);
                        const double* gp = gyrow - dx;
                        for (int ix = ix0; ix < ix1; ++ix) gxrow[ix] += wv * gp[ix];
                    }
                }
            }
        }
    }
}

void conv2d_backward_params(const double* gy, int F, int H, int W,
                            const double* x, int C, int k,
                            double* gw, double* gb) {
    const int P = k / 2;
    const int plane = H * W;
    FER_PARALLEL_FOR
    for (int f = 0; f < F; ++f) {
        const double* gyf = gy + static_cast<std::int64_t>(f) * plane;
        double s = 0.0;
        for (int i = 0; i < plane; ++i) s += gyf[i];
        gb[f] += s;
        for (int c = 0; c < C; ++c) {
            const double* xc = x + static_cast<std::int64_t>(c) * plane;
            double* gwfc = gw + (static_cast<std::int64_t>(f) * C + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const int dy = ky - P;
                const int oy0 = std::max(0, -dy);
                const int oy1 = std::min(H, H - dy);
                for (int kx = 0; kx < k; ++kx) {
                    const int dx = kx - P;
                    const int ox0 = std::max(0, -dx);
                    const int ox1 = std::min(W, W - dx);
                    double acc = 0.0;
                    for (int oy = oy0; oy < oy1; ++oy) {
                        const double* gyrow = gyf + oy * W;
                        const double* xp = xc + (oy + dy) * W + dx;
                        acc += dot_unrolled(gyrow + ox0, xp + ox0, ox1 - ox0);
                    }
                    gwfc[ky * k + kx] += acc;
                }
            }
        }
    }
}

void maxpool2d_forward(const double* x, int C, int H, int W,
                       double* y, std::int64_t* argmax) {
    const int OH = pooled_extent(H);
    const int OW = pooled_extent(W);
    const std::int64_t plane = static_cast<std::int64_t>(H) * W;
    const std::int64_t oplane = static_cast<std::int64_t>(OH) * OW;
    FER_PARALLEL_FOR
    for (int c = 0; c < C; ++c) {
        const double* xc = x + c * plane;
        double* yc = y + c * oplane;
        std::int64_t* ac = argmax + c * oplane;
        for (int oy = 0; oy < OH; ++oy) {
            const int y0 = oy * 2;
            const int y1 = std::min(y0 + 2, H);
            for (int ox = 0; ox < OW; ++ox) {
                const int x0 = ox * 2;
                const int x1 = std::min(x0 + 2, W);
                double best = xc[y0 * W + x0];
                std::int64_t best_idx = y0 * W + x0;
                for (int iy = y0; iy < y1; ++iy) {
                    for (int ix = x0; ix < x1; ++ix) {
                        const double v = xc[iy * W + ix];
                        if (v > best) {  // strict: first row-major max wins ties
                            best = v;
                            best_idx = iy * W + ix;
                        }
                    }
                }
                yc[oy * OW + ox] = best;
                ac[oy * OW + ox] = c * plane + best_idx;
            }
        }
    }
}

void maxpool2d_backward(const double* gy, const std::int64_t* argmax,
                        std::int64_t out_count, double* gx) {
    for (std::int64_t i = 0; i < out_count; ++i) gx[argmax[i]] += gy[i];
}

void dense_forward(const double* x, int n, const double* w, const double* b, int m, double* y) {
    FER_PARALLEL_FOR
    for (int i = 0; i < m; ++i) {
        const double* wr = w + static_cast<std::int64_t>(i) * n;
        y[i] = dot_unrolled(wr, x, n) + b[i];
    }
}

void dense_backward_input(const double* gy, const double* w, int m, int n, double* gx) {
    for (int i = 0; i < m; ++i) {
        const double g = gy[i];
        if (g == 0.0) continue;
        const double* wr = w + static_cast<std::int64_t>(i) * n;
        for (int j = 0; j < n; ++j) gx[j] += g * wr[j];
    }
}

void dense_backward_params(const double* gy, const double* x, int m, int n, double* gw, double* gb) {
    FER_PARALLEL_FOR
    for (int i = 0; i < m; ++i) {
        const double g = gy[i];
        gb[i] += g;
        double* gwr = gw + static_cast<std::int64_t>(i) * n;
        for (int j = 0; j < n; ++j) gwr[j] += g * x[j];
    }
}

void relu_forward(const double* x, std::int64_t count, double* y) {
    for (std::int64_t i = 0; i < count; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* gy, const double* x, std::int64_t count, double* gx) {
    // Subgradient at exactly 0 is taken as 0.
    for (std::int64_t i = 0; i < count; ++i)
        if (x[i] > 0.0) gx[i] += gy[i];
}

void softmax_forward(const double* x, int n, double* y) {
    double mx = x[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        y[i] = std::exp(x[i] - mx);
        sum += y[i];
    }
    const double inv = 1.0 / sum;
    for (int i = 0; i < n; ++i) y[i] *= inv;
}

void softmax_backward(const double* gy, const double* y, int n, double* gx) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += gy[i] * y[i];
    for (int i = 0; i < n; ++i) gx[i] += y[i] * (gy[i] - dot);
}

}  // namespace fer::kernels

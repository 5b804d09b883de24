#pragma once

#include <cstdint>

namespace fer::kernels {

// Raw numeric routines shared by the graph ops (ops.hpp) and the no-graph
// inference path (model_pool). All arrays are dense row-major doubles.
//
// Convolution is cross-correlation with zero same-padding and stride 1;
// kernels are square with odd side k. Pooling is 2x2 stride 2 with windows
// clipped at the borders (output dims = ceil(in/2)).

/// y[f,h,w] = b[f] + sum_{c,ky,kx} w[f,c,ky,kx] * x[c, h+ky-k/2, w+kx-k/2]
void conv2d_forward(const double* x, int C, int H, int W,
                    const double* w, int F, int k,
                    const double* b, double* y);

/// gx += dL/dx given gy = dL/dy. gx must be pre-zeroed (or accumulated into).
void conv2d_backward_input(const double* gy, int F, int H, int W,
                           const double* w, int C, int k, double* gx);

/// gw += dL/dw, gb += dL/db.
void conv2d_backward_params(const double* gy, int F, int H, int W,
                            const double* x, int C, int k,
                            double* gw, double* gb);

inline int pooled_extent(int n) { return (n + 1) / 2; }

/// 2x2 stride-2 max pooling with clipped border windows. argmax stores the
/// input flat index feeding each output cell (row-major-first tie-break).
void maxpool2d_forward(const double* x, int C, int H, int W,
                       double* y, std::int64_t* argmax);

void maxpool2d_backward(const double* gy, const std::int64_t* argmax,
                        std::int64_t out_count, double* gx);

/// y[m] = b[m] + sum_n w[m,n] * x[n]
void dense_forward(const double* x, int n, const double* w, const double* b, int m, double* y);
void dense_backward_input(const double* gy, const double* w, int m, int n, double* gx);
void dense_backward_params(const double* gy, const double* x, int m, int n, double* gw, double* gb);

void relu_forward(const double* x, std::int64_t count, double* y);
void relu_backward(const double* gy, const double* x, std::int64_t count, double* gx);

/// Max-subtracted stable softmax over a length-n vector.
void softmax_forward(const double* x, int n, double* y);
/// gx += y .* (gy - dot(gy, y))
void softmax_backward(const double* gy, const double* y, int n, double* gx);

}  // namespace fer::kernels

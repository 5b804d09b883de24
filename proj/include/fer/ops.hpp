#pragma once

#include <vector>

#include "fer/tensor.hpp"

namespace fer::ops {

// Differentiable graph ops. Every function validates shapes, runs the
// forward kernel, and installs a backward closure that only routes gradient
// into parents with requires_grad set.

/// Cross-correlation, zero same-padding, stride 1. x: [C,H,W], w: [F,C,k,k]
/// (k odd), b: [F] -> [F,H,W].
TensorPtr conv2d(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);

/// 2x2 stride-2 max pooling with clipped border windows: [C,H,W] ->
/// [C,ceil(H/2),ceil(W/2)]. Ties go to the first cell in row-major order.
TensorPtr maxpool2d(const TensorPtr& x);

/// Affine map: x: [n], w: [m,n], b: [m] -> [m].
TensorPtr dense(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);

/// Any shape -> [numel].
TensorPtr flatten(const TensorPtr& x);

TensorPtr relu(const TensorPtr& x);

/// Stable softmax over a 1-D tensor.
TensorPtr softmax(const TensorPtr& x);

/// -log(max(p[index], clamp)) as a scalar node; index is 0-based.
TensorPtr neg_log_pick(const TensorPtr& p, int index, double clamp = 1e-12);

/// Scalar dot product of two equally sized 1-D tensors.
TensorPtr dot(const TensorPtr& a, const TensorPtr& b);

/// Elementwise sum of two equally shaped tensors.
TensorPtr add(const TensorPtr& a, const TensorPtr& b);

/// Elementwise scaling by a constant.
TensorPtr scale(const TensorPtr& a, double c);

/// Elementwise a*x + b.
TensorPtr affine(const TensorPtr& x, double a, double b);

/// Scalar sum of scalar nodes; empty input yields a constant 0.
TensorPtr sum_scalars(const std::vector<TensorPtr>& terms);

/// sum_i coeffs[i] * terms[i] over scalar nodes.
TensorPtr weighted_sum(const std::vector<TensorPtr>& terms, const std::vector<double>& coeffs);

}  // namespace fer::ops

#include "fer/ops.hpp"

#include <cmath>
#include <memory>

#include "fer/error.hpp"
#include "fer/kernels.hpp"

namespace fer::ops {

namespace {

bool any_requires_grad(const std::vector<TensorPtr>& parents) {
    for (const auto& p : parents)
        if (p->requires_grad) return true;
    return false;
}

TensorPtr attach(TensorPtr out, std::vector<TensorPtr> parents, std::function<void(Tensor&)> fn) {
    out->requires_grad = any_requires_grad(parents);
    if (out->requires_grad) {
        out->parents = std::move(parents);
        out->backward_fn = std::move(fn);
    }
    return out;
}

}  // namespace

TensorPtr conv2d(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    if (x->shape.size() != 3 || w->shape.size() != 4 || b->shape.size() != 1)
        throw config_error("conv2d: expected x[C,H,W], w[F,C,k,k], b[F]; got x" + shape_to_string(x->shape) +
                           " w" + shape_to_string(w->shape) + " b" + shape_to_string(b->shape));
    const int C = x->shape[0], H = x->shape[1], W = x->shape[2];
    const int F = w->shape[0], k = w->shape[2];
    if (w->shape[1] != C)
        throw config_error("conv2d: input has " + std::to_string(C) + " channels but kernels expect " +
                           std::to_string(w->shape[1]) + " (w" + shape_to_string(w->shape) + ")");
    if (w->shape[3] != k || k % 2 == 0)
        throw config_error("conv2d: kernels must be square with odd side, got w" + shape_to_string(w->shape));
    if (b->shape[0] != F)
        throw config_error("conv2d: bias size " + std::to_string(b->shape[0]) + " != filter count " + std::to_string(F));
    if (H < k || W < k)
        throw config_error("conv2d: input " + std::to_string(H) + "x" + std::to_string(W) +
                           " smaller than kernel " + std::to_string(k));

    auto out = Tensor::make({F, H, W});
    kernels::conv2d_forward(x->values.data(), C, H, W, w->values.data(), F, k, b->values.data(),
                            out->values.data());
    return attach(out, {x, w, b}, [C, H, W, F, k](Tensor& self) {
        auto& xp = self.parents[0];
        auto& wp = self.parents[1];
        auto& bp = self.parents[2];
        if (xp->requires_grad) {
            xp->ensure_grad();
            kernels::conv2d_backward_input(self.grad.data(), F, H, W, wp->values.data(), C, k,
                                           xp->grad.data());
        }
        if (wp->requires_grad || bp->requires_grad) {
            wp->ensure_grad();
            bp->ensure_grad();
            kernels::conv2d_backward_params(self.grad.data(), F, H, W, xp->values.data(), C, k,
                                            wp->grad.data(), bp->grad.data());
        }
    });
}

TensorPtr maxpool2d(const TensorPtr& x) {
    if (x->shape.size() != 3)
        throw config_error("maxpool2d: expected x[C,H,W], got " + shape_to_string(x->shape));
    const int C = x->shape[0], H = x->shape[1], W = x->shape[2];
    const int OH = kernels::pooled_extent(H), OW = kernels::pooled_extent(W);
    auto out = Tensor::make({C, OH, OW});
    auto argmax = std::make_shared<std::vector<std::int64_t>>(out->size());
    kernels::maxpool2d_forward(x->values.data(), C, H, W, out->values.data(), argmax->data());
    return attach(out, {x}, [argmax](Tensor& self) {
        auto& xp = self.parents[0];
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        kernels::maxpool2d_backward(self.grad.data(), argmax->data(),
                                    static_cast<std::int64_t>(self.grad.size()), xp->grad.data());
    });
}

TensorPtr dense(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    if (x->shape.size() != 1 || w->shape.size() != 2 || b->shape.size() != 1)
        throw config_error("dense: expected x[n], w[m,n], b[m]; got x" + shape_to_string(x->shape) +
                           " w" + shape_to_string(w->shape) + " b" + shape_to_string(b->shape));
    const int n = x->shape[0], m = w->shape[0];
    if (w->shape[1] != n)
        throw config_error("dense: input length " + std::to_string(n) + " != weight columns " +
                           std::to_string(w->shape[1]));
    if (b->shape[0] != m)
        throw config_error("dense: bias size " + std::to_string(b->shape[0]) + " != rows " + std::to_string(m));

    auto out = Tensor::make({m});
    kernels::dense_forward(x->values.data(), n, w->values.data(), b->values.data(), m,
                           out->values.data());
    return attach(out, {x, w, b}, [m, n](Tensor& self) {
        auto& xp = self.parents[0];
        auto& wp = self.parents[1];
        auto& bp = self.parents[2];
        if (xp->requires_grad) {
            xp->ensure_grad();
            kernels::dense_backward_input(self.grad.data(), wp->values.data(), m, n, xp->grad.data());
        }
        if (wp->requires_grad || bp->requires_grad) {
            wp->ensure_grad();
            bp->ensure_grad();
            kernels::dense_backward_params(self.grad.data(), xp->values.data(), m, n,
                                           wp->grad.data(), bp->grad.data());
        }
    });
}

TensorPtr flatten(const TensorPtr& x) {
    auto out = Tensor::make({static_cast<int>(x->size())}, x->values);
    return attach(out, {x}, [](Tensor& self) {
        auto& xp = self.parents[0];
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) xp->grad[i] += self.grad[i];
    });
}

TensorPtr relu(const TensorPtr& x) {
    auto out = Tensor::make(x->shape);
    kernels::relu_forward(x->values.data(), static_cast<std::int64_t>(x->size()), out->values.data());
    return attach(out, {x}, [](Tensor& self) {
        auto& xp = self.parents[0];
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        kernels::relu_backward(self.grad.data(), xp->values.data(),
                               static_cast<std::int64_t>(self.grad.size()), xp->grad.data());
    });
}

TensorPtr softmax(const TensorPtr& x) {
    if (x->shape.size() != 1 || x->shape[0] < 1)
        throw config_error("softmax: expected non-empty 1-D input, got " + shape_to_string(x->shape));
    const int n = x->shape[0];
    auto out = Tensor::make({n});
    kernels::softmax_forward(x->values.data(), n, out->values.data());
    return attach(out, {x}, [n](Tensor& self) {
        auto& xp = self.parents[0];
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        kernels::softmax_backward(self.grad.data(), self.values.data(), n, xp->grad.data());
    });
}

TensorPtr neg_log_pick(const TensorPtr& p, int index, double clamp) {
    if (p->shape.size() != 1 || index < 0 || index >= p->shape[0])
        throw config_error("neg_log_pick: index " + std::to_string(index) + " out of range for " +
                           shape_to_string(p->shape));
    const double v = p->values[static_cast<std::size_t>(index)];
    const double clamped = v > clamp ? v : clamp;
    auto out = Tensor::scalar(-std::log(clamped));
    return attach(out, {p}, [index, clamp](Tensor& self) {
        auto& pp = self.parents[0];
        if (!pp->requires_grad) return;
        pp->ensure_grad();
        const double v = pp->values[static_cast<std::size_t>(index)];
        if (v > clamp) pp->grad[static_cast<std::size_t>(index)] -= self.grad[0] / v;
    });
}

TensorPtr dot(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 1 || a->shape != b->shape)
        throw config_error("dot: mismatched 1-D shapes " + shape_to_string(a->shape) + " vs " +
                           shape_to_string(b->shape));
    double acc = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i) acc += a->values[i] * b->values[i];
    auto out = Tensor::scalar(acc);
    return attach(out, {a, b}, [](Tensor& self) {
        auto& ap = self.parents[0];
        auto& bp = self.parents[1];
        const double g = self.grad[0];
        if (ap->requires_grad) {
            ap->ensure_grad();
            for (std::size_t i = 0; i < ap->size(); ++i) ap->grad[i] += g * bp->values[i];
        }
        if (bp->requires_grad) {
            bp->ensure_grad();
            for (std::size_t i = 0; i < bp->size(); ++i) bp->grad[i] += g * ap->values[i];
        }
    });
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape)
        throw config_error("add: mismatched shapes " + shape_to_string(a->shape) + " vs " +
                           shape_to_string(b->shape));
    auto out = Tensor::make(a->shape);
    for (std::size_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] + b->values[i];
    return attach(out, {a, b}, [](Tensor& self) {
        for (auto& pp : self.parents) {
            if (!pp->requires_grad) continue;
            pp->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pp->grad[i] += self.grad[i];
        }
    });
}

TensorPtr scale(const TensorPtr& a, double c) {
    auto out = Tensor::make(a->shape);
    for (std::size_t i = 0; i < out->size(); ++i) out->values[i] = c * a->values[i];
    return attach(out, {a}, [c](Tensor& self) {
        auto& ap = self.parents[0];
        if (!ap->requires_grad) return;
        ap->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += c * self.grad[i];
    });
}

TensorPtr affine(const TensorPtr& x, double a, double b) {
    auto out = Tensor::make(x->shape);
    for (std::size_t i = 0; i < out->size(); ++i) out->values[i] = a * x->values[i] + b;
    return attach(out, {x}, [a](Tensor& self) {
        auto& xp = self.parents[0];
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) xp->grad[i] += a * self.grad[i];
    });
}

TensorPtr sum_scalars(const std::vector<TensorPtr>& terms) {
    double acc = 0.0;
    for (const auto& t : terms) acc += t->item();
    auto out = Tensor::scalar(acc);
    return attach(out, terms, [](Tensor& self) {
        const double g = self.grad[0];
        for (auto& pp : self.parents) {
            if (!pp->requires_grad) continue;
            pp->ensure_grad();
            pp->grad[0] += g;
        }
    });
}

TensorPtr weighted_sum(const std::vector<TensorPtr>& terms, const std::vector<double>& coeffs) {
    if (terms.size() != coeffs.size())
        throw config_error("weighted_sum: " + std::to_string(terms.size()) + " terms vs " +
                           std::to_string(coeffs.size()) + " coefficients");
    double acc = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) acc += coeffs[i] * terms[i]->item();
    auto out = Tensor::scalar(acc);
    auto cs = std::make_shared<std::vector<double>>(coeffs);
    return attach(out, terms, [cs](Tensor& self) {
        const double g = self.grad[0];
        for (std::size_t i = 0; i < self.parents.size(); ++i) {
            auto& pp = self.parents[i];
            if (!pp->requires_grad) continue;
            pp->ensure_grad();
            pp->grad[0] += g * (*cs)[i];
        }
    });
}

}  // namespace fer::ops

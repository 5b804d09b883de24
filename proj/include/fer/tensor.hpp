#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fer {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// A node of the reverse-mode differentiation graph: an n-dimensional double
/// array plus (optionally) a gradient of the same shape and a closure that
/// routes this node's gradient into its parents.
///
/// Graphs are built dynamically by the ops in ops.hpp. Nodes carry a
/// monotonically increasing creation id; backward() replays reachable nodes
/// in descending id order, which is a valid topological order because every
/// op creates its output after its inputs.
class Tensor {
public:
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until ensure_grad(); same length as values afterwards
    bool requires_grad = false;

    std::vector<TensorPtr> parents;
    std::function<void(Tensor&)> backward_fn;  // may be empty (leaf)
    std::uint64_t node_id = 0;

    Tensor() = default;

    static TensorPtr make(std::vector<int> shape);
    static TensorPtr make(std::vector<int> shape, std::vector<double> values);
    static TensorPtr scalar(double v);

    std::size_t size() const { return values.size(); }
    double item() const;  // value of a 1-element tensor

    void ensure_grad();
    void zero_grad();

    /// True if every value (and gradient entry, when present) is finite.
    bool all_finite() const;

    /// Backpropagate from this scalar node, seeding its gradient with `seed`.
    /// Gradients accumulate into any node that already has a grad array, so
    /// repeated backward calls over disjoint graphs sharing parameters sum up.
    void backward(double seed = 1.0);
};

/// Number of elements implied by a shape.
std::size_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

/// A named leaf tensor owned by a network.
struct Parameter {
    TensorPtr tensor;
    std::string id;

    Parameter() = default;
    Parameter(TensorPtr t, std::string identifier) : tensor(std::move(t)), id(std::move(identifier)) {
        tensor->requires_grad = true;
    }
};

/// Worker-thread count for the compute kernels. Parallelism is always over
/// disjoint output slices, so results are bit-identical for any setting.
void set_compute_threads(int n);
int compute_threads();

}  // namespace fer

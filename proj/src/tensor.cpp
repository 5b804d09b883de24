#include "fer/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "fer/error.hpp"

namespace fer {

namespace {
std::atomic<std::uint64_t> g_node_counter{1};
std::atomic<int> g_threads{1};
}  // namespace

void set_compute_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int compute_threads() { return g_threads.load(); }

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

TensorPtr Tensor::make(std::vector<int> shape) {
    for (int d : shape)
        if (d <= 0) throw numeric_error("tensor dimension must be positive, got shape " + shape_to_string(shape));
    auto t = std::make_shared<Tensor>();
    t->values.assign(shape_numel(shape), 0.0);
    t->shape = std::move(shape);
    t->node_id = g_node_counter.fetch_add(1);
    return t;
}

TensorPtr Tensor::make(std::vector<int> shape, std::vector<double> values) {
    if (shape_numel(shape) != values.size())
        throw numeric_error("tensor value count " + std::to_string(values.size()) +
                            " does not match shape " + shape_to_string(shape));
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->values = std::move(values);
    t->node_id = g_node_counter.fetch_add(1);
    return t;
}

TensorPtr Tensor::scalar(double v) { return make({1}, {v}); }

double Tensor::item() const {
    if (values.size() != 1)
        throw numeric_error("item() on tensor of shape " + shape_to_string(shape));
    return values[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    for (double g : grad)
        if (!std::isfinite(g)) return false;
    return true;
}

void Tensor::backward(double seed) {
    if (values.size() != 1)
        throw numeric_error("backward() requires a scalar node, got shape " + shape_to_string(shape));

    // Collect reachable nodes (iterative DFS; graphs can be deep).
    std::vector<Tensor*> order;
    std::unordered_set<Tensor*> seen;
    std::vector<Tensor*> stack{this};
    seen.insert(this);
    while (!stack.empty()) {
        Tensor* node = stack.back();
        stack.pop_back();
        order.push_back(node);
        for (const auto& p : node->parents) {
            if (seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    // Creation order is a topological order: parents always precede children.
    std::sort(order.begin(), order.end(),
              [](const Tensor* a, const Tensor* b) { return a->node_id > b->node_id; });

    ensure_grad();
    grad[0] += seed;
    for (Tensor* node : order) {
        if (!node->backward_fn) continue;
        if (node->grad.empty()) continue;  // nothing flowed into this node
        node->backward_fn(*node);
    }
}

}  // namespace fer

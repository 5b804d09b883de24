#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "fer/adam.hpp"
#include "fer/representations.hpp"
#include "fer/rng.hpp"
#include "fer/tensor.hpp"

namespace fer {

/// Architecture of one pool member. Face networks use conv filters (32, 64)
/// and dense widths (64, 7); all others use (16, 32) and (7). Kernel 5x5
/// stride 1 same-padding and 2x2 stride-2 pooling are the recorded defaults;
/// the final dense width is always 7.
struct CnnSpec {
    RepId rep{Part::Face, RepKind::Appearance};
    int input_w = 0, input_h = 0;
    int conv1_filters = 16, conv2_filters = 32;
    int kernel = 5;
    std::vector<int> dense_widths{7};

    int flatten_size() const;
    std::int64_t parameter_count() const;
};

CnnSpec default_cnn_spec(RepId id);

/// One convolutional classifier: conv-relu-pool twice, then the dense stack,
/// softmax last.
class Cnn {
public:
    Cnn() = default;
    Cnn(CnnSpec spec, Rng& rng);  // fan-in-scaled uniform init, zero biases

    const CnnSpec& spec() const { return spec_; }
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;

    /// Differentiable forward; x must be [1, input_h, input_w].
    TensorPtr forward_graph(const TensorPtr& x) const;

    /// Inference-only forward on plain buffers (no graph, no gradients).
    std::array<double, 7> forward_nograd(const RepresentationImage& x) const;

    TensorPtr input_tensor(const RepresentationImage& x) const;

private:
    void check_input(int width, int height) const;

    CnnSpec spec_;
    Parameter conv1_w_, conv1_b_, conv2_w_, conv2_b_;
    std::vector<Parameter> fc_w_, fc_b_;
};

/// The 15 networks, indexed canonically (see all_representations()).
class ModelPool {
public:
    static ModelPool create(std::uint64_t seed);

    Cnn& net(RepId id) { return nets_[static_cast<std::size_t>(rep_index(id))]; }
    const Cnn& net(RepId id) const { return nets_[static_cast<std::size_t>(rep_index(id))]; }
    Cnn& net(int index) { return nets_[static_cast<std::size_t>(index)]; }
    const Cnn& net(int index) const { return nets_[static_cast<std::size_t>(index)]; }

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> parameters(const std::vector<RepId>& subset);

    std::uint64_t seed() const { return seed_; }

    void save(const std::filesystem::path& path) const;
    static ModelPool load(const std::filesystem::path& path);

private:
    std::array<Cnn, kRepresentationCount> nets_;
    std::uint64_t seed_ = 0;
};

/// p_h(x_h) for one representation.
std::array<double, 7> pool_forward(const ModelPool& pool, RepId id, const RepresentationImage& x);

/// argmax over a distribution, 1-based class index, ties to the lowest index.
int argmax_class(const std::array<double, 7>& p);

/// Frame-level decision rule: argmax of the chosen network's distribution.
int predict_frame(const ModelPool& pool, RepId id, const ImageF& image, const Landmarks68& lm);

/// Unweighted mean of prediction distributions.
std::array<double, 7> average_distributions(const std::vector<std::array<double, 7>>& dists);

/// Arithmetic mean of all 15 distributions on one frame.
std::array<double, 7> ensemble_average(const ModelPool& pool, const ImageF& image,
                                       const Landmarks68& lm);

}  // namespace fer

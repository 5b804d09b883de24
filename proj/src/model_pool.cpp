#include "fer/model_pool.hpp"

#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "fer/checkpoint.hpp"
#include "fer/dataset.hpp"
#include "fer/error.hpp"
#include "fer/kernels.hpp"
#include "fer/ops.hpp"

namespace fer {

int CnnSpec::flatten_size() const {
    const int h = kernels::pooled_extent(kernels::pooled_extent(input_h));
    const int w = kernels::pooled_extent(kernels::pooled_extent(input_w));
    return conv2_filters * h * w;
}

std::int64_t CnnSpec::parameter_count() const {
    std::int64_t count = static_cast<std::int64_t>(conv1_filters) * kernel * kernel + conv1_filters;
    count += static_cast<std::int64_t>(conv2_filters) * conv1_filters * kernel * kernel + conv2_filters;
    int in = flatten_size();
    for (int width : dense_widths) {
        count += static_cast<std::int64_t>(width) * in + width;
        in = width;
    }
    return count;
}

CnnSpec default_cnn_spec(RepId id) {
    const PartSpec& part = part_spec(id.part);
    CnnSpec spec;
    spec.rep = id;
    spec.input_w = part.target_w;
    spec.input_h = part.target_h;
    if (id.part == Part::Face) {
        spec.conv1_filters = 32;
        spec.conv2_filters = 64;
        spec.dense_widths = {64, 7};
    } else {
        spec.conv1_filters = 16;
        spec.conv2_filters = 32;
        spec.dense_widths = {7};
    }
    return spec;
}

namespace {

Parameter init_weight(std::vector<int> shape, int fan_in, const std::string& id, Rng& rng) {
    auto t = Tensor::make(std::move(shape));
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& v : t->values) v = rng.uniform(-limit, limit);
    return Parameter(std::move(t), id);
}

Parameter init_bias(int size, const std::string& id) {
    return Parameter(Tensor::make({size}), id);
}

}  // namespace

Cnn::Cnn(CnnSpec spec, Rng& rng) : spec_(std::move(spec)) {
    if (spec_.dense_widths.empty() || spec_.dense_widths.back() != kClassCount)
        throw config_error("cnn spec for " + rep_name(spec_.rep) + ": final dense width must be 7");
    const std::string prefix = rep_name(spec_.rep);
    const int k = spec_.kernel;
    conv1_w_ = init_weight({spec_.conv1_filters, 1, k, k}, k * k, prefix + "/conv1/weight", rng);
    conv1_b_ = init_bias(spec_.conv1_filters, prefix + "/conv1/bias");
    conv2_w_ = init_weight({spec_.conv2_filters, spec_.conv1_filters, k, k},
                           spec_.conv1_filters * k * k, prefix + "/conv2/weight", rng);
    conv2_b_ = init_bias(spec_.conv2_filters, prefix + "/conv2/bias");

    int in = spec_.flatten_size();
    for (std::size_t layer = 0; layer < spec_.dense_widths.size(); ++layer) {
        const int width = spec_.dense_widths[layer];
        const std::string name = prefix + "/fc" + std::to_string(layer);
        fc_w_.push_back(init_weight({width, in}, in, name + "/weight", rng));
        fc_b_.push_back(init_bias(width, name + "/bias"));
        in = width;
    }
}

std::vector<Parameter*> Cnn::parameters() {
    std::vector<Parameter*> out{&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_};
    for (std::size_t i = 0; i < fc_w_.size(); ++i) {
        out.push_back(&fc_w_[i]);
        out.push_back(&fc_b_[i]);
    }
    return out;
}

std::vector<const Parameter*> Cnn::parameters() const {
    std::vector<const Parameter*> out{&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_};
    for (std::size_t i = 0; i < fc_w_.size(); ++i) {
        out.push_back(&fc_w_[i]);
        out.push_back(&fc_b_[i]);
    }
    return out;
}

void Cnn::check_input(int width, int height) const {
    if (width != spec_.input_w || height != spec_.input_h)
        throw config_error("network " + rep_name(spec_.rep) + " expects " +
                           std::to_string(spec_.input_w) + "x" + std::to_string(spec_.input_h) +
                           " input, got " + std::to_string(width) + "x" + std::to_string(height));
}

TensorPtr Cnn::input_tensor(const RepresentationImage& x) const {
    check_input(x.width, x.height);
    return Tensor::make({1, x.height, x.width}, x.pixels);
}

TensorPtr Cnn::forward_graph(const TensorPtr& x) const {
    if (x->shape != std::vector<int>{1, spec_.input_h, spec_.input_w})
        throw config_error("network " + rep_name(spec_.rep) + ": bad input shape " +
                           shape_to_string(x->shape));
    auto h = ops::maxpool2d(ops::relu(ops::conv2d(x, conv1_w_.tensor, conv1_b_.tensor)));
    h = ops::maxpool2d(ops::relu(ops::conv2d(h, conv2_w_.tensor, conv2_b_.tensor)));
    auto v = ops::flatten(h);
    for (std::size_t layer = 0; layer < fc_w_.size(); ++layer) {
        v = ops::dense(v, fc_w_[layer].tensor, fc_b_[layer].tensor);
        if (layer + 1 < fc_w_.size()) v = ops::relu(v);
    }
    return ops::softmax(v);
}

std::array<double, 7> Cnn::forward_nograd(const RepresentationImage& x) const {
    check_input(x.width, x.height);
    const int k = spec_.kernel;
    const int H = spec_.input_h, W = spec_.input_w;
    const int H1 = kernels::pooled_extent(H), W1 = kernels::pooled_extent(W);
    const int H2 = kernels::pooled_extent(H1), W2 = kernels::pooled_extent(W1);
    const int F1 = spec_.conv1_filters, F2 = spec_.conv2_filters;

    std::vector<double> a(static_cast<std::size_t>(F1) * H * W);
    kernels::conv2d_forward(x.pixels.data(), 1, H, W, conv1_w_.tensor->values.data(), F1, k,
                            conv1_b_.tensor->values.data(), a.data());
    kernels::relu_forward(a.data(), static_cast<std::int64_t>(a.size()), a.data());
    std::vector<double> p1(static_cast<std::size_t>(F1) * H1 * W1);
    std::vector<std::int64_t> arg(p1.size());
    kernels::maxpool2d_forward(a.data(), F1, H, W, p1.data(), arg.data());

    std::vector<double> a2(static_cast<std::size_t>(F2) * H1 * W1);
    kernels::conv2d_forward(p1.data(), F1, H1, W1, conv2_w_.tensor->values.data(), F2, k,
                            conv2_b_.tensor->values.data(), a2.data());
    kernels::relu_forward(a2.data(), static_cast<std::int64_t>(a2.size()), a2.data());
    std::vector<double> p2(static_cast<std::size_t>(F2) * H2 * W2);
    arg.resize(p2.size());
    kernels::maxpool2d_forward(a2.data(), F2, H1, W1, p2.data(), arg.data());

    std::vector<double> v = std::move(p2);
    for (std::size_t layer = 0; layer < fc_w_.size(); ++layer) {
        const auto& w = *fc_w_[layer].tensor;
        const auto& b = *fc_b_[layer].tensor;
        std::vector<double> next(static_cast<std::size_t>(w.shape[0]));
        kernels::dense_forward(v.data(), w.shape[1], w.values.data(), b.values.data(), w.shape[0],
                               next.data());
        if (layer + 1 < fc_w_.size())
            kernels::relu_forward(next.data(), static_cast<std::int64_t>(next.size()), next.data());
        v = std::move(next);
    }
    std::array<double, 7> out{};
    kernels::softmax_forward(v.data(), kClassCount, out.data());
    return out;
}

ModelPool ModelPool::create(std::uint64_t seed) {
    ModelPool pool;
    pool.seed_ = seed;
    Rng rng(derive_seed(seed, 0));
    for (int i = 0; i < kRepresentationCount; ++i) {
        const RepId id = all_representations()[static_cast<std::size_t>(i)];
        pool.nets_[static_cast<std::size_t>(i)] = Cnn(default_cnn_spec(id), rng);
    }
    return pool;
}

std::vector<Parameter*> ModelPool::parameters() {
    std::vector<Parameter*> out;
    for (auto& net : nets_)
        for (Parameter* p : net.parameters()) out.push_back(p);
    return out;
}

std::vector<Parameter*> ModelPool::parameters(const std::vector<RepId>& subset) {
    std::vector<Parameter*> out;
    for (const RepId id : subset)
        for (Parameter* p : net(id).parameters()) out.push_back(p);
    return out;
}

void ModelPool::save(const std::filesystem::path& path) const {
    nlohmann::json header;
    header["format"] = "fer-pool";
    header["version"] = 1;
    header["seed"] = seed_;
    header["specs"] = nlohmann::json::array();
    for (const auto& net : nets_) {
        const auto& s = net.spec();
        header["specs"].push_back({{"rep", rep_name(s.rep)},
                                   {"input_w", s.input_w},
                                   {"input_h", s.input_h},
                                   {"conv1_filters", s.conv1_filters},
                                   {"conv2_filters", s.conv2_filters},
                                   {"kernel", s.kernel},
                                   {"dense_widths", s.dense_widths}});
    }

    ParamContainer container;
    container.json_header = header.dump();
    for (const auto& net : nets_)
        for (const Parameter* p : net.parameters())
            container.tensors.push_back({p->id, p->tensor->shape, p->tensor->values});
    save_param_container(path, container);
}

ModelPool ModelPool::load(const std::filesystem::path& path) {
    const ParamContainer container = load_param_container(path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(container.json_header);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("pool checkpoint '" + path.string() + "': bad JSON header (" + e.what() + ")");
    }
    if (header.value("format", "") != "fer-pool")
        throw data_error("pool checkpoint '" + path.string() + "': not a pool checkpoint");

    ModelPool pool;
    pool.seed_ = header.value("seed", 0ULL);
    Rng rng(derive_seed(pool.seed_, 0));
    if (header.at("specs").size() != kRepresentationCount)
        throw data_error("pool checkpoint: expected 15 network specs");
    for (std::size_t i = 0; i < kRepresentationCount; ++i) {
        const auto& js = header.at("specs")[i];
        CnnSpec spec;
        spec.rep = rep_from_name(js.at("rep").get<std::string>());
        spec.input_w = js.at("input_w").get<int>();
        spec.input_h = js.at("input_h").get<int>();
        spec.conv1_filters = js.at("conv1_filters").get<int>();
        spec.conv2_filters = js.at("conv2_filters").get<int>();
        spec.kernel = js.at("kernel").get<int>();
        spec.dense_widths = js.at("dense_widths").get<std::vector<int>>();
        pool.nets_[i] = Cnn(spec, rng);
    }

    // Overwrite initialized values with the stored ones, matched by id.
    std::unordered_map<std::string, Parameter*> by_id;
    for (Parameter* p : pool.parameters()) by_id[p->id] = p;
    std::size_t matched = 0;
    for (const auto& t : container.tensors) {
        auto it = by_id.find(t.id);
        if (it == by_id.end())
            throw data_error("pool checkpoint: unknown parameter '" + t.id + "'");
        if (it->second->tensor->shape != t.shape)
            throw data_error("pool checkpoint: shape mismatch for '" + t.id + "'");
        it->second->tensor->values = t.data;
        ++matched;
    }
    if (matched != by_id.size())
        throw data_error("pool checkpoint: missing parameters (" + std::to_string(matched) + "/" +
                         std::to_string(by_id.size()) + ")");
    return pool;
}

std::array<double, 7> pool_forward(const ModelPool& pool, RepId id, const RepresentationImage& x) {
    return pool.net(id).forward_nograd(x);
}

int argmax_class(const std::array<double, 7>& p) {
    int best = 0;
    for (int i = 1; i < kClassCount; ++i)
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
    return best + 1;
}

int predict_frame(const ModelPool& pool, RepId id, const ImageF& image, const Landmarks68& lm) {
    return argmax_class(pool_forward(pool, id, make_representation(image, lm, id)));
}

std::array<double, 7> average_distributions(const std::vector<std::array<double, 7>>& dists) {
    if (dists.empty()) throw config_error("average_distributions: empty input");
    std::array<double, 7> mean{};
    for (const auto& p : dists)
        for (int i = 0; i < kClassCount; ++i) mean[static_cast<std::size_t>(i)] += p[static_cast<std::size_t>(i)];
    for (auto& v : mean) v /= static_cast<double>(dists.size());
    return mean;
}

std::array<double, 7> ensemble_average(const ModelPool& pool, const ImageF& image,
                                       const Landmarks68& lm) {
    std::vector<std::array<double, 7>> dists;
    dists.reserve(kRepresentationCount);
    for (const RepId id : all_representations())
        dists.push_back(pool_forward(pool, id, make_representation(image, lm, id)));
    return average_distributions(dists);
}

}  // namespace fer

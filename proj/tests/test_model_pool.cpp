#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fer/error.hpp"
#include "fer/model_pool.hpp"
#include "fer/ops.hpp"
#include "fer/synthetic.hpp"

using namespace fer;

namespace {

ModelPool& shared_pool() {
    static ModelPool pool = ModelPool::create(123);
    return pool;
}

RepresentationImage random_rep(RepId id, std::uint64_t seed) {
    const auto& spec = part_spec(id.part);
    RepresentationImage rep;
    rep.id = id;
    rep.width = spec.target_w;
    rep.height = spec.target_h;
    Rng rng(seed);
    rep.pixels.resize(static_cast<std::size_t>(rep.width) * rep.height);
    for (auto& v : rep.pixels) v = rng.uniform();
    return rep;
}

}  // namespace

TEST_CASE("every network outputs a distribution on the 7-simplex") {
    auto& pool = shared_pool();
    for (const RepId id : all_representations()) {
        const auto p = pool_forward(pool, id, random_rep(id, 7 + static_cast<std::uint64_t>(rep_index(id))));
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(std::isfinite(v));
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("freshly initialized face net stays finite on a 200x200 input") {
    auto& pool = shared_pool();
    const auto p = pool_forward(pool, {Part::Face, RepKind::Appearance},
                                random_rep({Part::Face, RepKind::Appearance}, 99));
    for (double v : p) CHECK(std::isfinite(v));
}

TEST_CASE("architecture follows the paper: filters and dense widths") {
    for (const RepId id : all_representations()) {
        const CnnSpec spec = default_cnn_spec(id);
        if (id.part == Part::Face) {
            CHECK(spec.conv1_filters == 32);
            CHECK(spec.conv2_filters == 64);
            CHECK(spec.dense_widths == std::vector<int>{64, 7});
        } else {
            CHECK(spec.conv1_filters == 16);
            CHECK(spec.conv2_filters == 32);
            CHECK(spec.dense_widths == std::vector<int>{7});
        }
        CHECK(spec.dense_widths.back() == 7);
        const PartSpec& part = part_spec(id.part);
        CHECK(spec.input_w == part.target_w);
        CHECK(spec.input_h == part.target_h);
    }
}

TEST_CASE("parameter count is a deterministic function of the spec") {
    auto& pool = shared_pool();
    for (const RepId id : all_representations()) {
        auto& net = pool.net(id);
        std::int64_t actual = 0;
        for (const Parameter* p : const_cast<const Cnn&>(net).parameters())
            actual += static_cast<std::int64_t>(p->tensor->values.size());
        CHECK(actual == net.spec().parameter_count());
    }
    // Identical face architectures for appearance and shape (both 200x200).
    CHECK(default_cnn_spec({Part::Face, RepKind::Appearance}).parameter_count() ==
          default_cnn_spec({Part::Face, RepKind::Shape}).parameter_count());
}

TEST_CASE("forward equals a manual replay of tensor-core ops on the same weights") {
    auto& pool = shared_pool();
    const RepId id{Part::Mouth, RepKind::Appearance};
    auto& net = pool.net(id);
    const auto rep = random_rep(id, 41);

    const auto fast = net.forward_nograd(rep);
    auto graph = net.forward_graph(net.input_tensor(rep));

    // Manual composition, layer by layer.
    auto params = net.parameters();
    auto x = Tensor::make({1, rep.height, rep.width}, rep.pixels);
    auto h = ops::maxpool2d(ops::relu(ops::conv2d(x, params[0]->tensor, params[1]->tensor)));
    h = ops::maxpool2d(ops::relu(ops::conv2d(h, params[2]->tensor, params[3]->tensor)));
    auto manual = ops::softmax(ops::dense(ops::flatten(h), params[4]->tensor, params[5]->tensor));

    for (int i = 0; i < 7; ++i) {
        CHECK(fast[static_cast<std::size_t>(i)] == manual->values[static_cast<std::size_t>(i)]);
        CHECK(graph->values[static_cast<std::size_t>(i)] == manual->values[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("argmax decision rule with lowest-index tie-break") {
    CHECK(argmax_class({0.1, 0.1, 0.1, 0.4, 0.1, 0.1, 0.1}) == 4);
    const double u = 1.0 / 7;
    CHECK(argmax_class({u, u, u, u, u, u, u}) == 1);
}

TEST_CASE("argmax is invariant under strictly monotone transforms") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 7> p{};
        double sum = 0.0;
        for (auto& v : p) sum += (v = rng.uniform(0.01, 1.0));
        for (auto& v : p) v /= sum;
        std::array<double, 7> q{};
        for (int i = 0; i < 7; ++i) q[static_cast<std::size_t>(i)] = std::exp(3.0 * p[static_cast<std::size_t>(i)]) + 1.0;
        CHECK(argmax_class(p) == argmax_class(q));
    }
}

TEST_CASE("ensemble averaging rules") {
    std::array<double, 7> d{0.3, 0.05, 0.05, 0.3, 0.1, 0.1, 0.1};
    const auto same = average_distributions({d, d, d});
    for (int i = 0; i < 7; ++i)
        CHECK(same[static_cast<std::size_t>(i)] ==
              doctest::Approx(d[static_cast<std::size_t>(i)]).epsilon(1e-15));

    // 8 one-hot votes for class 2 and 7 for class 5: class 2 wins.
    std::vector<std::array<double, 7>> dists;
    std::array<double, 7> c2{}, c5{};
    c2[1] = 1.0;
    c5[4] = 1.0;
    for (int i = 0; i < 8; ++i) dists.push_back(c2);
    for (int i = 0; i < 7; ++i) dists.push_back(c5);
    CHECK(argmax_class(average_distributions(dists)) == 2);

    // Random distributions: mean matches a direct summation oracle.
    Rng rng(6);
    dists.clear();
    for (int i = 0; i < 15; ++i) {
        std::array<double, 7> p{};
        double sum = 0.0;
        for (auto& v : p) sum += (v = rng.uniform(0.0, 1.0));
        for (auto& v : p) v /= sum;
        dists.push_back(p);
    }
    const auto mean = average_distributions(dists);
    for (int i = 0; i < 7; ++i) {
        double s = 0.0;
        for (const auto& p : dists) s += p[static_cast<std::size_t>(i)];
        CHECK(std::abs(mean[static_cast<std::size_t>(i)] - s / 15.0) < 1e-12);
    }
    double total = 0.0;
    for (double v : mean) total += v;
    CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("ensemble over a real frame lies on the simplex") {
    auto& pool = shared_pool();
    const auto lm = neutral_template(96);
    const auto img = render_synthetic_face(lm, 96);
    const auto p = ensemble_average(pool, img, lm);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("dimension mismatch errors name the offending network") {
    auto& pool = shared_pool();
    CHECK_THROWS_WITH_AS((void)pool_forward(pool, {Part::Nose, RepKind::Appearance},
                                            random_rep({Part::Mouth, RepKind::Appearance}, 3)),
                         doctest::Contains("nose"), Error);
}

TEST_CASE("pool save/load round-trips forward outputs bit-exactly") {
    auto& pool = shared_pool();
    const auto path = std::filesystem::temp_directory_path() / "fer_pool_roundtrip.fpc";
    pool.save(path);
    ModelPool loaded = ModelPool::load(path);
    for (const RepId id : all_representations()) {
        const auto rep = random_rep(id, 1000 + static_cast<std::uint64_t>(rep_index(id)));
        CHECK(pool_forward(pool, id, rep) == pool_forward(loaded, id, rep));
    }
    std::filesystem::remove(path);
}

TEST_CASE("pool creation is deterministic in the seed") {
    ModelPool a = ModelPool::create(77);
    ModelPool b = ModelPool::create(77);
    const RepId id{Part::LeftEye, RepKind::Shape};
    const auto rep = random_rep(id, 4);
    CHECK(pool_forward(a, id, rep) == pool_forward(b, id, rep));

    ModelPool c = ModelPool::create(78);
    CHECK(pool_forward(a, id, rep) != pool_forward(c, id, rep));
}

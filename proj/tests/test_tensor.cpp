#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fer/adam.hpp"
#include "fer/checkpoint.hpp"
#include "fer/error.hpp"
#include "fer/gradcheck.hpp"
#include "fer/kernels.hpp"
#include "fer/ops.hpp"
#include "fer/rng.hpp"
#include "fer/tensor.hpp"
#include "oracles.hpp"

using namespace fer;

namespace {

TensorPtr random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    auto t = Tensor::make(std::move(shape));
    for (auto& v : t->values) v = rng.uniform(lo, hi);
    return t;
}

Parameter random_param(std::vector<int> shape, const std::string& id, Rng& rng,
                       double lo = -0.5, double hi = 0.5) {
    return Parameter(random_tensor(std::move(shape), rng, lo, hi), id);
}

}  // namespace

TEST_CASE("conv2d identity kernel reproduces the input") {
    auto x = Tensor::make({1, 3, 3}, std::vector<double>(9, 1.0));
    auto w = Tensor::make({1, 1, 1, 1}, {1.0});
    auto b = Tensor::make({1}, {0.0});
    auto y = ops::conv2d(x, w, b);
    for (std::size_t i = 0; i < 9; ++i) CHECK(y->values[i] == doctest::Approx(1.0));
}

TEST_CASE("conv2d averaging kernel puts the input mean at the center") {
    Rng rng(1);
    auto x = random_tensor({1, 3, 3}, rng, 0.0, 1.0);
    auto w = Tensor::make({1, 1, 3, 3}, std::vector<double>(9, 1.0 / 9.0));
    auto b = Tensor::make({1}, {0.0});
    auto y = ops::conv2d(x, w, b);
    double mean = 0.0;
    for (double v : x->values) mean += v / 9.0;
    CHECK(y->values[4] == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("conv2d matches the six-nested-loop reference") {
    Rng rng(2);
    auto x = random_tensor({2, 5, 5}, rng);
    auto w = random_tensor({4, 2, 3, 3}, rng);
    auto b = random_tensor({4}, rng);
    auto y = ops::conv2d(x, w, b);
    auto ref = oracle::conv2d(x->values, 2, 5, 5, w->values, 4, 3, b->values);
    REQUIRE(y->size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(y->values[i] - ref[i]) < 1e-10);
}

TEST_CASE("conv2d k=5 matches reference on a non-square input") {
    Rng rng(3);
    auto x = random_tensor({3, 9, 6}, rng);
    auto w = random_tensor({2, 3, 5, 5}, rng);
    auto b = random_tensor({2}, rng);
    auto y = ops::conv2d(x, w, b);
    auto ref = oracle::conv2d(x->values, 3, 9, 6, w->values, 2, 5, b->values);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(y->values[i] - ref[i]) < 1e-10);
}

TEST_CASE("conv2d rejects channel mismatch with a shape diagnostic") {
    auto x = Tensor::make({2, 5, 5});
    auto w = Tensor::make({4, 3, 3, 3});
    auto b = Tensor::make({4});
    CHECK_THROWS_WITH_AS(ops::conv2d(x, w, b),
                         doctest::Contains("channels"), Error);
}

TEST_CASE("conv2d forward is bit-identical across repeated evaluation") {
    Rng rng(4);
    auto x = random_tensor({2, 7, 7}, rng);
    auto w = random_tensor({3, 2, 5, 5}, rng);
    auto b = random_tensor({3}, rng);
    auto y1 = ops::conv2d(x, w, b);
    auto y2 = ops::conv2d(x, w, b);
    CHECK(y1->values == y2->values);
}

TEST_CASE("maxpool2d basics") {
    auto x = Tensor::make({1, 2, 2}, {1, 2, 3, 4});
    auto y = ops::maxpool2d(x);
    REQUIRE(y->shape == std::vector<int>{1, 1, 1});
    CHECK(y->values[0] == 4.0);

    auto c = Tensor::make({2, 3, 3}, std::vector<double>(18, 0.5));
    auto yc = ops::maxpool2d(c);
    CHECK(yc->shape == std::vector<int>{2, 2, 2});
    for (double v : yc->values) CHECK(v == 0.5);
}

TEST_CASE("maxpool2d matches the window enumeration oracle") {
    Rng rng(5);
    auto x = random_tensor({3, 7, 7}, rng);
    auto y = ops::maxpool2d(x);
    auto ref = oracle::maxpool2d(x->values, 3, 7, 7);
    REQUIRE(y->values.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(y->values[i] == ref[i]);
}

TEST_CASE("maxpool2d ties send gradient to the first cell in row-major order") {
    auto x = Tensor::make({1, 2, 2}, {7, 7, 7, 7});
    x->requires_grad = true;
    auto y = ops::maxpool2d(x);
    y->backward(1.0);
    CHECK(x->grad == std::vector<double>{1, 0, 0, 0});
}

TEST_CASE("dense identity and constant-bias cases") {
    auto x = Tensor::make({3}, {1, 2, 3});
    auto eye = Tensor::make({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto zero_b = Tensor::make({3}, {0, 0, 0});
    auto y = ops::dense(x, eye, zero_b);
    CHECK(y->values == x->values);

    auto zero_w = Tensor::make({2, 3}, std::vector<double>(6, 0.0));
    auto b = Tensor::make({2}, {4.5, -1.5});
    auto yb = ops::dense(x, zero_w, b);
    CHECK(yb->values == b->values);
}

TEST_CASE("dense matches the direct multiply oracle") {
    Rng rng(6);
    auto x = random_tensor({4}, rng);
    auto w = random_tensor({3, 4}, rng);
    auto b = random_tensor({3}, rng);
    auto y = ops::dense(x, w, b);
    auto ref = oracle::dense(x->values, w->values, b->values, 3, 4);
    for (int i = 0; i < 3; ++i) CHECK(y->values[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("dense rejects dimension mismatch") {
    auto x = Tensor::make({4});
    auto w = Tensor::make({3, 5});
    auto b = Tensor::make({3});
    CHECK_THROWS_AS((void)ops::dense(x, w, b), Error);
}

TEST_CASE("relu forward and subgradient") {
    auto x = Tensor::make({3}, {-1, 0, 2});
    x->requires_grad = true;
    auto y = ops::relu(x);
    CHECK(y->values == std::vector<double>{0, 0, 2});

    auto x2 = Tensor::make({2}, {-1, 2});
    x2->requires_grad = true;
    auto s = ops::sum_scalars({ops::dot(ops::relu(x2), Tensor::make({2}, {1, 1}))});
    s->backward();
    CHECK(x2->grad == std::vector<double>{0, 1});

    auto pos = Tensor::make({3}, {0.5, 1.0, 2.0});
    CHECK(ops::relu(pos)->values == pos->values);
}

TEST_CASE("softmax uniform logits give 1/7") {
    auto x = Tensor::make({7}, std::vector<double>(7, 3.25));
    auto y = ops::softmax(x);
    for (double v : y->values) CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("softmax is overflow-safe on extreme logits") {
    auto x = Tensor::make({2}, {1000.0, 0.0});
    auto y = ops::softmax(x);
    CHECK(y->values[0] == doctest::Approx(1.0));
    CHECK(y->values[1] == doctest::Approx(0.0));
    CHECK(std::isfinite(y->values[0]));
}

TEST_CASE("softmax matches extended-precision reference and sums to one") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_tensor({7}, rng, -10.0, 10.0);
        auto y = ops::softmax(x);
        auto ref = oracle::softmax(x->values);
        double sum = 0.0;
        for (int i = 0; i < 7; ++i) {
            CHECK(std::abs(y->values[i] - ref[i]) < 1e-12);
            sum += y->values[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("softmax is invariant to constant logit shifts") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_tensor({7}, rng, -5.0, 5.0);
        const double shift = rng.uniform(-100.0, 100.0);
        auto xs = Tensor::make({7});
        for (int i = 0; i < 7; ++i) xs->values[i] = x->values[i] + shift;
        auto y = ops::softmax(x);
        auto ys = ops::softmax(xs);
        for (int i = 0; i < 7; ++i) CHECK(std::abs(y->values[i] - ys->values[i]) < 1e-9);
    }
}

TEST_CASE("adam: zero gradient leaves parameters and moments unchanged") {
    Rng rng(9);
    Parameter p = random_param({4}, "net/w", rng);
    const auto before = p.tensor->values;
    p.tensor->ensure_grad();  // all zeros
    AdamOptimizer opt;
    opt.step({&p});
    CHECK(p.tensor->values == before);
    CHECK(opt.step_count() == 1);
    const auto* slot = opt.slot("net/w");
    REQUIRE(slot != nullptr);
    for (double m : slot->m) CHECK(m == 0.0);
    for (double v : slot->v) CHECK(v == 0.0);
}

TEST_CASE("adam: first step moves by ~lr*sign(g)") {
    Parameter p(Tensor::make({2}, {1.0, -2.0}), "net/w");
    p.tensor->ensure_grad();
    p.tensor->grad = {0.3, -0.7};
    AdamOptimizer opt;
    opt.step({&p});
    const double lr = opt.config().lr;
    CHECK(p.tensor->values[0] == doctest::Approx(1.0 - lr).epsilon(1e-4));
    CHECK(p.tensor->values[1] == doctest::Approx(-2.0 + lr).epsilon(1e-4));
}

TEST_CASE("adam: two constant-gradient steps match the recurrence expansion") {
    const double g = 0.42, theta0 = 0.9;
    Parameter p(Tensor::make({1}, {theta0}), "net/w");
    AdamOptimizer opt;
    for (int step = 0; step < 2; ++step) {
        p.tensor->ensure_grad();
        p.tensor->grad = {g};
        opt.step({&p});
    }
    const auto& cfg = opt.config();
    const double expected =
        oracle::adam_constant_gradient(theta0, g, 2, cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon);
    CHECK(p.tensor->values[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adam: non-finite gradient rejects the step and names the parameter") {
    Parameter good(Tensor::make({1}, {1.0}), "net/a");
    Parameter bad(Tensor::make({1}, {2.0}), "net/b");
    good.tensor->ensure_grad();
    good.tensor->grad = {0.5};
    bad.tensor->ensure_grad();
    bad.tensor->grad = {std::nan("")};
    AdamOptimizer opt;
    CHECK_THROWS_WITH_AS(opt.step({&good, &bad}), doctest::Contains("net/b"), Error);
    CHECK(good.tensor->values[0] == 1.0);  // untouched by the rejected step
    CHECK(opt.step_count() == 0);
}

TEST_CASE("gradcheck: quadratic loss is exact to 1e-8") {
    Rng rng(10);
    Parameter p = random_param({5}, "theta", rng, -2.0, 2.0);
    auto loss_value = [&] {
        double s = 0.0;
        for (double v : p.tensor->values) s += v * v;
        return s;
    };
    auto grad_fn = [&] {
        p.tensor->ensure_grad();
        for (std::size_t i = 0; i < p.tensor->values.size(); ++i)
            p.tensor->grad[i] = 2.0 * p.tensor->values[i];
    };
    GradCheckOptions opts;
    opts.epsilon = 1e-4;
    opts.tolerance = 1e-8;
    auto report = finite_difference_check(loss_value, grad_fn, {&p}, opts);
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("gradcheck: composite conv/pool/dense/softmax graphs at random points") {
    // Analytic gradients agree with central differences away from relu kinks.
    int worst_seed = -1;
    double worst = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(1000 + seed);
        auto x = random_tensor({2, 6, 6}, rng, 0.0, 1.0);
        Parameter w1 = random_param({3, 2, 3, 3}, "c1/w", rng);
        Parameter b1 = random_param({3}, "c1/b", rng);
        Parameter w2 = random_param({7, 27}, "fc/w", rng);
        Parameter b2 = random_param({7}, "fc/b", rng);
        std::vector<Parameter*> params{&w1, &b1, &w2, &b2};

        auto build_loss = [&]() {
            auto h = ops::maxpool2d(ops::relu(ops::conv2d(x, w1.tensor, b1.tensor)));
            auto p = ops::softmax(ops::dense(ops::flatten(h), w2.tensor, b2.tensor));
            auto q = Tensor::make({7}, {0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
            return ops::weighted_sum({ops::neg_log_pick(p, 2), ops::dot(p, q)}, {1.0, 0.5});
        };
        auto loss_value = [&] { return build_loss()->item(); };
        auto grad_fn = [&] {
            for (auto* p : params) p->tensor->zero_grad();
            build_loss()->backward();
        };
        GradCheckOptions opts;
        opts.epsilon = 1e-5;
        opts.tolerance = 1e-4;
        auto report = finite_difference_check(loss_value, grad_fn, params, opts);
        if (report.max_rel_error > worst) {
            worst = report.max_rel_error;
            worst_seed = seed;
        }
    }
    INFO("worst seed ", worst_seed);
    CHECK(worst < 1e-4);
}

TEST_CASE("backward accumulates through shared subgraphs") {
    // y = dot(p, p) with p = softmax(x): dy/dx via both dot operands.
    auto x = Tensor::make({3}, {0.2, -0.4, 0.9});
    x->requires_grad = true;
    auto p = ops::softmax(x);
    auto y = ops::dot(p, p);
    y->backward();

    Parameter px(x, "x");
    auto loss_value = [&] { return ops::dot(ops::softmax(x), ops::softmax(x))->item(); };
    GradCheckOptions opts;
    opts.epsilon = 1e-6;
    opts.tolerance = 1e-7;
    auto report = finite_difference_check(loss_value, nullptr, {&px}, opts);
    CHECK(report.passed);
}

TEST_CASE("checkpoint container round-trips bit-exactly") {
    Rng rng(11);
    ParamContainer c;
    c.json_header = "{\"purpose\":\"test\"}";
    c.tensors.push_back({"a/w", {2, 3}, {1.0, -2.25, 3.5, 1e-300, -0.0, 7.75}});
    NamedTensorData big{"b/w", {4, 4, 2}, {}};
    for (int i = 0; i < 32; ++i) big.data.push_back(rng.normal());
    c.tensors.push_back(big);

    const auto path = std::filesystem::temp_directory_path() / "fer_ckpt_test.bin";
    save_param_container(path, c);
    auto loaded = load_param_container(path);
    REQUIRE(loaded.tensors.size() == 2);
    CHECK(loaded.json_header == c.json_header);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(loaded.tensors[i].id == c.tensors[i].id);
        CHECK(loaded.tensors[i].shape == c.tensors[i].shape);
        CHECK(loaded.tensors[i].data == c.tensors[i].data);
    }
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects corrupt files") {
    const auto path = std::filesystem::temp_directory_path() / "fer_ckpt_bad.bin";
    {
        std::ofstream f(path, std::ios::binary);
        f << "not a checkpoint";
    }
    CHECK_THROWS_AS((void)load_param_container(path), Error);
    std::filesystem::remove(path);
}

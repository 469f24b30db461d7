#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace ministl::nn;
using testutil::conv2d_naive;
using testutil::finite_difference_check;
using testutil::max_abs_diff;
using testutil::random_tensor;

namespace {

ministl::Rng rng_for(const char* tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char* p = tag; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 1099511628211ull;
    return ministl::Rng(h, 0);
}

ParamMap<double> leaves(std::initializer_list<std::pair<const char*, Var<double>>> vars) {
    ParamMap<double> out;
    for (const auto& [name, v] : vars) out.push_back({name, v});
    return out;
}

}  // namespace

TEST_CASE("elementwise ops forward values") {
    auto rng = rng_for("ew");
    auto a = Var<double>::leaf(random_tensor<double>({2, 3}, rng), true);
    auto b = Var<double>::leaf(random_tensor<double>({2, 3}, rng), true);
    auto sum = add(a, b);
    auto prod = mul(a, b);
    for (std::int64_t i = 0; i < 6; ++i) {
        CHECK(sum.value()[i] == doctest::Approx(a.value()[i] + b.value()[i]));
        CHECK(prod.value()[i] == doctest::Approx(a.value()[i] * b.value()[i]));
    }
    CHECK_THROWS_AS(add(a, Var<double>::constant(Tensor<double>::zeros({3, 2}))),
                    ministl::ShapeError);
}

TEST_CASE("gradients: elementwise and activations") {
    auto rng = rng_for("ew-grad");
    auto a = Var<double>::leaf(random_tensor<double>({2, 5}, rng), true, "a");
    auto b = Var<double>::leaf(random_tensor<double>({2, 5}, rng), true, "b");
    auto check = finite_difference_check(
        [&] {
            auto y = mul(add(a, b), sigmoid(a));
            y = add(y, silu(b));
            y = add(y, gelu(a));
            y = add(y, tanh_op(b));
            return mean_all(mul(y, y));
        },
        leaves({{"a", a}, {"b", b}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("matmul and linear match manual expansion and gradients pass") {
    auto rng = rng_for("mm");
    auto x = Var<double>::leaf(random_tensor<double>({3, 4}, rng), true, "x");
    auto w = Var<double>::leaf(random_tensor<double>({5, 4}, rng), true, "w");
    auto b = Var<double>::leaf(random_tensor<double>({5}, rng), true, "b");

    auto y = linear(x, w, b);
    for (std::int64_t i = 0; i < 3; ++i) {
        for (std::int64_t o = 0; o < 5; ++o) {
            double acc = b.value()[o];
            for (std::int64_t k = 0; k < 4; ++k) acc += x.value().at(i, k) * w.value().at(o, k);
            CHECK(y.value().at(i, o) == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    auto check = finite_difference_check(
        [&] { return mean_all(mul(linear(x, w, b), linear(x, w, b))); },
        leaves({{"x", x}, {"w", w}, {"b", b}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("bmm gradient") {
    auto rng = rng_for("bmm");
    auto a = Var<double>::leaf(random_tensor<double>({2, 3, 4}, rng), true, "a");
    auto b = Var<double>::leaf(random_tensor<double>({2, 4, 2}, rng), true, "b");
    auto check = finite_difference_check(
        [&] { return mean_all(mul(bmm(a, b), bmm(a, b))); }, leaves({{"a", a}, {"b", b}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("conv2d matches the direct six-loop oracle") {
    auto rng = rng_for("conv");
    struct Case {
        Shape x, w;
        Conv2dSpec spec;
    };
    const Case cases[] = {
        {{2, 3, 8, 8}, {4, 3, 3, 3}, {1, 1, 1, 1}},
        {{1, 4, 9, 7}, {6, 4, 3, 3}, {2, 1, 1, 1}},
        {{2, 4, 8, 8}, {4, 1, 5, 5}, {1, 6, 3, 4}},   // depthwise dilated
        {{1, 6, 6, 6}, {6, 3, 3, 3}, {1, 1, 1, 2}},   // grouped
        {{2, 5, 4, 4}, {7, 5, 1, 1}, {1, 0, 1, 1}},   // pointwise fast path
    };
    for (const auto& c : cases) {
        auto x = Var<double>::leaf(random_tensor<double>(c.x, rng), false);
        auto w = Var<double>::leaf(random_tensor<double>(c.w, rng), false);
        auto b = Var<double>::leaf(random_tensor<double>({c.w[0]}, rng), false);
        auto y = conv2d(x, w, b, c.spec);
        auto ref = conv2d_naive(x.value(), w.value(), b.value(), c.spec);
        CHECK(max_abs_diff(y.value(), ref) < 1e-10);
    }
}

TEST_CASE("conv2d gradients (stride, groups, dilation)") {
    auto rng = rng_for("conv-grad");
    const Conv2dSpec specs[] = {{1, 1, 1, 1}, {2, 1, 1, 1}, {1, 2, 2, 1}, {1, 1, 1, 2}};
    for (const auto& spec : specs) {
        auto x = Var<double>::leaf(random_tensor<double>({2, 4, 6, 6}, rng), true, "x");
        auto w = Var<double>::leaf(random_tensor<double>({4, 4 / spec.groups, 3, 3}, rng), true,
                                   "w");
        auto b = Var<double>::leaf(random_tensor<double>({4}, rng), true, "b");
        auto check = finite_difference_check(
            [&] {
                auto y = conv2d(x, w, b, spec);
                return mean_all(mul(y, y));
            },
            leaves({{"x", x}, {"w", w}, {"b", b}}));
        CHECK(check.max_rel_err < 1e-5);
    }
}

TEST_CASE("group_norm normalizes and its gradient passes") {
    auto rng = rng_for("gn");
    auto x = Var<double>::leaf(random_tensor<double>({2, 4, 3, 3}, rng), true, "x");
    auto gamma = Var<double>::leaf(random_tensor<double>({4}, rng, 0.5, 1.5), true, "gamma");
    auto beta = Var<double>::leaf(random_tensor<double>({4}, rng), true, "beta");

    auto y = group_norm(x, 2, gamma, beta, 1e-5);
    // Per (n, group): mean of (y - beta)/gamma should vanish.
    for (std::int64_t n = 0; n < 2; ++n) {
        for (int g = 0; g < 2; ++g) {
            double acc = 0;
            for (std::int64_t c = 2 * g; c < 2 * g + 2; ++c) {
                for (std::int64_t i = 0; i < 9; ++i) {
                    acc += (y.value().at(n, c, i / 3, i % 3) - beta.value()[c]) /
                           gamma.value()[c];
                }
            }
            CHECK(acc / 18.0 == doctest::Approx(0.0).epsilon(1e-9));
        }
    }
    auto check = finite_difference_check(
        [&] {
            auto out = group_norm(x, 2, gamma, beta, 1e-5);
            return mean_all(mul(out, out));
        },
        leaves({{"x", x}, {"gamma", gamma}, {"beta", beta}}));
    CHECK(check.max_rel_err < 1e-5);
}

TEST_CASE("layer_norm_channel gradient") {
    auto rng = rng_for("ln");
    auto x = Var<double>::leaf(random_tensor<double>({2, 5, 2, 3}, rng), true, "x");
    auto gamma = Var<double>::leaf(random_tensor<double>({5}, rng, 0.5, 1.5), true, "gamma");
    auto beta = Var<double>::leaf(random_tensor<double>({5}, rng), true, "beta");
    auto check = finite_difference_check(
        [&] {
            auto out = layer_norm_channel(x, gamma, beta, 1e-5);
            return mean_all(mul(out, out));
        },
        leaves({{"x", x}, {"gamma", gamma}, {"beta", beta}}));
    CHECK(check.max_rel_err < 1e-5);
}

TEST_CASE("softmax rows sum to one and gradient passes") {
    auto rng = rng_for("sm");
    auto x = Var<double>::leaf(random_tensor<double>({3, 7}, rng, -4, 4), true, "x");
    auto y = softmax_lastdim(x);
    for (std::int64_t r = 0; r < 3; ++r) {
        double acc = 0;
        for (std::int64_t i = 0; i < 7; ++i) acc += y.value().at(r, i);
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto w = Var<double>::constant(random_tensor<double>({3, 7}, rng));
    auto check = finite_difference_check(
        [&] { return mean_all(mul(softmax_lastdim(x), w)); }, leaves({{"x", x}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("reshape, permute, narrow, concat round trips and gradients") {
    auto rng = rng_for("shape");
    auto x = Var<double>::leaf(random_tensor<double>({2, 3, 4}, rng), true, "x");

    auto p = permute(x, {2, 0, 1});
    CHECK(p.shape() == Shape{4, 2, 3});
    CHECK(p.value().at(1, 0, 2) == x.value().at(0, 2, 1));

    auto back = permute(p, {1, 2, 0});
    CHECK(max_abs_diff(back.value(), x.value()) == 0.0);

    auto head = narrow(x, 1, 0, 2);
    auto tail = narrow(x, 1, 2, 1);
    auto glued = concat<double>({head, tail}, 1);
    CHECK(max_abs_diff(glued.value(), x.value()) == 0.0);

    auto w = Var<double>::constant(random_tensor<double>({2, 4, 4}, rng));
    auto check = finite_difference_check(
        [&] {
            auto h = narrow(x, 1, 0, 2);
            auto t = narrow(x, 1, 1, 2);
            auto g = concat<double>({h, t}, 1);
            auto r = reshape(permute(g, {1, 0, 2}), {2, 4, 4});
            return mean_all(mul(r, w));
        },
        leaves({{"x", x}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("pixel_shuffle layout and gradient") {
    auto rng = rng_for("ps");
    auto x = Var<double>::leaf(random_tensor<double>({1, 8, 2, 3}, rng), true, "x");
    auto y = pixel_shuffle(x, 2);
    CHECK(y.shape() == Shape{1, 2, 4, 6});
    // out[n, c, h*r+dy, w*r+dx] == in[n, c*r*r + dy*r + dx, h, w]
    for (std::int64_t c = 0; c < 2; ++c) {
        for (std::int64_t h = 0; h < 2; ++h) {
            for (std::int64_t w = 0; w < 3; ++w) {
                for (std::int64_t dy = 0; dy < 2; ++dy) {
                    for (std::int64_t dx = 0; dx < 2; ++dx) {
                        CHECK(y.value().at(0, c, h * 2 + dy, w * 2 + dx) ==
                              x.value().at(0, c * 4 + dy * 2 + dx, h, w));
                    }
                }
            }
        }
    }
    auto check = finite_difference_check(
        [&] {
            auto out = pixel_shuffle(x, 2);
            return mean_all(mul(out, out));
        },
        leaves({{"x", x}}));
    CHECK(check.max_rel_err < 1e-6);
}

TEST_CASE("pooling, gating and per-sample scaling gradients") {
    auto rng = rng_for("gate");
    auto x = Var<double>::leaf(random_tensor<double>({2, 3, 4, 4}, rng), true, "x");
    auto g = Var<double>::leaf(random_tensor<double>({2, 3, 1, 1}, rng), true, "g");
    Tensor<double> mask({2});
    mask[0] = 0.0;
    mask[1] = 2.0;
    auto check = finite_difference_check(
        [&] {
            auto pooled = global_avg_pool(x);
            auto gated = mul_channel_gate(x, add(pooled, g));
            auto dropped = scale_per_sample(gated, mask);
            return mean_all(mul(dropped, dropped));
        },
        leaves({{"x", x}, {"g", g}}));
    CHECK(check.max_rel_err < 1e-5);
}

TEST_CASE("mse_loss value and gradient") {
    auto rng = rng_for("mse");
    auto x = Var<double>::leaf(random_tensor<double>({2, 6}, rng), true, "x");
    auto target = random_tensor<double>({2, 6}, rng);
    auto loss = mse_loss(x, target);
    double acc = 0;
    for (std::int64_t i = 0; i < 12; ++i) {
        const double e = x.value()[i] - target[i];
        acc += e * e;
    }
    CHECK(loss.value()[0] == doctest::Approx(acc / 12).epsilon(1e-12));
    auto check =
        finite_difference_check([&] { return mse_loss(x, target); }, leaves({{"x", x}}));
    CHECK(check.max_rel_err < 1e-7);
}

TEST_CASE("backward accumulates over shared subexpressions") {
    auto x = Var<double>::leaf(Tensor<double>::full({3}, 2.0), true, "x");
    // y = x*x + x  =>  dy/dx = 2x + 1 = 5 per element; mean halves nothing.
    auto y = sum_all(add(mul(x, x), x));
    y.backward();
    for (int i = 0; i < 3; ++i) CHECK(x.grad()[i] == doctest::Approx(5.0));
}

TEST_CASE("eval-style graphs with constant inputs carry no tape") {
    auto x = Var<double>::constant(Tensor<double>::full({2, 2}, 1.5));
    auto y = mul(add(x, x), x);
    CHECK_FALSE(y.requires_grad());
}

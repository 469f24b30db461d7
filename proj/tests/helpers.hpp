#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "ministl/autograd.hpp"
#include "ministl/nn.hpp"
#include "ministl/rng.hpp"

namespace testutil {

using ministl::Rng;
using ministl::nn::Conv2dSpec;
using ministl::nn::ParamMap;
using ministl::nn::Shape;
using ministl::nn::Tensor;
using ministl::nn::Var;

template <typename T>
Tensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(shape);
    T* p = t.data();
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        p[i] = static_cast<T>(rng.uniform(lo, hi));
    }
    return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) return 1e30;
    double m = 0;
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    }
    return m;
}

struct GradCheck {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::int64_t checked = 0;
};

/// Central finite differences against the analytic gradient of a scalar
/// graph. loss_fn must rebuild the graph from the same leaf parameters on
/// every call (their values are perturbed in place).
inline GradCheck finite_difference_check(const std::function<Var<double>()>& loss_fn,
                                         ParamMap<double> params, double eps = 1e-5) {
    auto loss = loss_fn();
    for (auto& p : params) p.param.zero_grad();
    loss = loss_fn();
    loss.backward();

    std::vector<Tensor<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        analytic.push_back(p.param.grad().defined() ? p.param.grad().clone()
                                                    : Tensor<double>::zeros(p.param.shape()));
    }

    GradCheck result;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& value = params[k].param.value();
        for (std::int64_t i = 0; i < value.numel(); ++i) {
            const double orig = value[i];
            value[i] = orig + eps;
            const double up = loss_fn().value()[0];
            value[i] = orig - eps;
            const double down = loss_fn().value()[0];
            value[i] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[k][i];
            const double denom = std::max(std::abs(a) + std::abs(numeric), 1e-8);
            const double rel = std::abs(a - numeric) / denom;
            ++result.checked;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_param = params[k].name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return result;
}

/// Direct six-loop convolution; the independent oracle for the im2col path.
template <typename T>
Tensor<T> conv2d_naive(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                       const Conv2dSpec& spec) {
    const std::int64_t N = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::int64_t Cout = w.dim(0), Cg = w.dim(1), Kh = w.dim(2), Kw = w.dim(3);
    const std::int64_t G = spec.groups;
    const std::int64_t Hout = (H + 2 * spec.padding - spec.dilation * (Kh - 1) - 1) / spec.stride + 1;
    const std::int64_t Wout = (W + 2 * spec.padding - spec.dilation * (Kw - 1) - 1) / spec.stride + 1;
    const std::int64_t coutg = Cout / G;
    Tensor<T> y({N, Cout, Hout, Wout});
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t oc = 0; oc < Cout; ++oc) {
            const std::int64_t g = oc / coutg;
            for (std::int64_t oh = 0; oh < Hout; ++oh) {
                for (std::int64_t ow = 0; ow < Wout; ++ow) {
                    double acc = b.defined() ? static_cast<double>(b[oc]) : 0.0;
                    for (std::int64_t c = 0; c < Cg; ++c) {
                        for (std::int64_t kh = 0; kh < Kh; ++kh) {
                            for (std::int64_t kw = 0; kw < Kw; ++kw) {
                                const std::int64_t ih = oh * spec.stride - spec.padding + kh * spec.dilation;
                                const std::int64_t iw = ow * spec.stride - spec.padding + kw * spec.dilation;
                                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                                acc += static_cast<double>(
                                           x.at(n, g * Cg + c, ih, iw)) *
                                       w.at(oc, c, kh, kw);
                            }
                        }
                    }
                    y.at(n, oc, oh, ow) = static_cast<T>(acc);
                }
            }
        }
    }
    return y;
}

}  // namespace testutil

#include "ministl/autograd.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace ministl::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
using NodePtr = typename Var<T>::NodePtr;

template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<NodePtr<T>> parents,
                 std::function<void(detail::Node<T>&)> bwd) {
    auto n = std::make_shared<detail::Node<T>>();
    n->value = std::move(value);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    if (rg) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward_fn = std::move(bwd);
    }
    return Var<T>(std::move(n));
}

template <typename T>
void ensure_grad(detail::Node<T>& n) {
    if (!n.grad.defined()) n.grad = Tensor<T>::zeros(n.value.shape());
}

template <typename T, class F, class DF>
Var<T> unary_op(const Var<T>& a, F f, DF df) {
    Tensor<T> out(a.shape());
    const T* x = a.value().data();
    T* y = out.data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) y[i] = f(x[i]);
    auto pa = a.node();
    return make_node<T>(std::move(out), {pa}, [pa, df](detail::Node<T>& self) {
        ensure_grad(*pa);
        const T* g = self.grad.data();
        const T* x = pa->value.data();
        const T* y = self.value.data();
        T* dx = pa->grad.data();
        const std::int64_t n = self.value.numel();
        for (std::int64_t i = 0; i < n; ++i) dx[i] += g[i] * df(x[i], y[i]);
    });
}

}  // namespace

template <typename T>
void accumulate_grad(Tensor<T>& dst, const Tensor<T>& src) {
    if (!dst.defined()) dst = Tensor<T>::zeros(src.shape());
    T* d = dst.data();
    const T* s = src.data();
    const std::int64_t n = src.numel();
    for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

template <typename T>
void Var<T>::backward(const Tensor<T>& seed) const {
    MINISTL_CHECK(defined(), Error, "backward() on undefined Var");
    if (!node_->requires_grad) return;
    MINISTL_CHECK(seed.numel() == node_->value.numel(), ShapeError,
                  "backward seed shape " << shape_str(seed.shape()) << " vs value "
                                         << shape_str(node_->value.shape()));
    accumulate_grad(node_->grad, seed);

    // Post-order DFS over the requires-grad subgraph; shared_ptrs keep nodes
    // alive while the tape is unwound.
    std::vector<NodePtr> order;
    std::unordered_set<detail::Node<T>*> visited;
    std::vector<std::pair<NodePtr, std::size_t>> stack;
    stack.emplace_back(node_, 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            auto& p = n->parents[idx++];
            if (p->requires_grad && visited.insert(p.get()).second) {
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node<T>& n = **it;
        if (n.backward_fn && n.grad.defined()) {
            n.backward_fn(n);
        }
        n.backward_fn = nullptr;
        n.parents.clear();
        if (!n.leaf) n.grad.reset();
    }
}

template <typename T>
void Var<T>::backward() const {
    MINISTL_CHECK(numel() == 1, ShapeError, "seedless backward() requires a scalar node");
    backward(Tensor<T>::scalar(T(1)));
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    MINISTL_CHECK(a.shape() == b.shape(), ShapeError,
                  "add: " << shape_str(a.shape()) << " vs " << shape_str(b.shape()));
    Tensor<T> out(a.shape());
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    T* y = out.data();
    for (std::int64_t i = 0; i < a.numel(); ++i) y[i] = pa[i] + pb[i];
    auto na = a.node();
    auto nb = b.node();
    return make_node<T>(std::move(out), {na, nb}, [na, nb](detail::Node<T>& self) {
        if (na->requires_grad) accumulate_grad(na->grad, self.grad);
        if (nb->requires_grad) accumulate_grad(nb->grad, self.grad);
    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    MINISTL_CHECK(a.shape() == b.shape(), ShapeError,
                  "sub: " << shape_str(a.shape()) << " vs " << shape_str(b.shape()));
    Tensor<T> out(a.shape());
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    T* y = out.data();
    for (std::int64_t i = 0; i < a.numel(); ++i) y[i] = pa[i] - pb[i];
    auto na = a.node();
    auto nb = b.node();
    return make_node<T>(std::move(out), {na, nb}, [na, nb](detail::Node<T>& self) {
        const T* g = self.grad.data();
        const std::int64_t n = self.value.numel();
        if (na->requires_grad) accumulate_grad(na->grad, self.grad);
        if (nb->requires_grad) {
            ensure_grad(*nb);
            T* db = nb->grad.data();
            for (std::int64_t i = 0; i < n; ++i) db[i] -= g[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    MINISTL_CHECK(a.shape() == b.shape(), ShapeError,
                  "mul: " << shape_str(a.shape()) << " vs " << shape_str(b.shape()));
    Tensor<T> out(a.shape());
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    T* y = out.data();
    for (std::int64_t i = 0; i < a.numel(); ++i) y[i] = pa[i] * pb[i];
    auto na = a.node();
    auto nb = b.node();
    return make_node<T>(std::move(out), {na, nb}, [na, nb](detail::Node<T>& self) {
        const T* g = self.grad.data();
        const std::int64_t n = self.value.numel();
        if (na->requires_grad) {
            ensure_grad(*na);
            T* da = na->grad.data();
            const T* vb = nb->value.data();
            for (std::int64_t i = 0; i < n; ++i) da[i] += g[i] * vb[i];
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            T* db = nb->grad.data();
            const T* va = na->value.data();
            for (std::int64_t i = 0; i < n; ++i) db[i] += g[i] * va[i];
        }
    });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
    return unary_op(
        a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
    return unary_op(
        a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> tanh_op(const Var<T>& a) {
    return unary_op(
        a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> silu(const Var<T>& a) {
    return unary_op(
        a, [](T x) { return x / (T(1) + std::exp(-x)); },
        [](T x, T) {
            const T s = T(1) / (T(1) + std::exp(-x));
            return s * (T(1) + x * (T(1) - s));
        });
}

template <typename T>
Var<T> gelu(const Var<T>& a) {
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    return unary_op(
        a,
        [](T x) {
            return static_cast<T>(0.5 * static_cast<double>(x) *
                                  (1.0 + std::erf(static_cast<double>(x) * kInvSqrt2)));
        },
        [](T x, T) {
            const double xd = static_cast<double>(x);
            const double cdf = 0.5 * (1.0 + std::erf(xd * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xd * xd);
            return static_cast<T>(cdf + xd * pdf);
        });
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
    Tensor<T> out = a.value().reshaped(std::move(shape));
    auto pa = a.node();
    return make_node<T>(std::move(out), {pa}, [pa](detail::Node<T>& self) {
        accumulate_grad(pa->grad, self.grad.reshaped(pa->value.shape()));
    });
}

namespace {

template <typename T>
Tensor<T> permute_tensor(const Tensor<T>& x, const std::vector<int>& perm) {
    const auto& in_shape = x.shape();
    const std::size_t nd = in_shape.size();
    MINISTL_CHECK(perm.size() == nd, ShapeError, "permute rank mismatch");
    Shape out_shape(nd);
    for (std::size_t i = 0; i < nd; ++i) out_shape[i] = in_shape[perm[i]];

    std::vector<std::int64_t> in_strides(nd, 1);
    for (std::size_t i = nd - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * in_shape[i];
    std::vector<std::int64_t> src_strides(nd);
    for (std::size_t i = 0; i < nd; ++i) src_strides[i] = in_strides[perm[i]];

    Tensor<T> out(out_shape);
    const T* src = x.data();
    T* dst = out.data();
    std::vector<std::int64_t> ix(nd, 0);
    const std::int64_t n = x.numel();
    std::int64_t src_off = 0;
    for (std::int64_t flat = 0; flat < n; ++flat) {
        dst[flat] = src[src_off];
        for (std::int64_t d = static_cast<std::int64_t>(nd) - 1; d >= 0; --d) {
            src_off += src_strides[d];
            if (++ix[d] < out_shape[d]) break;
            src_off -= src_strides[d] * out_shape[d];
            ix[d] = 0;
        }
    }
    return out;
}

}  // namespace

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<int>& perm) {
    Tensor<T> out = permute_tensor(a.value(), perm);
    std::vector<int> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
    auto pa = a.node();
    return make_node<T>(std::move(out), {pa}, [pa, inv](detail::Node<T>& self) {
        accumulate_grad(pa->grad, permute_tensor(self.grad, inv));
    });
}

template <typename T>
Var<T> narrow(const Var<T>& a, int axis, std::int64_t start, std::int64_t len) {
    const auto& s = a.shape();
    MINISTL_CHECK(axis >= 0 && axis < static_cast<int>(s.size()), ShapeError, "narrow axis");
    MINISTL_CHECK(start >= 0 && start + len <= s[axis], ShapeError,
                  "narrow [" << start << ", " << start + len << ") out of dim " << s[axis]);
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];

    Shape out_shape = s;
    out_shape[axis] = len;
    Tensor<T> out(out_shape);
    const T* src = a.value().data();
    T* dst = out.data();
    for (std::int64_t o = 0; o < outer; ++o) {
        std::copy_n(src + (o * s[axis] + start) * inner, len * inner, dst + o * len * inner);
    }
    auto pa = a.node();
    const std::int64_t dim = s[axis];
    return make_node<T>(std::move(out), {pa},
                        [pa, outer, inner, dim, start, len](detail::Node<T>& self) {
                            ensure_grad(*pa);
                            const T* g = self.grad.data();
                            T* dx = pa->grad.data();
                            for (std::int64_t o = 0; o < outer; ++o) {
                                T* drow = dx + (o * dim + start) * inner;
                                const T* grow = g + o * len * inner;
                                for (std::int64_t i = 0; i < len * inner; ++i) drow[i] += grow[i];
                            }
                        });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& xs, int axis) {
    MINISTL_CHECK(!xs.empty(), ShapeError, "concat of zero tensors");
    const auto& s0 = xs[0].shape();
    MINISTL_CHECK(axis >= 0 && axis < static_cast<int>(s0.size()), ShapeError, "concat axis");
    std::int64_t axis_total = 0;
    for (const auto& x : xs) {
        MINISTL_CHECK(x.shape().size() == s0.size(), ShapeError, "concat rank mismatch");
        for (std::size_t i = 0; i < s0.size(); ++i) {
            MINISTL_CHECK(static_cast<int>(i) == axis || x.shape()[i] == s0[i], ShapeError,
                          "concat shape mismatch at axis " << i);
        }
        axis_total += x.shape()[axis];
    }
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s0[i];
    for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];

    Shape out_shape = s0;
    out_shape[axis] = axis_total;
    Tensor<T> out(out_shape);
    T* dst = out.data();
    std::int64_t off = 0;
    std::vector<std::int64_t> lens;
    std::vector<NodePtr<T>> parents;
    for (const auto& x : xs) {
        const std::int64_t len = x.shape()[axis];
        const T* src = x.value().data();
        for (std::int64_t o = 0; o < outer; ++o) {
            std::copy_n(src + o * len * inner, len * inner,
                        dst + (o * axis_total + off) * inner);
        }
        off += len;
        lens.push_back(len);
        parents.push_back(x.node());
    }
    auto parents_copy = parents;
    return make_node<T>(std::move(out), std::move(parents),
                        [parents = std::move(parents_copy), lens, outer, inner,
                         axis_total](detail::Node<T>& self) {
                            const T* g = self.grad.data();
                            std::int64_t off = 0;
                            for (std::size_t k = 0; k < parents.size(); ++k) {
                                auto& p = parents[k];
                                const std::int64_t len = lens[k];
                                if (p->requires_grad) {
                                    ensure_grad(*p);
                                    T* dx = p->grad.data();
                                    for (std::int64_t o = 0; o < outer; ++o) {
                                        const T* grow = g + (o * axis_total + off) * inner;
                                        T* drow = dx + o * len * inner;
                                        for (std::int64_t i = 0; i < len * inner; ++i)
                                            drow[i] += grow[i];
                                    }
                                }
                                off += len;
                            }
                        });
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    MINISTL_CHECK(a.shape().size() == 2 && b.shape().size() == 2, ShapeError, "matmul rank");
    const std::int64_t M = a.shape()[0], K = a.shape()[1], N = b.shape()[1];
    MINISTL_CHECK(b.shape()[0] == K, ShapeError,
                  "matmul inner dims: " << shape_str(a.shape()) << " x " << shape_str(b.shape()));
    Tensor<T> out({M, N});
    MatMap<T>(out.data(), M, N).noalias() =
        ConstMatMap<T>(a.value().data(), M, K) * ConstMatMap<T>(b.value().data(), K, N);
    auto na = a.node();
    auto nb = b.node();
    return make_node<T>(std::move(out), {na, nb}, [na, nb, M, K, N](detail::Node<T>& self) {
        ConstMatMap<T> g(self.grad.data(), M, N);
        if (na->requires_grad) {
            ensure_grad(*na);
            MatMap<T>(na->grad.data(), M, K).noalias() +=
                g * ConstMatMap<T>(nb->value.data(), K, N).transpose();
        }
        if (nb->requires_grad) {
            ensure_grad(*nb);
            MatMap<T>(nb->grad.data(), K, N).noalias() +=
                ConstMatMap<T>(na->value.data(), M, K).transpose() * g;
        }
    });
}

template <typename T>
Var<T> bmm(const Var<T>& a, const Var<T>& b) {
    MINISTL_CHECK(a.shape().size() == 3 && b.shape().size() == 3, ShapeError, "bmm rank");
    const std::int64_t B = a.shape()[0], M = a.shape()[1], K = a.shape()[2], N = b.shape()[2];
    MINISTL_CHECK(b.shape()[0] == B && b.shape()[1] == K, ShapeError,
                  "bmm shapes: " << shape_str(a.shape()) << " x " << shape_str(b.shape()));
    Tensor<T> out({B, M, N});
    for (std::int64_t i = 0; i < B; ++i) {
        MatMap<T>(out.data() + i * M * N, M, N).noalias() =
            ConstMatMap<T>(a.value().data() + i * M * K, M, K) *
            ConstMatMap<T>(b.value().data() + i * K * N, K, N);
    }
    auto na = a.node();
    auto nb = b.node();
    return make_node<T>(std::move(out), {na, nb}, [na, nb, B, M, K, N](detail::Node<T>& self) {
        for (std::int64_t i = 0; i < B; ++i) {
            ConstMatMap<T> g(self.grad.data() + i * M * N, M, N);
            if (na->requires_grad) {
                ensure_grad(*na);
                MatMap<T>(na->grad.data() + i * M * K, M, K).noalias() +=
                    g * ConstMatMap<T>(nb->value.data() + i * K * N, K, N).transpose();
            }
            if (nb->requires_grad) {
                ensure_grad(*nb);
                MatMap<T>(nb->grad.data() + i * K * N, K, N).noalias() +=
                    ConstMatMap<T>(na->value.data() + i * M * K, M, K).transpose() * g;
            }
        }
    });
}

template <typename T>
Var<T> transpose_last2(const Var<T>& a) {
    const auto& s = a.shape();
    MINISTL_CHECK(s.size() >= 2, ShapeError, "transpose_last2 rank");
    std::vector<int> perm(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) perm[i] = static_cast<int>(i);
    std::swap(perm[s.size() - 1], perm[s.size() - 2]);
    return permute(a, perm);
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
    MINISTL_CHECK(x.shape().size() == 2 && w.shape().size() == 2, ShapeError, "linear rank");
    const std::int64_t N = x.shape()[0], F = x.shape()[1], O = w.shape()[0];
    MINISTL_CHECK(w.shape()[1] == F, ShapeError,
                  "linear: x " << shape_str(x.shape()) << " vs w " << shape_str(w.shape()));
    Tensor<T> out({N, O});
    MatMap<T>(out.data(), N, O).noalias() =
        ConstMatMap<T>(x.value().data(), N, F) * ConstMatMap<T>(w.value().data(), O, F).transpose();
    const bool has_bias = b.defined();
    if (has_bias) {
        MINISTL_CHECK(b.shape() == Shape{O}, ShapeError, "linear bias shape");
        T* y = out.data();
        const T* bias = b.value().data();
        for (std::int64_t i = 0; i < N; ++i) {
            for (std::int64_t j = 0; j < O; ++j) y[i * O + j] += bias[j];
        }
    }
    auto nx = x.node();
    auto nw = w.node();
    std::vector<NodePtr<T>> parents = {nx, nw};
    NodePtr<T> nb;
    if (has_bias) {
        nb = b.node();
        parents.push_back(nb);
    }
    return make_node<T>(std::move(out), std::move(parents),
                        [nx, nw, nb, N, F, O](detail::Node<T>& self) {
                            ConstMatMap<T> g(self.grad.data(), N, O);
                            if (nx->requires_grad) {
                                ensure_grad(*nx);
                                MatMap<T>(nx->grad.data(), N, F).noalias() +=
                                    g * ConstMatMap<T>(nw->value.data(), O, F);
                            }
                            if (nw->requires_grad) {
                                ensure_grad(*nw);
                                MatMap<T>(nw->grad.data(), O, F).noalias() +=
                                    g.transpose() * ConstMatMap<T>(nx->value.data(), N, F);
                            }
                            if (nb && nb->requires_grad) {
                                ensure_grad(*nb);
                                T* db = nb->grad.data();
                                const T* gp = self.grad.data();
                                for (std::int64_t i = 0; i < N; ++i)
                                    for (std::int64_t j = 0; j < O; ++j) db[j] += gp[i * O + j];
                            }
                        });
}

// ---------------------------------------------------------------------------
// convolution
// ---------------------------------------------------------------------------

namespace {

struct ConvDims {
    std::int64_t N, Cin, H, W, Cout, Cg, Kh, Kw, Hout, Wout;
    int stride, pad, dil, groups;
    std::int64_t coutg() const { return Cout / groups; }
    bool pointwise() const {
        return Kh == 1 && Kw == 1 && stride == 1 && pad == 0 && dil == 1;
    }
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& w, const Conv2dSpec& spec) {
    MINISTL_CHECK(x.ndim() == 4 && w.ndim() == 4, ShapeError, "conv2d expects 4-D x and w");
    ConvDims d{};
    d.N = x.dim(0);
    d.Cin = x.dim(1);
    d.H = x.dim(2);
    d.W = x.dim(3);
    d.Cout = w.dim(0);
    d.Cg = w.dim(1);
    d.Kh = w.dim(2);
    d.Kw = w.dim(3);
    d.stride = spec.stride;
    d.pad = spec.padding;
    d.dil = spec.dilation;
    d.groups = spec.groups;
    MINISTL_CHECK(d.stride >= 1 && d.dil >= 1 && d.groups >= 1 && d.pad >= 0, ConfigError,
                  "conv2d spec out of range");
    MINISTL_CHECK(d.Cin == d.Cg * d.groups, ShapeError,
                  "conv2d channel mismatch: Cin=" << d.Cin << " w expects "
                                                  << d.Cg * d.groups);
    MINISTL_CHECK(d.Cout % d.groups == 0, ShapeError, "conv2d Cout not divisible by groups");
    d.Hout = (d.H + 2 * d.pad - d.dil * (d.Kh - 1) - 1) / d.stride + 1;
    d.Wout = (d.W + 2 * d.pad - d.dil * (d.Kw - 1) - 1) / d.stride + 1;
    MINISTL_CHECK(d.Hout > 0 && d.Wout > 0, ShapeError,
                  "conv2d output collapses: " << d.Hout << "x" << d.Wout);
    return d;
}

// col has rows (c, kh, kw) for the channels of one group and cols (oh, ow).
template <typename T>
void im2col(const T* x, const ConvDims& d, std::int64_t c0, T* col) {
    const std::int64_t hw_out = d.Hout * d.Wout;
    for (std::int64_t c = 0; c < d.Cg; ++c) {
        const T* src = x + (c0 + c) * d.H * d.W;
        for (std::int64_t kh = 0; kh < d.Kh; ++kh) {
            for (std::int64_t kw = 0; kw < d.Kw; ++kw) {
                T* dst = col + ((c * d.Kh + kh) * d.Kw + kw) * hw_out;
                for (std::int64_t oh = 0; oh < d.Hout; ++oh) {
                    const std::int64_t ih = oh * d.stride - d.pad + kh * d.dil;
                    T* drow = dst + oh * d.Wout;
                    if (ih < 0 || ih >= d.H) {
                        std::fill_n(drow, d.Wout, T(0));
                        continue;
                    }
                    const T* srow = src + ih * d.W;
                    for (std::int64_t ow = 0; ow < d.Wout; ++ow) {
                        const std::int64_t iw = ow * d.stride - d.pad + kw * d.dil;
                        drow[ow] = (iw >= 0 && iw < d.W) ? srow[iw] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_accum(const T* col, const ConvDims& d, std::int64_t c0, T* dx) {
    const std::int64_t hw_out = d.Hout * d.Wout;
    for (std::int64_t c = 0; c < d.Cg; ++c) {
        T* dst = dx + (c0 + c) * d.H * d.W;
        for (std::int64_t kh = 0; kh < d.Kh; ++kh) {
            for (std::int64_t kw = 0; kw < d.Kw; ++kw) {
                const T* src = col + ((c * d.Kh + kh) * d.Kw + kw) * hw_out;
                for (std::int64_t oh = 0; oh < d.Hout; ++oh) {
                    const std::int64_t ih = oh * d.stride - d.pad + kh * d.dil;
                    if (ih < 0 || ih >= d.H) continue;
                    const T* srow = src + oh * d.Wout;
                    T* drow = dst + ih * d.W;
                    for (std::int64_t ow = 0; ow < d.Wout; ++ow) {
                        const std::int64_t iw = ow * d.stride - d.pad + kw * d.dil;
                        if (iw >= 0 && iw < d.W) drow[iw] += srow[ow];
                    }
                }
            }
        }
    }
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, const Conv2dSpec& spec) {
    const ConvDims d = conv_dims(x.value(), w.value(), spec);
    const bool has_bias = b.defined();
    if (has_bias) {
        MINISTL_CHECK(b.shape() == Shape{d.Cout}, ShapeError, "conv2d bias shape");
    }

    const std::int64_t hw_out = d.Hout * d.Wout;
    const std::int64_t ckk = d.Cg * d.Kh * d.Kw;
    Tensor<T> out({d.N, d.Cout, d.Hout, d.Wout});
    {
        std::vector<T> col_buf;
        if (!d.pointwise()) col_buf.resize(ckk * hw_out);
        for (std::int64_t n = 0; n < d.N; ++n) {
            const T* xp = x.value().data() + n * d.Cin * d.H * d.W;
            for (int g = 0; g < d.groups; ++g) {
                const T* col;
                if (d.pointwise()) {
                    col = xp + g * d.Cg * d.H * d.W;
                } else {
                    im2col(xp, d, g * d.Cg, col_buf.data());
                    col = col_buf.data();
                }
                MatMap<T>(out.data() + (n * d.Cout + g * d.coutg()) * hw_out, d.coutg(), hw_out)
                    .noalias() =
                    ConstMatMap<T>(w.value().data() + g * d.coutg() * ckk, d.coutg(), ckk) *
                    ConstMatMap<T>(col, ckk, hw_out);
            }
        }
        if (has_bias) {
            T* y = out.data();
            const T* bias = b.value().data();
            for (std::int64_t n = 0; n < d.N; ++n) {
                for (std::int64_t c = 0; c < d.Cout; ++c) {
                    T* row = y + (n * d.Cout + c) * hw_out;
                    const T bc = bias[c];
                    for (std::int64_t i = 0; i < hw_out; ++i) row[i] += bc;
                }
            }
        }
    }

    auto nx = x.node();
    auto nw = w.node();
    std::vector<NodePtr<T>> parents = {nx, nw};
    NodePtr<T> nb;
    if (has_bias) {
        nb = b.node();
        parents.push_back(nb);
    }
    return make_node<T>(
        std::move(out), std::move(parents), [nx, nw, nb, d](detail::Node<T>& self) {
            const std::int64_t hw_out = d.Hout * d.Wout;
            const std::int64_t ckk = d.Cg * d.Kh * d.Kw;
            const bool need_dx = nx->requires_grad;
            const bool need_dw = nw->requires_grad;
            if (need_dx) ensure_grad(*nx);
            if (need_dw) ensure_grad(*nw);

            std::vector<T> col_buf;
            std::vector<T> dcol_buf;
            if (!d.pointwise()) {
                if (need_dw) col_buf.resize(ckk * hw_out);
                if (need_dx) dcol_buf.resize(ckk * hw_out);
            }
            for (std::int64_t n = 0; n < d.N; ++n) {
                const T* xp = nx->value.data() + n * d.Cin * d.H * d.W;
                for (int g = 0; g < d.groups; ++g) {
                    ConstMatMap<T> gy(self.grad.data() + (n * d.Cout + g * d.coutg()) * hw_out,
                                      d.coutg(), hw_out);
                    if (need_dw) {
                        const T* col;
                        if (d.pointwise()) {
                            col = xp + g * d.Cg * d.H * d.W;
                        } else {
                            im2col(xp, d, g * d.Cg, col_buf.data());
                            col = col_buf.data();
                        }
                        MatMap<T>(nw->grad.data() + g * d.coutg() * ckk, d.coutg(), ckk)
                            .noalias() += gy * ConstMatMap<T>(col, ckk, hw_out).transpose();
                    }
                    if (need_dx) {
                        ConstMatMap<T> wg(nw->value.data() + g * d.coutg() * ckk, d.coutg(), ckk);
                        if (d.pointwise()) {
                            MatMap<T>(nx->grad.data() + (n * d.Cin + g * d.Cg) * d.H * d.W, ckk,
                                      hw_out)
                                .noalias() += wg.transpose() * gy;
                        } else {
                            MatMap<T>(dcol_buf.data(), ckk, hw_out).noalias() =
                                wg.transpose() * gy;
                            col2im_accum(dcol_buf.data(), d, g * d.Cg,
                                         nx->grad.data() + n * d.Cin * d.H * d.W);
                        }
                    }
                }
            }
            if (nb && nb->requires_grad) {
                ensure_grad(*nb);
                T* db = nb->grad.data();
                const T* g = self.grad.data();
                for (std::int64_t n = 0; n < d.N; ++n) {
                    for (std::int64_t c = 0; c < d.Cout; ++c) {
                        const T* row = g + (n * d.Cout + c) * hw_out;
                        T acc = T(0);
                        for (std::int64_t i = 0; i < hw_out; ++i) acc += row[i];
                        db[c] += acc;
                    }
                }
            }
        });
}

// ---------------------------------------------------------------------------
// normalization / softmax
// ---------------------------------------------------------------------------

template <typename T>
Var<T> group_norm(const Var<T>& x, int groups, const Var<T>& gamma, const Var<T>& beta, T eps) {
    const auto& s = x.shape();
    MINISTL_CHECK(s.size() == 4, ShapeError, "group_norm expects (N,C,H,W)");
    const std::int64_t N = s[0], C = s[1], HW = s[2] * s[3];
    MINISTL_CHECK(groups >= 1 && C % groups == 0, ConfigError,
                  "group_norm: C=" << C << " not divisible by groups=" << groups);
    MINISTL_CHECK(gamma.shape() == Shape{C} && beta.shape() == Shape{C}, ShapeError,
                  "group_norm affine shapes");
    const std::int64_t cg = C / groups;
    const std::int64_t m = cg * HW;

    Tensor<T> out(s);
    Tensor<T> mean({N, groups});
    Tensor<T> istd({N, groups});
    const T* xp = x.value().data();
    const T* gm = gamma.value().data();
    const T* bt = beta.value().data();
    T* y = out.data();
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t g = 0; g < groups; ++g) {
            const T* base = xp + (n * C + g * cg) * HW;
            double sum = 0, sq = 0;
            for (std::int64_t i = 0; i < m; ++i) {
                const double v = base[i];
                sum += v;
                sq += v * v;
            }
            const double mu = sum / m;
            const double var = std::max(0.0, sq / m - mu * mu);
            const double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
            mean.at(n, g) = static_cast<T>(mu);
            istd.at(n, g) = static_cast<T>(is);
            T* ybase = y + (n * C + g * cg) * HW;
            for (std::int64_t c = 0; c < cg; ++c) {
                const T gc = gm[g * cg + c];
                const T bc = bt[g * cg + c];
                const T* xrow = base + c * HW;
                T* yrow = ybase + c * HW;
                for (std::int64_t i = 0; i < HW; ++i) {
                    yrow[i] = static_cast<T>((xrow[i] - mu) * is) * gc + bc;
                }
            }
        }
    }

    auto nx = x.node();
    auto ng = gamma.node();
    auto nb = beta.node();
    return make_node<T>(
        std::move(out), {nx, ng, nb},
        [nx, ng, nb, mean, istd, N, C, HW, cg, groups](detail::Node<T>& self) {
            const std::int64_t m = cg * HW;
            const T* g = self.grad.data();
            const T* xp = nx->value.data();
            const T* gm = ng->value.data();
            if (nx->requires_grad) ensure_grad(*nx);
            if (ng->requires_grad) ensure_grad(*ng);
            if (nb->requires_grad) ensure_grad(*nb);
            for (std::int64_t n = 0; n < N; ++n) {
                for (std::int64_t gi = 0; gi < groups; ++gi) {
                    const T* xbase = xp + (n * C + gi * cg) * HW;
                    const T* gbase = g + (n * C + gi * cg) * HW;
                    const double mu = mean.at(n, gi);
                    const double is = istd.at(n, gi);
                    if (ng->requires_grad || nb->requires_grad) {
                        for (std::int64_t c = 0; c < cg; ++c) {
                            double dgc = 0, dbc = 0;
                            const T* xrow = xbase + c * HW;
                            const T* grow = gbase + c * HW;
                            for (std::int64_t i = 0; i < HW; ++i) {
                                dgc += grow[i] * (xrow[i] - mu) * is;
                                dbc += grow[i];
                            }
                            if (ng->requires_grad) {
                                ng->grad.data()[gi * cg + c] += static_cast<T>(dgc);
                            }
                            if (nb->requires_grad) {
                                nb->grad.data()[gi * cg + c] += static_cast<T>(dbc);
                            }
                        }
                    }
                    if (nx->requires_grad) {
                        double s1 = 0, s2 = 0;
                        for (std::int64_t c = 0; c < cg; ++c) {
                            const double gc = gm[gi * cg + c];
                            const T* xrow = xbase + c * HW;
                            const T* grow = gbase + c * HW;
                            for (std::int64_t i = 0; i < HW; ++i) {
                                const double dxh = grow[i] * gc;
                                s1 += dxh;
                                s2 += dxh * (xrow[i] - mu) * is;
                            }
                        }
                        s1 /= m;
                        s2 /= m;
                        T* dxbase = nx->grad.data() + (n * C + gi * cg) * HW;
                        for (std::int64_t c = 0; c < cg; ++c) {
                            const double gc = gm[gi * cg + c];
                            const T* xrow = xbase + c * HW;
                            const T* grow = gbase + c * HW;
                            T* dxrow = dxbase + c * HW;
                            for (std::int64_t i = 0; i < HW; ++i) {
                                const double xh = (xrow[i] - mu) * is;
                                const double dxh = grow[i] * gc;
                                dxrow[i] += static_cast<T>(is * (dxh - s1 - xh * s2));
                            }
                        }
                    }
                }
            }
        });
}

template <typename T>
Var<T> layer_norm_channel(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
    const auto& s = x.shape();
    MINISTL_CHECK(s.size() == 4, ShapeError, "layer_norm_channel expects (N,C,H,W)");
    const std::int64_t N = s[0], C = s[1], HW = s[2] * s[3];
    MINISTL_CHECK(gamma.shape() == Shape{C} && beta.shape() == Shape{C}, ShapeError,
                  "layer_norm_channel affine shapes");

    Tensor<T> out(s);
    Tensor<T> mean({N, HW});
    Tensor<T> istd({N, HW});
    const T* xp = x.value().data();
    const T* gm = gamma.value().data();
    const T* bt = beta.value().data();
    T* y = out.data();
    for (std::int64_t n = 0; n < N; ++n) {
        const T* xn = xp + n * C * HW;
        T* yn = y + n * C * HW;
        for (std::int64_t p = 0; p < HW; ++p) {
            double sum = 0, sq = 0;
            for (std::int64_t c = 0; c < C; ++c) {
                const double v = xn[c * HW + p];
                sum += v;
                sq += v * v;
            }
            const double mu = sum / C;
            const double var = std::max(0.0, sq / C - mu * mu);
            const double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
            mean.at(n, p) = static_cast<T>(mu);
            istd.at(n, p) = static_cast<T>(is);
            for (std::int64_t c = 0; c < C; ++c) {
                yn[c * HW + p] = static_cast<T>((xn[c * HW + p] - mu) * is) * gm[c] + bt[c];
            }
        }
    }

    auto nx = x.node();
    auto ng = gamma.node();
    auto nb = beta.node();
    return make_node<T>(
        std::move(out), {nx, ng, nb},
        [nx, ng, nb, mean, istd, N, C, HW](detail::Node<T>& self) {
            const T* g = self.grad.data();
            const T* xp = nx->value.data();
            const T* gm = ng->value.data();
            if (nx->requires_grad) ensure_grad(*nx);
            if (ng->requires_grad) ensure_grad(*ng);
            if (nb->requires_grad) ensure_grad(*nb);
            T* dgamma = ng->requires_grad ? ng->grad.data() : nullptr;
            T* dbeta = nb->requires_grad ? nb->grad.data() : nullptr;
            for (std::int64_t n = 0; n < N; ++n) {
                const T* xn = xp + n * C * HW;
                const T* gn = g + n * C * HW;
                for (std::int64_t p = 0; p < HW; ++p) {
                    const double mu = mean.at(n, p);
                    const double is = istd.at(n, p);
                    double s1 = 0, s2 = 0;
                    for (std::int64_t c = 0; c < C; ++c) {
                        const double xh = (xn[c * HW + p] - mu) * is;
                        const double gv = gn[c * HW + p];
                        if (dgamma) dgamma[c] += static_cast<T>(gv * xh);
                        if (dbeta) dbeta[c] += static_cast<T>(gv);
                        const double dxh = gv * gm[c];
                        s1 += dxh;
                        s2 += dxh * xh;
                    }
                    if (nx->requires_grad) {
                        s1 /= C;
                        s2 /= C;
                        T* dxn = nx->grad.data() + n * C * HW;
                        for (std::int64_t c = 0; c < C; ++c) {
                            const double xh = (xn[c * HW + p] - mu) * is;
                            const double dxh = gn[c * HW + p] * gm[c];
                            dxn[c * HW + p] += static_cast<T>(is * (dxh - s1 - xh * s2));
                        }
                    }
                }
            }
        });
}

template <typename T>
Var<T> softmax_lastdim(const Var<T>& a) {
    const auto& s = a.shape();
    MINISTL_CHECK(!s.empty(), ShapeError, "softmax on scalar");
    const std::int64_t D = s.back();
    const std::int64_t rows = a.numel() / D;
    Tensor<T> out(s);
    const T* x = a.value().data();
    T* y = out.data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const T* xr = x + r * D;
        T* yr = y + r * D;
        T mx = xr[0];
        for (std::int64_t i = 1; i < D; ++i) mx = std::max(mx, xr[i]);
        double denom = 0;
        for (std::int64_t i = 0; i < D; ++i) {
            const double e = std::exp(static_cast<double>(xr[i] - mx));
            yr[i] = static_cast<T>(e);
            denom += e;
        }
        const double inv = 1.0 / denom;
        for (std::int64_t i = 0; i < D; ++i) yr[i] = static_cast<T>(yr[i] * inv);
    }
    auto pa = a.node();
    return make_node<T>(std::move(out), {pa}, [pa, rows, D](detail::Node<T>& self) {
        ensure_grad(*pa);
        const T* g = self.grad.data();
        const T* y = self.value.data();
        T* dx = pa->grad.data();
        for (std::int64_t r = 0; r < rows; ++r) {
            const T* gr = g + r * D;
            const T* yr = y + r * D;
            T* dr = dx + r * D;
            double dot = 0;
            for (std::int64_t i = 0; i < D; ++i) dot += static_cast<double>(gr[i]) * yr[i];
            for (std::int64_t i = 0; i < D; ++i) {
                dr[i] += static_cast<T>(yr[i] * (gr[i] - dot));
            }
        }
    });
}

// ---------------------------------------------------------------------------
// spatial
// ---------------------------------------------------------------------------

template <typename T>
Var<T> pixel_shuffle(const Var<T>& x, int upscale) {
    const auto& s = x.shape();
    MINISTL_CHECK(s.size() == 4, ShapeError, "pixel_shuffle expects (N,C,H,W)");
    const std::int64_t r = upscale;
    const std::int64_t N = s[0], C_in = s[1], H = s[2], W = s[3];
    MINISTL_CHECK(C_in % (r * r) == 0, ShapeError,
                  "pixel_shuffle: " << C_in << " channels not divisible by " << r * r);
    const std::int64_t C = C_in / (r * r);
    Tensor<T> out({N, C, H * r, W * r});
    const T* xp = x.value().data();
    T* y = out.data();
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t c = 0; c < C; ++c) {
            for (std::int64_t dy = 0; dy < r; ++dy) {
                for (std::int64_t dx = 0; dx < r; ++dx) {
                    const T* src = xp + ((n * C_in + (c * r + dy) * r + dx) * H) * W;
                    for (std::int64_t h = 0; h < H; ++h) {
                        T* drow = y + ((n * C + c) * H * r + h * r + dy) * W * r + dx;
                        const T* srow = src + h * W;
                        for (std::int64_t w = 0; w < W; ++w) drow[w * r] = srow[w];
                    }
                }
            }
        }
    }
    auto pa = x.node();
    return make_node<T>(std::move(out), {pa}, [pa, N, C, C_in, H, W, r](detail::Node<T>& self) {
        ensure_grad(*pa);
        const T* g = self.grad.data();
        T* dx = pa->grad.data();
        for (std::int64_t n = 0; n < N; ++n) {
            for (std::int64_t c = 0; c < C; ++c) {
                for (std::int64_t dy = 0; dy < r; ++dy) {
                    for (std::int64_t dxk = 0; dxk < r; ++dxk) {
                        T* dst = dx + ((n * C_in + (c * r + dy) * r + dxk) * H) * W;
                        for (std::int64_t h = 0; h < H; ++h) {
                            const T* grow =
                                g + ((n * C + c) * H * r + h * r + dy) * W * r + dxk;
                            T* drow = dst + h * W;
                            for (std::int64_t w = 0; w < W; ++w) drow[w] += grow[w * r];
                        }
                    }
                }
            }
        }
    });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
    const auto& s = x.shape();
    MINISTL_CHECK(s.size() == 4, ShapeError, "global_avg_pool expects (N,C,H,W)");
    const std::int64_t N = s[0], C = s[1], HW = s[2] * s[3];
    Tensor<T> out({N, C, 1, 1});
    const T* xp = x.value().data();
    T* y = out.data();
    for (std::int64_t i = 0; i < N * C; ++i) {
        double acc = 0;
        const T* row = xp + i * HW;
        for (std::int64_t j = 0; j < HW; ++j) acc += row[j];
        y[i] = static_cast<T>(acc / HW);
    }
    auto pa = x.node();
    return make_node<T>(std::move(out), {pa}, [pa, N, C, HW](detail::Node<T>& self) {
        ensure_grad(*pa);
        const T* g = self.grad.data();
        T* dx = pa->grad.data();
        for (std::int64_t i = 0; i < N * C; ++i) {
            const T gi = static_cast<T>(g[i] / static_cast<T>(HW));
            T* row = dx + i * HW;
            for (std::int64_t j = 0; j < HW; ++j) row[j] += gi;
        }
    });
}

template <typename T>
Var<T> mul_channel_gate(const Var<T>& x, const Var<T>& g) {
    const auto& s = x.shape();
    MINISTL_CHECK(s.size() == 4, ShapeError, "mul_channel_gate expects (N,C,H,W)");
    const std::int64_t N = s[0], C = s[1], HW = s[2] * s[3];
    MINISTL_CHECK((g.shape() == Shape{N, C, 1, 1}), ShapeError,
                  "gate shape " << shape_str(g.shape()) << " vs x " << shape_str(s));
    Tensor<T> out(s);
    const T* xp = x.value().data();
    const T* gp = g.value().data();
    T* y = out.data();
    for (std::int64_t i = 0; i < N * C; ++i) {
        const T gi = gp[i];
        const T* row = xp + i * HW;
        T* yrow = y + i * HW;
        for (std::int64_t j = 0; j < HW; ++j) yrow[j] = row[j] * gi;
    }
    auto nx = x.node();
    auto ng = g.node();
    return make_node<T>(std::move(out), {nx, ng}, [nx, ng, N, C, HW](detail::Node<T>& self) {
        const T* gr = self.grad.data();
        if (nx->requires_grad) {
            ensure_grad(*nx);
            const T* gp = ng->value.data();
            T* dx = nx->grad.data();
            for (std::int64_t i = 0; i < N * C; ++i) {
                const T gi = gp[i];
                const T* grow = gr + i * HW;
                T* drow = dx + i * HW;
                for (std::int64_t j = 0; j < HW; ++j) drow[j] += grow[j] * gi;
            }
        }
        if (ng->requires_grad) {
            ensure_grad(*ng);
            const T* xp = nx->value.data();
            T* dg = ng->grad.data();
            for (std::int64_t i = 0; i < N * C; ++i) {
                double acc = 0;
                const T* grow = gr + i * HW;
                const T* xrow = xp + i * HW;
                for (std::int64_t j = 0; j < HW; ++j) acc += static_cast<double>(grow[j]) * xrow[j];
                dg[i] += static_cast<T>(acc);
            }
        }
    });
}

template <typename T>
Var<T> scale_per_sample(const Var<T>& x, const Tensor<T>& mask) {
    const auto& s = x.shape();
    MINISTL_CHECK(!s.empty() && mask.numel() == s[0], ShapeError,
                  "scale_per_sample mask length " << mask.numel() << " vs batch " << s[0]);
    const std::int64_t N = s[0];
    const std::int64_t inner = x.numel() / N;
    Tensor<T> out(s);
    const T* xp = x.value().data();
    const T* m = mask.data();
    T* y = out.data();
    for (std::int64_t n = 0; n < N; ++n) {
        const T mn = m[n];
        const T* row = xp + n * inner;
        T* yrow = y + n * inner;
        for (std::int64_t i = 0; i < inner; ++i) yrow[i] = row[i] * mn;
    }
    auto pa = x.node();
    return make_node<T>(std::move(out), {pa}, [pa, mask, N, inner](detail::Node<T>& self) {
        ensure_grad(*pa);
        const T* g = self.grad.data();
        const T* m = mask.data();
        T* dx = pa->grad.data();
        for (std::int64_t n = 0; n < N; ++n) {
            const T mn = m[n];
            const T* grow = g + n * inner;
            T* drow = dx + n * inner;
            for (std::int64_t i = 0; i < inner; ++i) drow[i] += grow[i] * mn;
        }
    });
}

// ---------------------------------------------------------------------------
// reductions / losses
// ---------------------------------------------------------------------------

template <typename T>
Var<T> sum_all(const Var<T>& a) {
    double acc = 0;
    const T* x = a.value().data();
    for (std::int64_t i = 0; i < a.numel(); ++i) acc += x[i];
    auto pa = a.node();
    return make_node<T>(Tensor<T>::scalar(static_cast<T>(acc)), {pa},
                        [pa](detail::Node<T>& self) {
                            ensure_grad(*pa);
                            const T g = self.grad.data()[0];
                            T* dx = pa->grad.data();
                            for (std::int64_t i = 0; i < pa->value.numel(); ++i) dx[i] += g;
                        });
}

template <typename T>
Var<T> mean_all(const Var<T>& a) {
    double acc = 0;
    const T* x = a.value().data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) acc += x[i];
    auto pa = a.node();
    return make_node<T>(Tensor<T>::scalar(static_cast<T>(acc / n)), {pa},
                        [pa, n](detail::Node<T>& self) {
                            ensure_grad(*pa);
                            const T g = static_cast<T>(self.grad.data()[0] / static_cast<T>(n));
                            T* dx = pa->grad.data();
                            for (std::int64_t i = 0; i < n; ++i) dx[i] += g;
                        });
}

template <typename T>
Var<T> mse_loss(const Var<T>& pred, const Tensor<T>& target) {
    MINISTL_CHECK(pred.shape() == target.shape(), ShapeError,
                  "mse_loss: " << shape_str(pred.shape()) << " vs "
                               << shape_str(target.shape()));
    const std::int64_t n = pred.numel();
    double acc = 0;
    const T* p = pred.value().data();
    const T* t = target.data();
    for (std::int64_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(p[i]) - t[i];
        acc += e * e;
    }
    auto pa = pred.node();
    return make_node<T>(Tensor<T>::scalar(static_cast<T>(acc / n)), {pa},
                        [pa, target, n](detail::Node<T>& self) {
                            ensure_grad(*pa);
                            const T g = self.grad.data()[0];
                            const T* p = pa->value.data();
                            const T* t = target.data();
                            T* dx = pa->grad.data();
                            const T c = g * T(2) / static_cast<T>(n);
                            for (std::int64_t i = 0; i < n; ++i) dx[i] += c * (p[i] - t[i]);
                        });
}

// ---------------------------------------------------------------------------
// explicit instantiation
// ---------------------------------------------------------------------------

#define MINISTL_INSTANTIATE_OPS(T)                                                             \
    template class Var<T>;                                                                     \
    template void accumulate_grad<T>(Tensor<T>&, const Tensor<T>&);                            \
    template Var<T> add<T>(const Var<T>&, const Var<T>&);                                      \
    template Var<T> sub<T>(const Var<T>&, const Var<T>&);                                      \
    template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                      \
    template Var<T> scale<T>(const Var<T>&, T);                                                \
    template Var<T> sigmoid<T>(const Var<T>&);                                                 \
    template Var<T> tanh_op<T>(const Var<T>&);                                                 \
    template Var<T> silu<T>(const Var<T>&);                                                    \
    template Var<T> gelu<T>(const Var<T>&);                                                    \
    template Var<T> reshape<T>(const Var<T>&, Shape);                                          \
    template Var<T> permute<T>(const Var<T>&, const std::vector<int>&);                        \
    template Var<T> narrow<T>(const Var<T>&, int, std::int64_t, std::int64_t);                 \
    template Var<T> concat<T>(const std::vector<Var<T>>&, int);                                \
    template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                                   \
    template Var<T> bmm<T>(const Var<T>&, const Var<T>&);                                      \
    template Var<T> transpose_last2<T>(const Var<T>&);                                         \
    template Var<T> linear<T>(const Var<T>&, const Var<T>&, const Var<T>&);                    \
    template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, const Conv2dSpec&); \
    template Var<T> group_norm<T>(const Var<T>&, int, const Var<T>&, const Var<T>&, T);        \
    template Var<T> layer_norm_channel<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);     \
    template Var<T> softmax_lastdim<T>(const Var<T>&);                                         \
    template Var<T> pixel_shuffle<T>(const Var<T>&, int);                                      \
    template Var<T> global_avg_pool<T>(const Var<T>&);                                         \
    template Var<T> mul_channel_gate<T>(const Var<T>&, const Var<T>&);                         \
    template Var<T> scale_per_sample<T>(const Var<T>&, const Tensor<T>&);                      \
    template Var<T> sum_all<T>(const Var<T>&);                                                 \
    template Var<T> mean_all<T>(const Var<T>&);                                                \
    template Var<T> mse_loss<T>(const Var<T>&, const Tensor<T>&);

MINISTL_INSTANTIATE_OPS(float)
MINISTL_INSTANTIATE_OPS(double)

#undef MINISTL_INSTANTIATE_OPS

}  // namespace ministl::nn

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ministl/tensor.hpp"

namespace ministl::nn {

namespace detail {

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
    bool leaf = false;
    std::string name;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backward_fn;
};

}  // namespace detail

/// Handle to a node of a dynamically built computation graph. Graphs are
/// single-use: backward() consumes the tape, releasing intermediate grads
/// and closures as it walks. Leaf parameters keep their accumulated grads.
template <typename T>
class Var {
public:
    using NodePtr = std::shared_ptr<detail::Node<T>>;

    Var() = default;
    explicit Var(NodePtr n) : node_(std::move(n)) {}

    static Var leaf(Tensor<T> value, bool requires_grad, std::string name = {}) {
        auto n = std::make_shared<detail::Node<T>>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        n->leaf = true;
        n->name = std::move(name);
        return Var(std::move(n));
    }

    static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

    bool defined() const { return node_ != nullptr; }
    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& value() { return node_->value; }
    const Tensor<T>& grad() const { return node_->grad; }
    Tensor<T>& grad() { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const Shape& shape() const { return node_->value.shape(); }
    std::int64_t numel() const { return node_->value.numel(); }
    const std::string& name() const { return node_->name; }

    void zero_grad() { node_->grad.reset(); }

    /// Backpropagate from this node. Without a seed the node must be scalar
    /// (gradient 1). The graph below this node is released in the process.
    void backward() const;
    void backward(const Tensor<T>& seed) const;

    NodePtr node() const { return node_; }

private:
    NodePtr node_;
};

/// dst += src, allocating dst as zeros first if undefined.
template <typename T>
void accumulate_grad(Tensor<T>& dst, const Tensor<T>& src);

// ---- elementwise ----
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T s);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> tanh_op(const Var<T>& a);
template <typename T> Var<T> silu(const Var<T>& a);
template <typename T> Var<T> gelu(const Var<T>& a);

// ---- shape ----
template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);
template <typename T> Var<T> permute(const Var<T>& a, const std::vector<int>& perm);
/// Slice [start, start+len) along axis; copies.
template <typename T> Var<T> narrow(const Var<T>& a, int axis, std::int64_t start, std::int64_t len);
template <typename T> Var<T> concat(const std::vector<Var<T>>& xs, int axis);

// ---- linear algebra ----
template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);          // (M,K)x(K,N)
template <typename T> Var<T> bmm(const Var<T>& a, const Var<T>& b);             // (B,M,K)x(B,K,N)
template <typename T> Var<T> transpose_last2(const Var<T>& a);
/// x:(N,F) w:(O,F) b:(O) -> (N,O); bias optional (undefined Var skips it).
template <typename T> Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b);

struct Conv2dSpec {
    int stride = 1;
    int padding = 0;
    int dilation = 1;
    int groups = 1;
};

/// x:(N,Cin,H,W) w:(Cout,Cin/groups,Kh,Kw) b:(Cout) optional.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, const Conv2dSpec& spec);

// ---- normalization / softmax ----
template <typename T>
Var<T> group_norm(const Var<T>& x, int groups, const Var<T>& gamma, const Var<T>& beta, T eps);
/// LayerNorm over the channel axis of (N,C,H,W), per spatial position.
template <typename T>
Var<T> layer_norm_channel(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps);
template <typename T> Var<T> softmax_lastdim(const Var<T>& a);

// ---- spatial ----
template <typename T> Var<T> pixel_shuffle(const Var<T>& x, int upscale);
template <typename T> Var<T> global_avg_pool(const Var<T>& x);                   // (N,C,H,W)->(N,C,1,1)
template <typename T> Var<T> mul_channel_gate(const Var<T>& x, const Var<T>& g); // g:(N,C,1,1)

/// Multiplies sample n by mask[n] (stochastic depth); mask is a constant.
template <typename T> Var<T> scale_per_sample(const Var<T>& x, const Tensor<T>& mask);

// ---- reductions / losses ----
template <typename T> Var<T> sum_all(const Var<T>& a);
template <typename T> Var<T> mean_all(const Var<T>& a);
/// Mean squared error against a constant target, as a scalar node.
template <typename T> Var<T> mse_loss(const Var<T>& pred, const Tensor<T>& target);

}  // namespace ministl::nn

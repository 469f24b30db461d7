#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ministl/autograd.hpp"
#include "ministl/rng.hpp"

namespace ministl::nn {

template <typename T>
struct NamedParam {
    std::string name;
    Var<T> param;
};

/// Ordered parameter list; order is the construction order and is part of
/// the reproducibility contract (initialization draws and optimizer state
/// slots follow it).
template <typename T>
using ParamMap = std::vector<NamedParam<T>>;

enum class Init { he_normal, trunc_normal02, zeros };

template <typename T>
Tensor<T> init_tensor(const Shape& shape, Init kind, std::int64_t fan_in, Rng& rng);

/// Largest of {8, 4, 2, 1} dividing the channel count.
int norm_groups(int channels);

template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int kernel, Conv2dSpec spec, Init init, Rng& rng,
           bool bias = true);
    Var<T> operator()(const Var<T>& x) const { return conv2d(x, weight, bias, spec); }
    void collect(const std::string& prefix, ParamMap<T>& out);

    Var<T> weight;
    Var<T> bias;  // undefined when constructed without bias
    Conv2dSpec spec;
};

template <typename T>
class Linear {
public:
    Linear() = default;
    Linear(int in_features, int out_features, Init init, Rng& rng, bool bias = true);
    Var<T> operator()(const Var<T>& x) const { return linear(x, weight, bias); }
    void collect(const std::string& prefix, ParamMap<T>& out);

    Var<T> weight;
    Var<T> bias;
};

template <typename T>
class GroupNormLayer {
public:
    GroupNormLayer() = default;
    explicit GroupNormLayer(int channels);
    Var<T> operator()(const Var<T>& x) const {
        return group_norm(x, groups, gamma, beta, T(1e-5));
    }
    void collect(const std::string& prefix, ParamMap<T>& out);

    int groups = 1;
    Var<T> gamma;
    Var<T> beta;
};

template <typename T>
class ChannelLayerNorm {
public:
    ChannelLayerNorm() = default;
    explicit ChannelLayerNorm(int channels);
    Var<T> operator()(const Var<T>& x) const {
        return layer_norm_channel(x, gamma, beta, T(1e-5));
    }
    void collect(const std::string& prefix, ParamMap<T>& out);

    Var<T> gamma;
    Var<T> beta;
};

/// 3x3 conv + group norm + SiLU; the encoder/decoder workhorse.
template <typename T>
class ConvBlock {
public:
    ConvBlock() = default;
    ConvBlock(int in_ch, int out_ch, int stride, Rng& rng);
    Var<T> operator()(const Var<T>& x) const;
    void collect(const std::string& prefix, ParamMap<T>& out);

    Conv2d<T> conv;
    GroupNormLayer<T> norm;
};

/// Doubles spatial resolution: 3x3 conv to 4x channels, pixel shuffle,
/// group norm, SiLU.
template <typename T>
class UpConvBlock {
public:
    UpConvBlock() = default;
    UpConvBlock(int in_ch, int out_ch, Rng& rng);
    Var<T> operator()(const Var<T>& x) const;
    void collect(const std::string& prefix, ParamMap<T>& out);

    Conv2d<T> conv;
    GroupNormLayer<T> norm;
};

/// Stochastic depth over the batch axis. In training mode each sample's
/// branch is dropped with probability p and survivors are scaled by
/// 1/(1-p); in eval mode this is the identity.
template <typename T>
Var<T> drop_path(const Var<T>& x, double p, bool training, Rng& rng);

// ---------------------------------------------------------------------------
// token mixers
// ---------------------------------------------------------------------------

template <typename T>
class Mixer {
public:
    virtual ~Mixer() = default;
    virtual Var<T> forward(const Var<T>& x) const = 0;
    virtual void collect(const std::string& prefix, ParamMap<T>& out) = 0;
};

/// ViT-style multi-head self-attention over the flattened spatial tokens.
template <typename T>
class AttentionMixer : public Mixer<T> {
public:
    AttentionMixer(int dim, int heads, Rng& rng);
    Var<T> forward(const Var<T>& x) const override;
    void collect(const std::string& prefix, ParamMap<T>& out) override;

    int dim = 0;
    int heads = 8;
    Linear<T> qkv;
    Linear<T> proj;
};

/// Token-mixing MLP across the spatial axis (hidden ratio 0.5). The token
/// count is fixed at construction from the latent resolution.
template <typename T>
class MlpMixerToken : public Mixer<T> {
public:
    MlpMixerToken(int tokens, Rng& rng);
    Var<T> forward(const Var<T>& x) const override;
    void collect(const std::string& prefix, ParamMap<T>& out) override;

    int tokens = 0;
    Linear<T> fc1;
    Linear<T> fc2;
};

/// ConvNeXt-style spatial mixing: depthwise 7x7.
template <typename T>
class ConvNextMixer : public Mixer<T> {
public:
    ConvNextMixer(int dim, Rng& rng);
    Var<T> forward(const Var<T>& x) const override;
    void collect(const std::string& prefix, ParamMap<T>& out) override;

    Conv2d<T> dw;
};

/// Static depthwise attention (5x5, then dilated 5x5, then 1x1 producing an
/// attention map) multiplied with the input, gated by a squeeze channel
/// gate from global average pooling.
template <typename T>
class GatedAttentionMixer : public Mixer<T> {
public:
    GatedAttentionMixer(int dim, Rng& rng);
    Var<T> forward(const Var<T>& x) const override;
    void collect(const std::string& prefix, ParamMap<T>& out) override;

    Conv2d<T> dw;
    Conv2d<T> dw_dilated;
    Conv2d<T> pw;
    Linear<T> gate;
};

/// Pre-norm MetaFormer block: residual token mixing followed by a residual
/// channel MLP, both with stochastic depth.
template <typename T>
class MetaFormerBlock {
public:
    MetaFormerBlock() = default;
    MetaFormerBlock(int dim, std::unique_ptr<Mixer<T>> mixer, double expansion,
                    double drop_path_prob, Rng& rng);
    Var<T> forward(const Var<T>& x, bool training, Rng& rng) const;
    void collect(const std::string& prefix, ParamMap<T>& out);

    int dim = 0;
    double drop_prob = 0.0;
    ChannelLayerNorm<T> norm1;
    std::unique_ptr<Mixer<T>> mixer;
    ChannelLayerNorm<T> norm2;
    Conv2d<T> mlp_in;
    Conv2d<T> mlp_out;
};

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

template <typename T>
class Adam {
public:
    Adam(ParamMap<T> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);
    void step();
    void zero_grad();

    double lr;

private:
    ParamMap<T> params_;
    std::vector<Tensor<T>> m_;
    std::vector<Tensor<T>> v_;
    double beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

}  // namespace ministl::nn

#include "ministl/nn.hpp"

#include <cmath>

namespace ministl::nn {

int norm_groups(int channels) {
    for (int g : {8, 4, 2}) {
        if (channels % g == 0) return g;
    }
    return 1;
}

template <typename T>
Tensor<T> init_tensor(const Shape& shape, Init kind, std::int64_t fan_in, Rng& rng) {
    Tensor<T> t(shape);
    T* p = t.data();
    switch (kind) {
        case Init::zeros:
            break;
        case Init::trunc_normal02: {
            for (std::int64_t i = 0; i < t.numel(); ++i) {
                double v = rng.normal(0.0, 0.02);
                while (std::abs(v) > 0.04) v = rng.normal(0.0, 0.02);
                p[i] = static_cast<T>(v);
            }
            break;
        }
        case Init::he_normal: {
            const double stddev = std::sqrt(2.0 / static_cast<double>(std::max<std::int64_t>(1, fan_in)));
            for (std::int64_t i = 0; i < t.numel(); ++i) {
                p[i] = static_cast<T>(rng.normal(0.0, stddev));
            }
            break;
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(int in_ch, int out_ch, int kernel, Conv2dSpec spec_in, Init init, Rng& rng,
                  bool with_bias)
    : spec(spec_in) {
    MINISTL_CHECK(in_ch % spec.groups == 0, ConfigError,
                  "conv in_ch " << in_ch << " not divisible by groups " << spec.groups);
    const int cg = in_ch / spec.groups;
    const std::int64_t fan_in = static_cast<std::int64_t>(cg) * kernel * kernel;
    weight = Var<T>::leaf(init_tensor<T>({out_ch, cg, kernel, kernel}, init, fan_in, rng), true);
    if (with_bias) {
        bias = Var<T>::leaf(Tensor<T>::zeros({out_ch}), true);
    }
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    out.push_back({prefix + ".weight", weight});
    if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

template <typename T>
Linear<T>::Linear(int in_features, int out_features, Init init, Rng& rng, bool with_bias) {
    weight = Var<T>::leaf(init_tensor<T>({out_features, in_features}, init, in_features, rng), true);
    if (with_bias) {
        bias = Var<T>::leaf(Tensor<T>::zeros({out_features}), true);
    }
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    out.push_back({prefix + ".weight", weight});
    if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

template <typename T>
GroupNormLayer<T>::GroupNormLayer(int channels) : groups(norm_groups(channels)) {
    gamma = Var<T>::leaf(Tensor<T>::full({channels}, T(1)), true);
    beta = Var<T>::leaf(Tensor<T>::zeros({channels}), true);
}

template <typename T>
void GroupNormLayer<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    out.push_back({prefix + ".gamma", gamma});
    out.push_back({prefix + ".beta", beta});
}

template <typename T>
ChannelLayerNorm<T>::ChannelLayerNorm(int channels) {
    gamma = Var<T>::leaf(Tensor<T>::full({channels}, T(1)), true);
    beta = Var<T>::leaf(Tensor<T>::zeros({channels}), true);
}

template <typename T>
void ChannelLayerNorm<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    out.push_back({prefix + ".gamma", gamma});
    out.push_back({prefix + ".beta", beta});
}

template <typename T>
ConvBlock<T>::ConvBlock(int in_ch, int out_ch, int stride, Rng& rng)
    : conv(in_ch, out_ch, 3, Conv2dSpec{stride, 1, 1, 1}, Init::he_normal, rng),
      norm(out_ch) {}

template <typename T>
Var<T> ConvBlock<T>::operator()(const Var<T>& x) const {
    return silu(norm(conv(x)));
}

template <typename T>
void ConvBlock<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    conv.collect(prefix + ".conv", out);
    norm.collect(prefix + ".norm", out);
}

template <typename T>
UpConvBlock<T>::UpConvBlock(int in_ch, int out_ch, Rng& rng)
    : conv(in_ch, out_ch * 4, 3, Conv2dSpec{1, 1, 1, 1}, Init::he_normal, rng),
      norm(out_ch) {}

template <typename T>
Var<T> UpConvBlock<T>::operator()(const Var<T>& x) const {
    return silu(norm(pixel_shuffle(conv(x), 2)));
}

template <typename T>
void UpConvBlock<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    conv.collect(prefix + ".conv", out);
    norm.collect(prefix + ".norm", out);
}

template <typename T>
Var<T> drop_path(const Var<T>& x, double p, bool training, Rng& rng) {
    if (!training || p <= 0.0) return x;
    const std::int64_t n = x.shape()[0];
    Tensor<T> mask({n});
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (std::int64_t i = 0; i < n; ++i) {
        mask[i] = rng.bernoulli(p) ? T(0) : keep_scale;
    }
    return scale_per_sample(x, mask);
}

// ---------------------------------------------------------------------------
// mixers
// ---------------------------------------------------------------------------

template <typename T>
AttentionMixer<T>::AttentionMixer(int dim_in, int heads_in, Rng& rng)
    : dim(dim_in),
      heads(heads_in),
      qkv(dim_in, dim_in * 3, Init::trunc_normal02, rng),
      proj(dim_in, dim_in, Init::zeros, rng) {
    MINISTL_CHECK(dim % heads == 0, ConfigError,
                  "attention dim " << dim << " not divisible by heads " << heads);
}

template <typename T>
Var<T> AttentionMixer<T>::forward(const Var<T>& x) const {
    const auto& s = x.shape();
    const std::int64_t B = s[0], C = s[1], H = s[2], W = s[3];
    const std::int64_t N = H * W;
    const std::int64_t dh = C / heads;

    // (B,C,H,W) -> tokens (B*N, C)
    auto tokens = reshape(permute(reshape(x, {B, C, N}), {0, 2, 1}), {B * N, C});
    auto qkv_out = qkv(tokens);  // (B*N, 3C)
    auto split = reshape(qkv_out, {B, N, 3 * C});
    auto q = narrow(split, 2, 0, C);
    auto k = narrow(split, 2, C, C);
    auto v = narrow(split, 2, 2 * C, C);

    auto to_heads = [&](const Var<T>& t) {
        // (B,N,C) -> (B*heads, N, dh)
        return reshape(permute(reshape(t, {B, N, heads, dh}), {0, 2, 1, 3}),
                       {B * heads, N, dh});
    };
    auto qh = to_heads(q);
    auto kh = to_heads(k);
    auto vh = to_heads(v);

    auto scores = scale(bmm(qh, transpose_last2(kh)),
                        static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))));
    auto attn = softmax_lastdim(scores);
    auto ctx = bmm(attn, vh);  // (B*heads, N, dh)

    auto merged = reshape(permute(reshape(ctx, {B, heads, N, dh}), {0, 2, 1, 3}), {B * N, C});
    auto projected = proj(merged);
    return reshape(permute(reshape(projected, {B, N, C}), {0, 2, 1}), {B, C, H, W});
}

template <typename T>
void AttentionMixer<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    qkv.collect(prefix + ".qkv", out);
    proj.collect(prefix + ".proj", out);
}

template <typename T>
MlpMixerToken<T>::MlpMixerToken(int tokens_in, Rng& rng)
    : tokens(tokens_in),
      fc1(tokens_in, std::max(1, tokens_in / 2), Init::trunc_normal02, rng),
      fc2(std::max(1, tokens_in / 2), tokens_in, Init::zeros, rng) {}

template <typename T>
Var<T> MlpMixerToken<T>::forward(const Var<T>& x) const {
    const auto& s = x.shape();
    const std::int64_t B = s[0], C = s[1], H = s[2], W = s[3];
    MINISTL_CHECK(H * W == tokens, ShapeError,
                  "mlp_mixer built for " << tokens << " tokens, got " << H * W);
    auto rows = reshape(x, {B * C, tokens});
    auto mixed = fc2(gelu(fc1(rows)));
    return reshape(mixed, {B, C, H, W});
}

template <typename T>
void MlpMixerToken<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    fc1.collect(prefix + ".fc1", out);
    fc2.collect(prefix + ".fc2", out);
}

template <typename T>
ConvNextMixer<T>::ConvNextMixer(int dim, Rng& rng)
    : dw(dim, dim, 7, Conv2dSpec{1, 3, 1, dim}, Init::zeros, rng) {}

template <typename T>
Var<T> ConvNextMixer<T>::forward(const Var<T>& x) const {
    return dw(x);
}

template <typename T>
void ConvNextMixer<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    dw.collect(prefix + ".dw", out);
}

template <typename T>
GatedAttentionMixer<T>::GatedAttentionMixer(int dim, Rng& rng)
    : dw(dim, dim, 5, Conv2dSpec{1, 2, 1, dim}, Init::he_normal, rng),
      dw_dilated(dim, dim, 5, Conv2dSpec{1, 6, 3, dim}, Init::he_normal, rng),
      pw(dim, dim, 1, Conv2dSpec{}, Init::zeros, rng),
      gate(dim, dim, Init::trunc_normal02, rng) {}

template <typename T>
Var<T> GatedAttentionMixer<T>::forward(const Var<T>& x) const {
    const auto& s = x.shape();
    const std::int64_t B = s[0], C = s[1];
    auto attn = pw(dw_dilated(dw(x)));
    auto pooled = reshape(global_avg_pool(x), {B, C});
    auto g = reshape(sigmoid(gate(pooled)), {B, C, 1, 1});
    return mul_channel_gate(mul(x, attn), g);
}

template <typename T>
void GatedAttentionMixer<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    dw.collect(prefix + ".dw", out);
    dw_dilated.collect(prefix + ".dw_dilated", out);
    pw.collect(prefix + ".pw", out);
    gate.collect(prefix + ".gate", out);
}

// ---------------------------------------------------------------------------
// block
// ---------------------------------------------------------------------------

template <typename T>
MetaFormerBlock<T>::MetaFormerBlock(int dim_in, std::unique_ptr<Mixer<T>> mixer_in,
                                    double expansion, double drop_path_prob, Rng& rng)
    : dim(dim_in),
      drop_prob(drop_path_prob),
      norm1(dim_in),
      mixer(std::move(mixer_in)),
      norm2(dim_in) {
    const int hidden = std::max(1, static_cast<int>(std::lround(dim_in * expansion)));
    mlp_in = Conv2d<T>(dim_in, hidden, 1, Conv2dSpec{}, Init::trunc_normal02, rng);
    mlp_out = Conv2d<T>(hidden, dim_in, 1, Conv2dSpec{}, Init::zeros, rng);
}

template <typename T>
Var<T> MetaFormerBlock<T>::forward(const Var<T>& x, bool training, Rng& rng) const {
    auto y = add(x, drop_path(mixer->forward(norm1(x)), drop_prob, training, rng));
    auto z = add(y, drop_path(mlp_out(gelu(mlp_in(norm2(y)))), drop_prob, training, rng));
    return z;
}

template <typename T>
void MetaFormerBlock<T>::collect(const std::string& prefix, ParamMap<T>& out) {
    norm1.collect(prefix + ".norm1", out);
    mixer->collect(prefix + ".mixer", out);
    norm2.collect(prefix + ".norm2", out);
    mlp_in.collect(prefix + ".mlp_in", out);
    mlp_out.collect(prefix + ".mlp_out", out);
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

template <typename T>
Adam<T>::Adam(ParamMap<T> params, double lr_in, double beta1, double beta2, double eps)
    : lr(lr_in), params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.push_back(Tensor<T>::zeros(p.param.shape()));
        v_.push_back(Tensor<T>::zeros(p.param.shape()));
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = params_[k].param;
        if (!p.grad().defined()) continue;
        T* w = p.value().data();
        const T* g = p.grad().data();
        T* m = m_[k].data();
        T* v = v_[k].data();
        const std::int64_t n = p.numel();
        for (std::int64_t i = 0; i < n; ++i) {
            const double gi = g[i];
            const double mi = beta1_ * m[i] + (1.0 - beta1_) * gi;
            const double vi = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            w[i] -= static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps_));
        }
    }
}

template <typename T>
void Adam<T>::zero_grad() {
    for (auto& p : params_) p.param.zero_grad();
}

// ---------------------------------------------------------------------------
// explicit instantiation
// ---------------------------------------------------------------------------

#define MINISTL_INSTANTIATE_NN(T)                                             \
    template Tensor<T> init_tensor<T>(const Shape&, Init, std::int64_t, Rng&); \
    template class Conv2d<T>;                                                 \
    template class Linear<T>;                                                 \
    template class GroupNormLayer<T>;                                         \
    template class ChannelLayerNorm<T>;                                       \
    template class ConvBlock<T>;                                              \
    template class UpConvBlock<T>;                                            \
    template Var<T> drop_path<T>(const Var<T>&, double, bool, Rng&);          \
    template class AttentionMixer<T>;                                         \
    template class MlpMixerToken<T>;                                          \
    template class ConvNextMixer<T>;                                          \
    template class GatedAttentionMixer<T>;                                    \
    template class MetaFormerBlock<T>;                                        \
    template class Adam<T>;

MINISTL_INSTANTIATE_NN(float)
MINISTL_INSTANTIATE_NN(double)

#undef MINISTL_INSTANTIATE_NN

}  // namespace ministl::nn

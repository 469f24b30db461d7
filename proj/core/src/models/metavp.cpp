#include "ministl/models/metavp.hpp"

namespace ministl::models {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;      // "init"
constexpr std::uint64_t kDropPathStream = 0x64726f70;  // "drop"

template <typename T>
std::unique_ptr<nn::Mixer<T>> make_mixer(MixerKind kind, int dim, int heads, int tokens,
                                         Rng& rng) {
    switch (kind) {
        case MixerKind::attention:
            return std::make_unique<nn::AttentionMixer<T>>(dim, heads, rng);
        case MixerKind::mlp_mixer:
            return std::make_unique<nn::MlpMixerToken<T>>(tokens, rng);
        case MixerKind::conv_next:
            return std::make_unique<nn::ConvNextMixer<T>>(dim, rng);
        case MixerKind::gated_attention:
            return std::make_unique<nn::GatedAttentionMixer<T>>(dim, rng);
    }
    throw ConfigError("unknown mixer kind");
}

}  // namespace

std::unique_ptr<nn::Mixer<float>> make_mixer_f32(MixerKind kind, int dim, int heads, int tokens,
                                                 Rng& rng) {
    return make_mixer<float>(kind, dim, heads, tokens, rng);
}

template <typename T>
MetaVP<T>::MetaVP(const ModelConfig& config)
    : cfg_(config), droppath_rng_(cfg_.init_seed, kDropPathStream) {
    cfg_.validate();
    MINISTL_CHECK(cfg_.kind == ModelKind::metavp, ConfigError,
                  "MetaVP built from a " << to_string(cfg_.kind) << " config");
    Rng rng(cfg_.init_seed, kInitStream);

    // Encoder: N_S conv layers, strides 1,2,1,2,...; the stride-1 stem output
    // is kept for the decoder skip.
    int in_ch = cfg_.frame.channels;
    for (int i = 0; i < cfg_.N_S; ++i) {
        const int stride = (i % 2 == 0) ? 1 : 2;
        enc_strides_.push_back(stride);
        enc_.emplace_back(in_ch, cfg_.hid_S, stride, rng);
        in_ch = cfg_.hid_S;
    }

    const int hl = cfg_.frame.height / cfg_.downsample();
    const int wl = cfg_.frame.width / cfg_.downsample();
    const int tokens = hl * wl;

    proj_in_ = nn::Conv2d<T>(cfg_.T * cfg_.hid_S, cfg_.hid_T, 1, nn::Conv2dSpec{},
                             nn::Init::trunc_normal02, rng);
    for (int i = 0; i < cfg_.N_T; ++i) {
        blocks_.emplace_back(cfg_.hid_T, make_mixer<T>(*cfg_.mixer, cfg_.hid_T, cfg_.heads,
                                                       tokens, rng),
                             cfg_.expansion, cfg_.drop_path, rng);
    }
    proj_out_ = nn::Conv2d<T>(cfg_.hid_T, cfg_.T * cfg_.hid_S, 1, nn::Conv2dSpec{},
                              nn::Init::trunc_normal02, rng);

    // Decoder mirrors the encoder: upsample where the mirrored stage strided.
    for (int i = cfg_.N_S - 1; i >= 0; --i) {
        DecStage stage;
        stage.up = enc_strides_[i] == 2;
        if (stage.up) {
            stage.upsample = nn::UpConvBlock<T>(cfg_.hid_S, cfg_.hid_S, rng);
        } else {
            stage.plain = nn::ConvBlock<T>(cfg_.hid_S, cfg_.hid_S, 1, rng);
        }
        dec_.push_back(std::move(stage));
    }
    readout_ = nn::Conv2d<T>(cfg_.hid_S, cfg_.frame.channels, 1, nn::Conv2dSpec{},
                             nn::Init::trunc_normal02, rng);
    if (cfg_.T_prime != cfg_.T) {
        time_proj_ = nn::Conv2d<T>(cfg_.T * cfg_.frame.channels,
                                   cfg_.T_prime * cfg_.frame.channels, 1, nn::Conv2dSpec{},
                                   nn::Init::trunc_normal02, rng);
    }
}

template <typename T>
typename MetaVP<T>::Latent MetaVP<T>::encode(const nn::Var<T>& context) const {
    const auto& s = context.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "encode expects (B,T,C,H,W)");
    const std::int64_t B = s[0], t = s[1];
    auto x = nn::reshape(context, {B * t, s[2], s[3], s[4]});

    nn::Var<T> skip;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        x = enc_[i](x);
        if (i == 0) skip = x;
    }
    const auto& ls = x.shape();
    return {nn::reshape(x, {B, t, ls[1], ls[2], ls[3]}), skip};
}

template <typename T>
nn::Var<T> MetaVP<T>::translate(const nn::Var<T>& z) const {
    const auto& s = z.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "translate expects (B,T,hid_S,H_l,W_l)");
    const std::int64_t B = s[0], t = s[1], c = s[2], hl = s[3], wl = s[4];

    auto x = nn::reshape(z, {B, t * c, hl, wl});
    x = proj_in_(x);
    for (const auto& block : blocks_) {
        x = block.forward(x, training_, droppath_rng_);
    }
    x = proj_out_(x);
    return nn::reshape(x, {B, t, c, hl, wl});
}

template <typename T>
nn::Var<T> MetaVP<T>::decode(const nn::Var<T>& z, const nn::Var<T>& skip) const {
    const auto& s = z.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "decode expects (B,T,hid_S,H_l,W_l)");
    const std::int64_t B = s[0], t = s[1];

    auto x = nn::reshape(z, {B * t, s[2], s[3], s[4]});
    for (const auto& stage : dec_) {
        x = stage.up ? stage.upsample(x) : stage.plain(x);
    }
    x = nn::add(x, skip);
    x = readout_(x);

    const std::int64_t C = cfg_.frame.channels;
    const std::int64_t H = cfg_.frame.height, W = cfg_.frame.width;
    if (cfg_.T_prime == cfg_.T) {
        return nn::reshape(x, {B, t, C, H, W});
    }
    auto folded = nn::reshape(x, {B, t * C, H, W});
    auto mapped = time_proj_(folded);
    return nn::reshape(mapped, {B, cfg_.T_prime, C, H, W});
}

template <typename T>
nn::Var<T> MetaVP<T>::forward(const nn::Var<T>& context) {
    const auto& s = context.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "forward expects (B,T,C,H,W)");
    MINISTL_CHECK(s[1] == cfg_.T && s[2] == cfg_.frame.channels && s[3] == cfg_.frame.height &&
                      s[4] == cfg_.frame.width,
                  ShapeError, "context " << nn::shape_str(s) << " does not match config (T="
                                         << cfg_.T << ", C=" << cfg_.frame.channels << ", H="
                                         << cfg_.frame.height << ", W=" << cfg_.frame.width
                                         << ")");
    auto latent = encode(context);
    auto mixed = translate(latent.z);
    return decode(mixed, latent.skip);
}

template <typename T>
nn::ParamMap<T> MetaVP<T>::parameters() {
    nn::ParamMap<T> out;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        enc_[i].collect("enc." + std::to_string(i), out);
    }
    proj_in_.collect("translator.proj_in", out);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        blocks_[i].collect("translator.block." + std::to_string(i), out);
    }
    proj_out_.collect("translator.proj_out", out);
    for (std::size_t i = 0; i < dec_.size(); ++i) {
        const std::string prefix = "dec." + std::to_string(i);
        if (dec_[i].up) {
            dec_[i].upsample.collect(prefix, out);
        } else {
            dec_[i].plain.collect(prefix, out);
        }
    }
    readout_.collect("readout", out);
    if (time_proj_.weight.defined()) time_proj_.collect("time_proj", out);
    return out;
}

template <typename T>
std::vector<LayerCost> MetaVP<T>::cost_plan() const {
    std::vector<LayerCost> plan;
    const std::int64_t t = cfg_.T;
    const std::int64_t C = cfg_.frame.channels;
    const std::int64_t hid = cfg_.hid_S;
    const std::int64_t dim = cfg_.hid_T;

    std::int64_t h = cfg_.frame.height, w = cfg_.frame.width;
    std::int64_t in_ch = C;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        if (enc_strides_[i] == 2) {
            h /= 2;
            w /= 2;
        }
        plan.push_back(LayerCost::conv("enc.conv", 3, 3, in_ch, hid, h, w, 1, t));
        plan.push_back(LayerCost::norm("enc.norm", hid * h * w, t));
        plan.push_back(LayerCost::elementwise("enc.act", hid * h * w, t));
        in_ch = hid;
    }

    const std::int64_t hl = h, wl = w;
    const std::int64_t tokens = hl * wl;
    plan.push_back(LayerCost::conv("translator.proj_in", 1, 1, t * hid, dim, hl, wl));
    for (int i = 0; i < cfg_.N_T; ++i) {
        plan.push_back(LayerCost::norm("block.norm1", dim * tokens));
        switch (*cfg_.mixer) {
            case MixerKind::attention:
                plan.push_back(LayerCost::dense("mixer.qkv", dim, 3 * dim, tokens));
                plan.push_back(
                    LayerCost::attention("mixer.attention", dim, tokens, cfg_.heads));
                plan.push_back(LayerCost::dense("mixer.proj", dim, dim, tokens));
                break;
            case MixerKind::mlp_mixer: {
                const std::int64_t hidden = std::max<std::int64_t>(1, tokens / 2);
                plan.push_back(LayerCost::dense("mixer.fc1", tokens, hidden, dim));
                plan.push_back(LayerCost::elementwise("mixer.act", hidden * dim));
                plan.push_back(LayerCost::dense("mixer.fc2", hidden, tokens, dim));
                break;
            }
            case MixerKind::conv_next:
                plan.push_back(LayerCost::conv("mixer.dw", 7, 7, dim, dim, hl, wl, dim));
                break;
            case MixerKind::gated_attention:
                plan.push_back(LayerCost::conv("mixer.dw", 5, 5, dim, dim, hl, wl, dim));
                plan.push_back(LayerCost::conv("mixer.dw_dilated", 5, 5, dim, dim, hl, wl, dim));
                plan.push_back(LayerCost::conv("mixer.pw", 1, 1, dim, dim, hl, wl));
                plan.push_back(LayerCost::dense("mixer.gate", dim, dim));
                plan.push_back(LayerCost::elementwise("mixer.apply", 2 * dim * tokens));
                break;
        }
        plan.push_back(LayerCost::elementwise("block.residual1", dim * tokens));
        plan.push_back(LayerCost::norm("block.norm2", dim * tokens));
        const std::int64_t hidden = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::lround(dim * cfg_.expansion)));
        plan.push_back(LayerCost::conv("block.mlp_in", 1, 1, dim, hidden, hl, wl));
        plan.push_back(LayerCost::elementwise("block.mlp_act", hidden * tokens));
        plan.push_back(LayerCost::conv("block.mlp_out", 1, 1, hidden, dim, hl, wl));
        plan.push_back(LayerCost::elementwise("block.residual2", dim * tokens));
    }
    plan.push_back(LayerCost::conv("translator.proj_out", 1, 1, dim, t * hid, hl, wl));

    for (const auto& stage : dec_) {
        if (stage.up) {
            plan.push_back(LayerCost::conv("dec.up_conv", 3, 3, hid, hid * 4, h, w, 1, t));
            h *= 2;
            w *= 2;
        } else {
            plan.push_back(LayerCost::conv("dec.conv", 3, 3, hid, hid, h, w, 1, t));
        }
        plan.push_back(LayerCost::norm("dec.norm", hid * h * w, t));
        plan.push_back(LayerCost::elementwise("dec.act", hid * h * w, t));
    }
    plan.push_back(LayerCost::elementwise("dec.skip_add", hid * h * w, t));
    plan.push_back(LayerCost::conv("readout", 1, 1, hid, C, h, w, 1, t));
    if (cfg_.T_prime != cfg_.T) {
        plan.push_back(LayerCost::conv("time_proj", 1, 1, t * C, cfg_.T_prime * C, h, w));
    }
    return plan;
}

template class MetaVP<float>;
template class MetaVP<double>;

}  // namespace ministl::models

#pragma once

#include <memory>
#include <vector>

#include "ministl/models/model.hpp"

namespace ministl::models {

/// Recurrent-free video predictor: a per-frame conv encoder, a MetaFormer
/// translator mixing across the folded T x hid_S channel axis, and a conv
/// decoder with sub-pixel upsampling and a stem skip connection. The whole
/// horizon is produced in a single parallel pass.
template <typename T>
class MetaVP : public Model<T> {
public:
    explicit MetaVP(const ModelConfig& config);

    struct Latent {
        nn::Var<T> z;     // (B, T, hid_S, H_l, W_l)
        nn::Var<T> skip;  // (B*T, hid_S, H, W), stem output
    };

    Latent encode(const nn::Var<T>& context) const;
    nn::Var<T> translate(const nn::Var<T>& z) const;
    nn::Var<T> decode(const nn::Var<T>& z, const nn::Var<T>& skip) const;

    nn::Var<T> forward(const nn::Var<T>& context) override;
    nn::ParamMap<T> parameters() override;
    void set_training(bool training) override { training_ = training; }
    bool training() const override { return training_; }
    const ModelConfig& config() const override { return cfg_; }
    std::vector<LayerCost> cost_plan() const override;

private:
    struct DecStage {
        bool up = false;
        nn::ConvBlock<T> plain;
        nn::UpConvBlock<T> upsample;
    };

    ModelConfig cfg_;
    bool training_ = true;
    mutable Rng droppath_rng_;

    std::vector<int> enc_strides_;
    std::vector<nn::ConvBlock<T>> enc_;
    nn::Conv2d<T> proj_in_;
    std::vector<nn::MetaFormerBlock<T>> blocks_;
    nn::Conv2d<T> proj_out_;
    std::vector<DecStage> dec_;
    nn::Conv2d<T> readout_;
    nn::Conv2d<T> time_proj_;  // only constructed when T' != T
};

std::unique_ptr<nn::Mixer<float>> make_mixer_f32(MixerKind kind, int dim, int heads, int tokens,
                                                 Rng& rng);

}  // namespace ministl::models

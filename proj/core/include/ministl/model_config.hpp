#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ministl/frame.hpp"

namespace ministl {

enum class ModelKind { convlstm, st_lstm, metavp };
enum class MixerKind { attention, mlp_mixer, conv_next, gated_attention };
enum class ModelCategory { recurrent_based, recurrent_free };

const char* to_string(ModelKind k);
const char* to_string(MixerKind m);
const char* to_string(ModelCategory c);
ModelKind model_kind_from_string(const std::string& s);
MixerKind mixer_kind_from_string(const std::string& s);

/// Architecture hyper-parameters. hid_S/hid_T/N_S/N_T follow the conventions
/// of the recurrent-free family; the rnn_* fields configure the recurrent
/// baselines and are ignored by metavp (and vice versa).
struct ModelConfig {
    ModelKind kind = ModelKind::metavp;
    std::optional<MixerKind> mixer;  // metavp only

    int hid_S = 64;    // spatial hidden width
    int hid_T = 512;   // temporal (translator) width
    int N_S = 4;       // conv layers in each of encoder/decoder
    int N_T = 8;       // translator block count
    int T = 10;        // context length
    int T_prime = 10;  // horizon
    FrameSpec frame;

    double expansion = 4.0;  // channel-MLP ratio in translator blocks
    double drop_path = 0.0;
    int heads = 8;

    int rnn_layers = 4;
    int rnn_hidden = 128;
    int rnn_kernel = 3;

    std::uint64_t init_seed = 0;

    /// Spatial reduction of the encoder: 2^(N_S/2).
    int downsample() const { return 1 << (N_S / 2); }

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

/// Default hyper-parameters per benchmark dataset family: "mmnist", "kitti",
/// "kth", "human", "taxibj", "weather_s", "weather_m".
ModelConfig metavp_preset(const std::string& dataset, MixerKind mixer);

/// Recurrent baseline defaults at MMNIST geometry.
ModelConfig recurrent_preset(ModelKind kind, const FrameSpec& frame, int T, int T_prime);

}  // namespace ministl

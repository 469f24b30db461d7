#include "ministl/model_config.hpp"

#include <nlohmann/json.hpp>

namespace ministl {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::convlstm: return "convlstm";
        case ModelKind::st_lstm: return "st_lstm";
        case ModelKind::metavp: return "metavp";
    }
    return "?";
}

const char* to_string(MixerKind m) {
    switch (m) {
        case MixerKind::attention: return "attention";
        case MixerKind::mlp_mixer: return "mlp_mixer";
        case MixerKind::conv_next: return "conv_next";
        case MixerKind::gated_attention: return "gated_attention";
    }
    return "?";
}

const char* to_string(ModelCategory c) {
    return c == ModelCategory::recurrent_based ? "recurrent_based" : "recurrent_free";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "convlstm") return ModelKind::convlstm;
    if (s == "st_lstm") return ModelKind::st_lstm;
    if (s == "metavp") return ModelKind::metavp;
    throw ConfigError("unknown model kind: " + s);
}

MixerKind mixer_kind_from_string(const std::string& s) {
    if (s == "attention") return MixerKind::attention;
    if (s == "mlp_mixer") return MixerKind::mlp_mixer;
    if (s == "conv_next") return MixerKind::conv_next;
    if (s == "gated_attention") return MixerKind::gated_attention;
    throw ConfigError("unknown mixer kind: " + s);
}

void ModelConfig::validate() const {
    frame.validate();
    MINISTL_CHECK(T >= 1, ConfigError, "context length T must be >= 1, got " << T);
    MINISTL_CHECK(hid_S >= 1 && hid_T >= 1, ConfigError, "hidden widths must be >= 1");
    if (kind == ModelKind::metavp) {
        MINISTL_CHECK(mixer.has_value(), ConfigError, "metavp requires a mixer kind");
        MINISTL_CHECK(T_prime >= 1, ConfigError, "metavp horizon T' must be >= 1");
        MINISTL_CHECK(N_S >= 2 && N_S % 2 == 0, ConfigError,
                      "N_S must be a positive even integer, got " << N_S);
        MINISTL_CHECK(N_T >= 0, ConfigError, "N_T must be >= 0, got " << N_T);
        const int ds = downsample();
        MINISTL_CHECK(frame.height % ds == 0 && frame.width % ds == 0, ConfigError,
                      "frame " << frame.height << "x" << frame.width
                               << " not divisible by the encoder reduction " << ds
                               << " (N_S=" << N_S << ")");
        MINISTL_CHECK(expansion > 0.0, ConfigError, "expansion must be positive");
        MINISTL_CHECK(drop_path >= 0.0 && drop_path <= 1.0, ConfigError,
                      "drop_path must lie in [0,1]");
        if (mixer == MixerKind::attention) {
            MINISTL_CHECK(heads >= 1 && hid_T % heads == 0, ConfigError,
                          "hid_T=" << hid_T << " must be divisible by heads=" << heads);
        }
    } else {
        MINISTL_CHECK(!mixer.has_value(), ConfigError,
                      "mixer is a metavp option; remove it for " << to_string(kind));
        MINISTL_CHECK(T_prime >= 0, ConfigError, "horizon T' must be >= 0");
        MINISTL_CHECK(rnn_layers >= 1 && rnn_hidden >= 1, ConfigError,
                      "recurrent stack needs layers >= 1 and hidden >= 1");
        MINISTL_CHECK(rnn_kernel >= 1 && rnn_kernel % 2 == 1, ConfigError,
                      "recurrent kernel must be odd, got " << rnn_kernel);
    }
}

nlohmann::json ModelConfig::to_json() const {
    nlohmann::json j{
        {"kind", to_string(kind)},
        {"hid_S", hid_S},
        {"hid_T", hid_T},
        {"N_S", N_S},
        {"N_T", N_T},
        {"T", T},
        {"T_prime", T_prime},
        {"frame", {{"channels", frame.channels}, {"height", frame.height}, {"width", frame.width}}},
        {"expansion", expansion},
        {"drop_path", drop_path},
        {"heads", heads},
        {"rnn_layers", rnn_layers},
        {"rnn_hidden", rnn_hidden},
        {"rnn_kernel", rnn_kernel},
        {"init_seed", init_seed},
    };
    if (mixer) j["mixer"] = to_string(*mixer);
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.kind = model_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("mixer") && !j["mixer"].is_null()) {
        c.mixer = mixer_kind_from_string(j["mixer"].get<std::string>());
    }
    c.hid_S = j.value("hid_S", c.hid_S);
    c.hid_T = j.value("hid_T", c.hid_T);
    c.N_S = j.value("N_S", c.N_S);
    c.N_T = j.value("N_T", c.N_T);
    c.T = j.value("T", c.T);
    c.T_prime = j.value("T_prime", c.T_prime);
    if (j.contains("frame")) {
        const auto& f = j["frame"];
        c.frame.channels = f.value("channels", 1);
        c.frame.height = f.value("height", 64);
        c.frame.width = f.value("width", 64);
    }
    c.expansion = j.value("expansion", c.expansion);
    c.drop_path = j.value("drop_path", c.drop_path);
    c.heads = j.value("heads", c.heads);
    c.rnn_layers = j.value("rnn_layers", c.rnn_layers);
    c.rnn_hidden = j.value("rnn_hidden", c.rnn_hidden);
    c.rnn_kernel = j.value("rnn_kernel", c.rnn_kernel);
    c.init_seed = j.value("init_seed", c.init_seed);
    return c;
}

ModelConfig metavp_preset(const std::string& dataset, MixerKind mixer) {
    struct Row {
        const char* name;
        int T, T_prime, hid_S, hid_T, N_S, N_T, C, H, W;
        double expansion;
    };
    // MMNIST-family translators use the wide channel MLP; the rest use 4x.
    static const Row rows[] = {
        {"mmnist", 10, 10, 64, 512, 4, 8, 1, 64, 64, 8.0},
        {"kitti", 10, 1, 64, 256, 2, 6, 3, 128, 160, 4.0},
        {"kth", 10, 20, 64, 256, 2, 6, 1, 128, 128, 4.0},
        {"human", 4, 4, 64, 512, 4, 6, 3, 128, 128, 4.0},
        {"taxibj", 4, 4, 32, 256, 2, 8, 2, 32, 32, 4.0},
        {"weather_s", 12, 12, 32, 256, 2, 8, 1, 32, 64, 4.0},
        {"weather_m", 4, 4, 32, 256, 2, 8, 4, 32, 64, 4.0},
    };
    for (const auto& r : rows) {
        if (dataset == r.name) {
            ModelConfig c;
            c.kind = ModelKind::metavp;
            c.mixer = mixer;
            c.T = r.T;
            c.T_prime = r.T_prime;
            c.hid_S = r.hid_S;
            c.hid_T = r.hid_T;
            c.N_S = r.N_S;
            c.N_T = r.N_T;
            c.frame = FrameSpec{r.C, r.H, r.W};
            c.expansion = r.expansion;
            return c;
        }
    }
    throw LookupError("no metavp preset for dataset: " + dataset);
}

ModelConfig recurrent_preset(ModelKind kind, const FrameSpec& frame, int T, int T_prime) {
    MINISTL_CHECK(kind != ModelKind::metavp, ConfigError,
                  "recurrent_preset is for the recurrent baselines");
    ModelConfig c;
    c.kind = kind;
    c.mixer.reset();
    c.frame = frame;
    c.T = T;
    c.T_prime = T_prime;
    return c;
}

}  // namespace ministl

#include "ministl/data/perturb.hpp"

#include <nlohmann/json.hpp>

#include <cstring>

namespace ministl::data {

const char* to_string(PerturbationSpec::Kind k) {
    switch (k) {
        case PerturbationSpec::Kind::missing: return "missing";
        case PerturbationSpec::Kind::dynamic: return "dynamic";
        case PerturbationSpec::Kind::perceptual: return "perceptual";
    }
    return "?";
}

PerturbationSpec::Kind perturbation_kind_from_string(const std::string& s) {
    if (s == "missing") return PerturbationSpec::Kind::missing;
    if (s == "dynamic") return PerturbationSpec::Kind::dynamic;
    if (s == "perceptual") return PerturbationSpec::Kind::perceptual;
    throw ConfigError("unknown perturbation kind: " + s);
}

void PerturbationSpec::validate() const {
    MINISTL_CHECK(p_missing >= 0.0 && p_missing <= 1.0, ConfigError,
                  "p_missing must lie in [0,1], got " << p_missing);
    MINISTL_CHECK(sigma_v >= 0.0, ConfigError, "sigma_v must be >= 0");
    MINISTL_CHECK(patch_size >= 1, ConfigError, "patch_size must be >= 1");
}

nlohmann::json PerturbationSpec::to_json() const {
    return {{"kind", to_string(kind)},
            {"p_missing", p_missing},
            {"sigma_v", sigma_v},
            {"patch_size", patch_size},
            {"seed", {{"master", seed.master_seed}, {"stream", seed.stream_id}}}};
}

PerturbationSpec PerturbationSpec::from_json(const nlohmann::json& j) {
    PerturbationSpec s;
    s.kind = perturbation_kind_from_string(j.at("kind").get<std::string>());
    s.p_missing = j.value("p_missing", s.p_missing);
    s.sigma_v = j.value("sigma_v", s.sigma_v);
    s.patch_size = j.value("patch_size", s.patch_size);
    if (j.contains("seed")) {
        s.seed.master_seed = j["seed"].value("master", 0ull);
        s.seed.stream_id = j["seed"].value("stream", 0ull);
    }
    return s;
}

namespace {

SequencePair perturb_missing(const SequencePair& pair, const PerturbationSpec& spec) {
    Rng rng(spec.seed);
    SequencePair out = pair;
    out.context.data = pair.context.data.clone();
    const std::int64_t T = out.context.time_len();
    const std::int64_t frame_elems = out.context.data.numel() / T;
    float* p = out.context.data.data();
    for (std::int64_t t = 0; t < T; ++t) {
        if (rng.bernoulli(spec.p_missing)) {
            std::memset(p + t * frame_elems, 0, frame_elems * sizeof(float));
        }
    }
    return out;
}

SequencePair perturb_perceptual(const SequencePair& pair, const PerturbationSpec& spec) {
    const auto fs = pair.context.spec;
    MINISTL_CHECK(spec.patch_size <= fs.height && spec.patch_size <= fs.width, ConfigError,
                  "occlusion patch " << spec.patch_size << " exceeds the " << fs.height << "x"
                                     << fs.width << " frame");
    Rng rng(spec.seed);
    SequencePair out = pair;
    out.context.data = pair.context.data.clone();
    const std::int64_t T = out.context.time_len();
    const std::int64_t C = fs.channels, H = fs.height, W = fs.width;
    float* p = out.context.data.data();
    for (std::int64_t t = 0; t < T; ++t) {
        const auto x0 = rng.uniform_int(0, W - spec.patch_size);
        const auto y0 = rng.uniform_int(0, H - spec.patch_size);
        for (std::int64_t c = 0; c < C; ++c) {
            float* plane = p + (t * C + c) * H * W;
            for (int dy = 0; dy < spec.patch_size; ++dy) {
                std::memset(plane + (y0 + dy) * W + x0, 0, spec.patch_size * sizeof(float));
            }
        }
    }
    return out;
}

SequencePair perturb_dynamic(const SequencePair& pair, const PerturbationSpec& spec) {
    MINISTL_CHECK(pair.provenance != nullptr, ProvenanceError,
                  "dynamic perturbation re-renders the sequence and needs trajectory "
                  "provenance, which this pair does not carry");
    const auto& prov = *pair.provenance;
    const auto& fs = prov.frame;
    Rng rng(spec.seed);

    auto noisy = std::make_shared<SequenceProvenance>(prov);
    const int t_len = prov.T + prov.T_prime;
    for (auto& traj : noisy->trajectories) {
        const auto& sprite = prov.bank->sprites.at(traj.sprite_id);
        const double x_max = fs.width - sprite.dim(1);
        const double y_max = fs.height - sprite.dim(0);
        double x = traj.start[0], y = traj.start[1];
        double vx = traj.velocity[0], vy = traj.velocity[1];
        traj.positions.assign(1, {x, y});
        for (int f = 1; f < t_len; ++f) {
            vx += rng.normal(0.0, spec.sigma_v);
            vy += rng.normal(0.0, spec.sigma_v);
            bounce_step(x, y, vx, vy, x_max, y_max);
            traj.positions.push_back({x, y});
        }
    }

    const nn::Tensor<float>* background =
        noisy->background_id >= 0 ? &prov.bank->backgrounds.at(noisy->background_id) : nullptr;
    auto full = render_sequence(prov.bank->sprites, noisy->trajectories, background, fs);
    auto frames = dequantize_u8(quantize_u8(full.data));

    const std::int64_t frame_elems = static_cast<std::int64_t>(fs.channels) * fs.height * fs.width;
    nn::Tensor<float> ctx({1, prov.T, fs.channels, fs.height, fs.width});
    nn::Tensor<float> tgt({1, prov.T_prime, fs.channels, fs.height, fs.width});
    std::copy_n(frames.data(), prov.T * frame_elems, ctx.data());
    std::copy_n(frames.data() + prov.T * frame_elems, prov.T_prime * frame_elems, tgt.data());

    SequencePair out;
    out.context = VideoBatch(std::move(ctx), fs, BatchRole::context);
    out.target = VideoBatch(std::move(tgt), fs, BatchRole::target);
    out.provenance = std::move(noisy);
    return out;
}

}  // namespace

SequencePair perturb(const SequencePair& pair, const PerturbationSpec& spec) {
    spec.validate();
    MINISTL_CHECK(pair.context.batch() == 1, ShapeError,
                  "perturb operates on single-sequence pairs");
    switch (spec.kind) {
        case PerturbationSpec::Kind::missing: return perturb_missing(pair, spec);
        case PerturbationSpec::Kind::perceptual: return perturb_perceptual(pair, spec);
        case PerturbationSpec::Kind::dynamic: return perturb_dynamic(pair, spec);
    }
    throw ConfigError("unknown perturbation kind");
}

namespace {

class PerturbedDataset final : public Dataset {
public:
    PerturbedDataset(DatasetPtr inner, PerturbationSpec spec)
        : inner_(std::move(inner)), spec_(spec) {
        spec_.validate();
    }

    std::int64_t size() const override { return inner_->size(); }
    FrameSpec frame() const override { return inner_->frame(); }
    int context_len() const override { return inner_->context_len(); }
    int horizon() const override { return inner_->horizon(); }
    const std::optional<DatasetSpec>& spec() const override { return inner_->spec(); }

    SequencePair pair(std::int64_t index) const override {
        PerturbationSpec per_index = spec_;
        per_index.seed.stream_id += static_cast<std::uint64_t>(index);
        return perturb(inner_->pair(index), per_index);
    }

private:
    DatasetPtr inner_;
    PerturbationSpec spec_;
};

}  // namespace

DatasetPtr perturbed_view(DatasetPtr inner, const PerturbationSpec& spec) {
    return std::make_shared<PerturbedDataset>(std::move(inner), spec);
}

}  // namespace ministl::data

#include "ministl/data/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

#include "ministl/digest.hpp"

namespace ministl::data {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::mnist: return "mnist";
        case Variant::fashion_mnist: return "fashion_mnist";
        case Variant::mnist_cifar: return "mnist_cifar";
    }
    return "?";
}

const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

Variant variant_from_string(const std::string& s) {
    if (s == "mnist") return Variant::mnist;
    if (s == "fashion_mnist") return Variant::fashion_mnist;
    if (s == "mnist_cifar") return Variant::mnist_cifar;
    throw ConfigError("unknown dataset variant: " + s);
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ConfigError("unknown split: " + s);
}

void DatasetSpec::validate() const {
    frame.validate();
    MINISTL_CHECK(count >= 0, ConfigError, "dataset count must be >= 0");
    MINISTL_CHECK(T >= 1 && T_prime >= 1, ConfigError, "dataset needs T >= 1 and T' >= 1");
    MINISTL_CHECK(num_objects >= 0, ConfigError, "num_objects must be >= 0");
    MINISTL_CHECK(speed_min >= 0.0 && speed_max >= speed_min, ConfigError,
                  "speed range [" << speed_min << ", " << speed_max << "] is invalid");
    if (variant == Variant::mnist_cifar) {
        MINISTL_CHECK(background.kind != BackgroundSourceSpec::Kind::none, ConfigError,
                      "mnist_cifar needs a background source");
        MINISTL_CHECK(frame.channels == 3, ConfigError, "mnist_cifar uses 3-channel frames");
    }
}

std::uint64_t DatasetSpec::stream_offset() const {
    // Train and test draw from disjoint stream ranges of the master seed.
    return split == Split::train ? 0ull : (1ull << 32);
}

nlohmann::json DatasetSpec::to_json() const {
    const char* sprite_kind = sprites.kind == SpriteSourceSpec::Kind::synthetic ? "synthetic"
                                                                                : "idx";
    const char* bg_kind = background.kind == BackgroundSourceSpec::Kind::none ? "none"
                          : background.kind == BackgroundSourceSpec::Kind::synthetic
                              ? "synthetic"
                              : "cifar";
    return {
        {"variant", to_string(variant)},
        {"split", to_string(split)},
        {"count", count},
        {"frame", {{"channels", frame.channels}, {"height", frame.height}, {"width", frame.width}}},
        {"T", T},
        {"T_prime", T_prime},
        {"num_objects", num_objects},
        {"speed_range", {speed_min, speed_max}},
        {"seed", {{"master", seed.master_seed}, {"stream", seed.stream_id}}},
        {"sprites",
         {{"kind", sprite_kind},
          {"path", sprites.path},
          {"synthetic_count", sprites.synthetic_count},
          {"sprite_size", sprites.sprite_size}}},
        {"background",
         {{"kind", bg_kind},
          {"path", background.path},
          {"synthetic_count", background.synthetic_count}}},
    };
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
    DatasetSpec s;
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    s.split = split_from_string(j.at("split").get<std::string>());
    s.count = j.value("count", s.count);
    if (j.contains("frame")) {
        const auto& f = j["frame"];
        s.frame = FrameSpec{f.value("channels", 1), f.value("height", 64), f.value("width", 64)};
    }
    s.T = j.value("T", s.T);
    s.T_prime = j.value("T_prime", s.T_prime);
    s.num_objects = j.value("num_objects", s.num_objects);
    if (j.contains("speed_range")) {
        s.speed_min = j["speed_range"].at(0).get<double>();
        s.speed_max = j["speed_range"].at(1).get<double>();
    }
    if (j.contains("seed")) {
        s.seed.master_seed = j["seed"].value("master", 0ull);
        s.seed.stream_id = j["seed"].value("stream", 0ull);
    }
    if (j.contains("sprites")) {
        const auto& sp = j["sprites"];
        const auto kind = sp.value("kind", std::string("synthetic"));
        s.sprites.kind =
            kind == "idx" ? SpriteSourceSpec::Kind::idx : SpriteSourceSpec::Kind::synthetic;
        s.sprites.path = sp.value("path", std::string{});
        s.sprites.synthetic_count = sp.value("synthetic_count", 64);
        s.sprites.sprite_size = sp.value("sprite_size", 28);
    }
    if (j.contains("background")) {
        const auto& bg = j["background"];
        const auto kind = bg.value("kind", std::string("none"));
        s.background.kind = kind == "cifar"       ? BackgroundSourceSpec::Kind::cifar
                            : kind == "synthetic" ? BackgroundSourceSpec::Kind::synthetic
                                                  : BackgroundSourceSpec::Kind::none;
        s.background.path = bg.value("path", std::string{});
        s.background.synthetic_count = bg.value("synthetic_count", 32);
    }
    return s;
}

DatasetSpec DatasetSpec::defaults(Variant variant, Split split) {
    DatasetSpec s;
    s.variant = variant;
    s.split = split;
    if (variant == Variant::mnist_cifar) {
        s.frame = FrameSpec{3, 64, 64};
        s.background.kind = BackgroundSourceSpec::Kind::synthetic;
    }
    return s;
}

nn::Tensor<unsigned char> quantize_u8(const nn::Tensor<float>& t) {
    nn::Tensor<unsigned char> out(t.shape());
    const float* src = t.data();
    unsigned char* dst = out.data();
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, src[i]));
        dst[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    return out;
}

nn::Tensor<float> dequantize_u8(const nn::Tensor<unsigned char>& t) {
    nn::Tensor<float> out(t.shape());
    const unsigned char* src = t.data();
    float* dst = out.data();
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        dst[i] = src[i] / 255.0f;
    }
    return out;
}

namespace {

class GeneratedDataset final : public Dataset {
public:
    GeneratedDataset(DatasetSpec spec, std::shared_ptr<const SpriteBank> bank)
        : spec_(std::move(spec)), bank_(std::move(bank)) {
        spec_->validate();
        if (spec_->num_objects > 0) {
            MINISTL_CHECK(bank_ && !bank_->sprites.empty(), ConfigError,
                          "generated dataset needs a sprite bank");
            MINISTL_CHECK(bank_->sprite_h() <= spec_->frame.height &&
                              bank_->sprite_w() <= spec_->frame.width,
                          GeometryError, "sprites larger than the canvas");
        }
        if (spec_->background.kind != BackgroundSourceSpec::Kind::none) {
            MINISTL_CHECK(bank_ && !bank_->backgrounds.empty(), ConfigError,
                          "background source configured but the bank has no backgrounds");
        }
    }

    std::int64_t size() const override { return spec_->count; }
    FrameSpec frame() const override { return spec_->frame; }
    int context_len() const override { return spec_->T; }
    int horizon() const override { return spec_->T_prime; }
    const std::optional<DatasetSpec>& spec() const override { return spec_; }

    SequencePair pair(std::int64_t index) const override {
        MINISTL_CHECK(index >= 0 && index < spec_->count, LookupError,
                      "dataset index " << index << " out of range [0, " << spec_->count << ")");
        Rng rng(spec_->seed.master_seed,
                spec_->seed.stream_id + spec_->stream_offset() +
                    static_cast<std::uint64_t>(index));

        auto prov = std::make_shared<SequenceProvenance>();
        prov->bank = bank_;
        prov->frame = spec_->frame;
        prov->T = spec_->T;
        prov->T_prime = spec_->T_prime;

        const int t_len = spec_->T + spec_->T_prime;
        for (int k = 0; k < spec_->num_objects; ++k) {
            const int sprite_id = static_cast<int>(
                rng.uniform_int(0, static_cast<std::int64_t>(bank_->sprites.size()) - 1));
            auto traj = sample_trajectory(rng, t_len, spec_->frame.height, spec_->frame.width,
                                          bank_->sprite_h(), bank_->sprite_w(),
                                          spec_->speed_min, spec_->speed_max);
            traj.sprite_id = sprite_id;
            prov->trajectories.push_back(std::move(traj));
        }
        const nn::Tensor<float>* background = nullptr;
        if (spec_->background.kind != BackgroundSourceSpec::Kind::none) {
            prov->background_id = static_cast<int>(
                rng.uniform_int(0, static_cast<std::int64_t>(bank_->backgrounds.size()) - 1));
            background = &bank_->backgrounds[prov->background_id];
        }

        auto full = render_sequence(bank_->sprites, prov->trajectories, background,
                                    spec_->frame);
        // Round-trip through the 8-bit storage domain so lazy generation,
        // materialized files and content hashes all agree bit for bit.
        auto frames = dequantize_u8(quantize_u8(full.data));

        const auto& fs = spec_->frame;
        const std::int64_t frame_elems =
            static_cast<std::int64_t>(fs.channels) * fs.height * fs.width;
        nn::Tensor<float> ctx({1, spec_->T, fs.channels, fs.height, fs.width});
        nn::Tensor<float> tgt({1, spec_->T_prime, fs.channels, fs.height, fs.width});
        std::copy_n(frames.data(), spec_->T * frame_elems, ctx.data());
        std::copy_n(frames.data() + spec_->T * frame_elems, spec_->T_prime * frame_elems,
                    tgt.data());

        SequencePair out;
        out.context = VideoBatch(std::move(ctx), fs, BatchRole::context);
        out.target = VideoBatch(std::move(tgt), fs, BatchRole::target);
        out.provenance = std::move(prov);
        return out;
    }

private:
    std::optional<DatasetSpec> spec_;
    std::shared_ptr<const SpriteBank> bank_;
};

class ArrayDataset final : public Dataset {
public:
    ArrayDataset(nn::Tensor<unsigned char> context, nn::Tensor<unsigned char> target,
                 FrameSpec frame, std::optional<DatasetSpec> spec)
        : context_(std::move(context)), target_(std::move(target)), frame_(frame),
          spec_(std::move(spec)) {
        MINISTL_CHECK(context_.ndim() == 5 && target_.ndim() == 5, ShapeError,
                      "array dataset expects (N,T,C,H,W) arrays");
        MINISTL_CHECK(context_.dim(0) == target_.dim(0), ShapeError,
                      "context/target sequence counts differ");
    }

    std::int64_t size() const override { return context_.dim(0); }
    FrameSpec frame() const override { return frame_; }
    int context_len() const override { return static_cast<int>(context_.dim(1)); }
    int horizon() const override { return static_cast<int>(target_.dim(1)); }
    const std::optional<DatasetSpec>& spec() const override { return spec_; }

    SequencePair pair(std::int64_t index) const override {
        MINISTL_CHECK(index >= 0 && index < size(), LookupError,
                      "dataset index " << index << " out of range [0, " << size() << ")");
        SequencePair out;
        out.context = VideoBatch(slice_u8(context_, index), frame_, BatchRole::context);
        out.target = VideoBatch(slice_u8(target_, index), frame_, BatchRole::target);
        return out;
    }

private:
    static nn::Tensor<float> slice_u8(const nn::Tensor<unsigned char>& arr,
                                      std::int64_t index) {
        const auto& s = arr.shape();
        const std::int64_t elems = s[1] * s[2] * s[3] * s[4];
        nn::Tensor<float> out({1, s[1], s[2], s[3], s[4]});
        const unsigned char* src = arr.data() + index * elems;
        float* dst = out.data();
        for (std::int64_t i = 0; i < elems; ++i) dst[i] = src[i] / 255.0f;
        return out;
    }

    nn::Tensor<unsigned char> context_;
    nn::Tensor<unsigned char> target_;
    FrameSpec frame_;
    std::optional<DatasetSpec> spec_;
};

}  // namespace

DatasetPtr build_dataset(const DatasetSpec& spec) {
    spec.validate();
    // Per-split bank seeds keep the train/test sprite pools disjoint when
    // the source is synthetic; IDX sources separate by file.
    SeedSpec bank_seed{spec.seed.master_seed,
                       0x53505249ull + (spec.split == Split::test ? 0x10000ull : 0ull)};
    auto bank = spec.num_objects > 0 ||
                        spec.background.kind != BackgroundSourceSpec::Kind::none
                    ? load_sprite_bank(spec.sprites, spec.background, spec.frame, bank_seed)
                    : std::make_shared<const SpriteBank>(SpriteBank{
                          synthetic_glyphs(1, 8, bank_seed), {}});
    return build_dataset(spec, std::move(bank));
}

DatasetPtr build_dataset(const DatasetSpec& spec, std::shared_ptr<const SpriteBank> bank) {
    return std::make_shared<GeneratedDataset>(spec, std::move(bank));
}

DatasetPtr make_array_dataset(nn::Tensor<unsigned char> context,
                              nn::Tensor<unsigned char> target, FrameSpec frame,
                              std::optional<DatasetSpec> spec) {
    return std::make_shared<ArrayDataset>(std::move(context), std::move(target), frame,
                                          std::move(spec));
}

std::string dataset_content_hash(const Dataset& dataset) {
    Sha256 h;
    const auto add_dims = [&h](const nn::Shape& s) {
        for (auto d : s) {
            const std::int64_t v = d;
            h.update(&v, sizeof(v));
        }
    };
    for (std::int64_t i = 0; i < dataset.size(); ++i) {
        const auto p = dataset.pair(i);
        const auto ctx = quantize_u8(p.context.data);
        const auto tgt = quantize_u8(p.target.data);
        if (i == 0) {
            add_dims(ctx.shape());
            add_dims(tgt.shape());
        }
        h.update(ctx.data(), static_cast<std::size_t>(ctx.numel()));
        h.update(tgt.data(), static_cast<std::size_t>(tgt.numel()));
    }
    return h.hex();
}

SequencePair collate(const Dataset& dataset, const std::vector<std::int64_t>& indices) {
    MINISTL_CHECK(!indices.empty(), ConfigError, "collate needs at least one index");
    const auto fs = dataset.frame();
    const std::int64_t B = static_cast<std::int64_t>(indices.size());
    const std::int64_t T = dataset.context_len(), Tp = dataset.horizon();
    nn::Tensor<float> ctx({B, T, fs.channels, fs.height, fs.width});
    nn::Tensor<float> tgt({B, Tp, fs.channels, fs.height, fs.width});
    const std::int64_t ctx_elems = ctx.numel() / B;
    const std::int64_t tgt_elems = tgt.numel() / B;
    for (std::int64_t b = 0; b < B; ++b) {
        const auto p = dataset.pair(indices[b]);
        std::copy_n(p.context.data.data(), ctx_elems, ctx.data() + b * ctx_elems);
        std::copy_n(p.target.data.data(), tgt_elems, tgt.data() + b * tgt_elems);
    }
    SequencePair out;
    out.context = VideoBatch(std::move(ctx), fs, BatchRole::context);
    out.target = VideoBatch(std::move(tgt), fs, BatchRole::target);
    return out;
}

}  // namespace ministl::data

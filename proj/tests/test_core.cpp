#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>

#include "helpers.hpp"
#include "ministl/data/container.hpp"
#include "ministl/metrics/efficiency.hpp"
#include "ministl/models/baselines.hpp"
#include "ministl/registry.hpp"

using namespace ministl;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() /
               (std::string("ministl_core_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("FrameSpec rejects non-positive dimensions") {
    const FrameSpec bad_c{0, 64, 64};
    const FrameSpec bad_h{1, 0, 64};
    const FrameSpec good{3, 32, 32};
    CHECK_THROWS_AS(bad_c.validate(), ConfigError);
    CHECK_THROWS_AS(bad_h.validate(), ConfigError);
    CHECK_NOTHROW(good.validate());
}

TEST_CASE("VideoBatch shape and range contracts") {
    FrameSpec fs{1, 8, 8};
    auto batch = VideoBatch::zeros(2, 3, fs, BatchRole::context);
    CHECK_NOTHROW(batch.validate());

    batch.data[5] = 1.5f;
    CHECK_THROWS_AS(batch.validate(), NumericsError);

    // Predictions may leave [0,1] but must stay finite.
    auto pred = VideoBatch::zeros(1, 2, fs, BatchRole::prediction);
    pred.data[0] = -3.0f;
    CHECK_NOTHROW(pred.validate());
    pred.data[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(pred.validate(), NumericsError);

    CHECK_THROWS_AS(VideoBatch(nn::Tensor<float>::zeros({2, 3, 2, 8, 8}), fs,
                               BatchRole::context),
                    ShapeError);
}

TEST_CASE("SequencePair invariants") {
    FrameSpec fs{1, 8, 8};
    SequencePair pair;
    pair.context = VideoBatch::zeros(1, 4, fs, BatchRole::context);
    pair.target = VideoBatch::zeros(1, 2, fs, BatchRole::target);
    CHECK_NOTHROW(pair.validate());

    pair.target = VideoBatch::zeros(1, 2, FrameSpec{1, 8, 9}, BatchRole::target);
    CHECK_THROWS_AS(pair.validate(), ShapeError);
}

TEST_CASE("registry: builtin lookups and categories") {
    CHECK(registry_entry("convlstm").category == ModelCategory::recurrent_based);
    CHECK(registry_entry("st_lstm").category == ModelCategory::recurrent_based);
    CHECK(registry_entry("metavp-attention").category == ModelCategory::recurrent_free);
    CHECK(registry_entry("metavp-gated_attention").category == ModelCategory::recurrent_free);
    CHECK(registry_entry("copy_last").category == ModelCategory::recurrent_free);

    const auto names = registered_model_names();
    CHECK(names.size() >= 7);
}

TEST_CASE("registry: duplicate registration fails") {
    RegistryEntry entry{"test-dup-model", ModelCategory::recurrent_free,
                        [](const ModelConfig& c) {
                            return std::make_unique<models::CopyLastModel<float>>(c);
                        }};
    register_model(entry);
    CHECK_THROWS_AS(register_model(entry), RegistrationError);
}

TEST_CASE("registry: unknown name fails") {
    CHECK_THROWS_AS(build_model("no-such-model", ModelConfig{}), LookupError);
}

TEST_CASE("build_model enforces config compatibility") {
    // A recurrent model with a mixer set is a config error.
    ModelConfig bad = recurrent_preset(ModelKind::convlstm, FrameSpec{1, 16, 16}, 4, 4);
    bad.mixer = MixerKind::attention;
    CHECK_THROWS_AS(build_model("convlstm", bad), ConfigError);

    // A metavp entry with a conflicting mixer is a config error.
    ModelConfig conflicting = metavp_preset("mmnist", MixerKind::attention);
    CHECK_THROWS_AS(build_model("metavp-mlp_mixer", conflicting), ConfigError);
}

TEST_CASE("mmnist preset carries the benchmark defaults") {
    const auto cfg = metavp_preset("mmnist", MixerKind::attention);
    CHECK(cfg.hid_S == 64);
    CHECK(cfg.hid_T == 512);
    CHECK(cfg.N_S == 4);
    CHECK(cfg.N_T == 8);
    CHECK(cfg.T == 10);
    CHECK(cfg.T_prime == 10);
    CHECK(cfg.frame == FrameSpec{1, 64, 64});

    auto model = build_model("metavp-attention", cfg);
    CHECK(model->config().hid_S == 64);
    CHECK(model->config().hid_T == 512);
}

TEST_CASE("model config validation rules") {
    ModelConfig cfg = metavp_preset("mmnist", MixerKind::attention);
    cfg.N_S = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = metavp_preset("mmnist", MixerKind::attention);
    cfg.frame.height = 62;  // not divisible by 2^(N_S/2)
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = metavp_preset("mmnist", MixerKind::attention);
    cfg.heads = 7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = metavp_preset("mmnist", MixerKind::gated_attention);
    cfg.mixer.reset();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("model config json round trip") {
    auto cfg = metavp_preset("taxibj", MixerKind::conv_next);
    cfg.drop_path = 0.1;
    cfg.init_seed = 99;
    const auto j = cfg.to_json();
    const auto back = ModelConfig::from_json(j);
    CHECK(back.to_json() == j);
}

TEST_CASE("video batch container round trip is bit identical") {
    const auto dir = temp_dir("vb");
    FrameSpec fs{3, 5, 7};
    auto batch = VideoBatch::zeros(2, 4, fs, BatchRole::prediction);
    Rng r(17, 3);
    for (std::int64_t i = 0; i < batch.data.numel(); ++i) {
        batch.data[i] = static_cast<float>(r.uniform(-2.0, 2.0));
    }
    const auto path = dir / "batch.npz";
    data::save_video_batch(path, batch);
    const auto back = data::load_video_batch(path, BatchRole::prediction);
    REQUIRE(back.data.shape() == batch.data.shape());
    for (std::int64_t i = 0; i < batch.data.numel(); ++i) {
        CHECK(back.data[i] == batch.data[i]);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("copy_last repeats the final context frame") {
    ModelConfig cfg;
    cfg.kind = ModelKind::metavp;  // kind is irrelevant for copy_last
    cfg.mixer = MixerKind::attention;
    cfg.frame = FrameSpec{1, 4, 4};
    cfg.T = 3;
    cfg.T_prime = 2;
    auto model = build_model("copy_last", cfg);

    auto ctx = VideoBatch::zeros(1, 3, cfg.frame, BatchRole::context);
    for (std::int64_t i = 0; i < 16; ++i) ctx.data.at(0, 2, 0, i / 4, i % 4) = 0.25f;
    auto pred = model->predict(ctx);
    CHECK(pred.time_len() == 2);
    for (std::int64_t t = 0; t < 2; ++t) {
        for (std::int64_t i = 0; i < 16; ++i) {
            CHECK(pred.data.at(0, t, 0, i / 4, i % 4) == 0.25f);
        }
    }
    CHECK(metrics::count_params(*model) == 0);
    CHECK(metrics::model_flops(*model) == 0);
}

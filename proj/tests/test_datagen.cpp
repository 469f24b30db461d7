#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>

#include "helpers.hpp"
#include "ministl/data/container.hpp"
#include "ministl/data/idx_io.hpp"
#include "ministl/data/perturb.hpp"

using namespace ministl;
using namespace ministl::data;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() /
               (std::string("ministl_datagen_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

DatasetSpec small_spec(std::int64_t count = 4, SpriteSourceSpec::Kind kind =
                                                   SpriteSourceSpec::Kind::synthetic) {
    DatasetSpec s = DatasetSpec::defaults(Variant::mnist, Split::test);
    s.count = count;
    s.frame = FrameSpec{1, 32, 32};
    s.T = 3;
    s.T_prime = 2;
    s.seed = {42, 0};
    s.sprites.kind = kind;
    s.sprites.synthetic_count = 12;
    s.sprites.sprite_size = 10;
    return s;
}

}  // namespace

// --------------------------------------------------------------------------
// trajectories
// --------------------------------------------------------------------------

TEST_CASE("zero speed keeps the trajectory at the start position") {
    Rng rng(1, 0);
    const auto t = sample_trajectory(rng, 8, 64, 64, 28, 28, 0.0, 0.0);
    REQUIRE(t.positions.size() == 8);
    for (const auto& p : t.positions) {
        CHECK(p[0] == t.start[0]);
        CHECK(p[1] == t.start[1]);
    }
}

TEST_CASE("reflection mirrors overshoot back into range") {
    // start x = 30, vx = +5, x_max = 36: 30, 35, 36-(40-36)=32, ...
    double x = 30, y = 0, vx = 5, vy = 0;
    bounce_step(x, y, vx, vy, 36, 36);
    CHECK(x == doctest::Approx(35.0));
    bounce_step(x, y, vx, vy, 36, 36);
    CHECK(x == doctest::Approx(32.0));
    CHECK(vx == doctest::Approx(-5.0));
}

TEST_CASE("sampled trajectories match the stepwise scalar oracle") {
    Rng rng(7, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = sample_trajectory(rng, 20, 64, 64, 28, 28, 2.0, 5.0);
        REQUIRE(t.positions.size() == 20);
        // Independent re-simulation: apply move-then-reflect per frame.
        double x = t.start[0], y = t.start[1];
        double vx = t.velocity[0], vy = t.velocity[1];
        const double x_max = 64 - 28, y_max = 64 - 28;
        CHECK(t.positions[0][0] == x);
        CHECK(t.positions[0][1] == y);
        for (std::size_t f = 1; f < t.positions.size(); ++f) {
            x += vx;
            y += vy;
            while (x < 0 || x > x_max) {
                if (x < 0) {
                    x = -x;
                    vx = -vx;
                } else {
                    x = 2 * x_max - x;
                    vx = -vx;
                }
            }
            while (y < 0 || y > y_max) {
                if (y < 0) {
                    y = -y;
                    vy = -vy;
                } else {
                    y = 2 * y_max - y;
                    vy = -vy;
                }
            }
            CHECK(std::abs(t.positions[f][0] - x) < 1e-9);
            CHECK(std::abs(t.positions[f][1] - y) < 1e-9);
            CHECK(t.positions[f][0] >= 0.0);
            CHECK(t.positions[f][0] <= x_max);
        }
        // Speed magnitude is conserved between contacts (signs only flip).
        CHECK(std::hypot(vx, vy) == doctest::Approx(std::hypot(t.velocity[0], t.velocity[1]))
                                        .epsilon(1e-12));
    }
}

TEST_CASE("sprite larger than the canvas is a geometry error") {
    Rng rng(1, 0);
    CHECK_THROWS_AS(sample_trajectory(rng, 4, 20, 20, 28, 28, 1.0, 2.0), GeometryError);
}

// --------------------------------------------------------------------------
// rendering
// --------------------------------------------------------------------------

TEST_CASE("empty composition renders all-zero frames") {
    const auto batch = render_sequence({}, {}, nullptr, FrameSpec{1, 16, 16});
    CHECK(batch.time_len() == 1);
    for (std::int64_t i = 0; i < batch.data.numel(); ++i) CHECK(batch.data[i] == 0.0f);
}

TEST_CASE("a single-pixel sprite lights exactly one pixel per frame") {
    nn::Tensor<float> dot({1, 1});
    dot[0] = 1.0f;
    TrajectorySpec traj;
    traj.sprite_id = 0;
    traj.positions = {{3.0, 4.0}, {5.2, 9.8}};
    const auto batch = render_sequence({dot}, {traj}, nullptr, FrameSpec{1, 16, 16});
    REQUIRE(batch.time_len() == 2);
    std::int64_t nonzero = 0;
    for (std::int64_t i = 0; i < 16 * 16; ++i) nonzero += batch.data[i] != 0.0f;
    CHECK(nonzero == 1);
    CHECK(batch.data.at(0, 0, 0, 4, 3) == 1.0f);
    CHECK(batch.data.at(0, 1, 0, 10, 5) == 1.0f);  // rounded position
}

TEST_CASE("overlapping sprites combine by per-pixel max") {
    Rng rng(3, 1);
    nn::Tensor<float> a = testutil::random_tensor<float>({6, 6}, rng, 0.0, 1.0);
    nn::Tensor<float> b = testutil::random_tensor<float>({6, 6}, rng, 0.0, 1.0);
    TrajectorySpec ta, tb;
    ta.sprite_id = 0;
    tb.sprite_id = 1;
    ta.positions = {{4.0, 4.0}};
    tb.positions = {{6.0, 5.0}};  // overlaps a on a 4x5 region
    const auto batch = render_sequence({a, b}, {ta, tb}, nullptr, FrameSpec{1, 16, 16});

    // Direct per-pixel oracle over the whole canvas.
    nn::Tensor<float> expect({16, 16});
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            auto& pa = expect.at(4 + y, 4 + x);
            pa = std::max(pa, a.at(y, x));
        }
    }
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            auto& pb = expect.at(5 + y, 6 + x);
            pb = std::max(pb, b.at(y, x));
        }
    }
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            CHECK(batch.data.at(0, 0, 0, y, x) == doctest::Approx(expect.at(y, x)));
        }
    }
}

TEST_CASE("background blending uses sprite intensity as alpha") {
    nn::Tensor<float> dot({1, 1});
    dot[0] = 0.5f;
    nn::Tensor<float> bg = nn::Tensor<float>::full({3, 8, 8}, 0.4f);
    TrajectorySpec traj;
    traj.positions = {{2.0, 2.0}};
    const auto batch = render_sequence({dot}, {traj}, &bg, FrameSpec{3, 8, 8});
    CHECK(batch.data.at(0, 0, 0, 2, 2) == doctest::Approx(0.4f * 0.5f + 0.5f));
    CHECK(batch.data.at(0, 0, 1, 0, 0) == doctest::Approx(0.4f));
}

TEST_CASE("a clipping trajectory is rejected") {
    nn::Tensor<float> sprite({4, 4});
    TrajectorySpec traj;
    traj.positions = {{14.0, 0.0}};
    CHECK_THROWS_AS(render_sequence({sprite}, {traj}, nullptr, FrameSpec{1, 16, 16}),
                    GeometryError);
}

TEST_CASE("mismatched trajectory lengths are a shape error") {
    nn::Tensor<float> sprite({2, 2});
    TrajectorySpec a, b;
    a.positions = {{0, 0}, {1, 1}};
    b.positions = {{0, 0}};
    b.sprite_id = 0;
    CHECK_THROWS_AS(render_sequence({sprite}, {a, b}, nullptr, FrameSpec{1, 8, 8}),
                    ShapeError);
}

// --------------------------------------------------------------------------
// datasets
// --------------------------------------------------------------------------

TEST_CASE("generated dataset has the spec shapes and bounded pixels") {
    const auto spec = small_spec(3);
    auto ds = build_dataset(spec);
    REQUIRE(ds->size() == 3);
    for (std::int64_t i = 0; i < ds->size(); ++i) {
        const auto p = ds->pair(i);
        CHECK_NOTHROW(p.validate());
        CHECK(p.context.data.shape() == nn::Shape{1, 3, 1, 32, 32});
        CHECK(p.target.data.shape() == nn::Shape{1, 2, 1, 32, 32});
        CHECK(p.provenance != nullptr);
        CHECK(p.provenance->trajectories.size() == 2);
    }
}

TEST_CASE("dataset content is a pure function of the spec") {
    const auto spec = small_spec(4);
    auto a = build_dataset(spec);
    auto b = build_dataset(spec);
    CHECK(dataset_content_hash(*a) == dataset_content_hash(*b));
    for (std::int64_t i = 0; i < a->size(); ++i) {
        CHECK(testutil::max_abs_diff(a->pair(i).context.data, b->pair(i).context.data) == 0.0);
        CHECK(testutil::max_abs_diff(a->pair(i).target.data, b->pair(i).target.data) == 0.0);
    }
}

TEST_CASE("train and test splits differ") {
    auto spec_a = small_spec(3);
    auto spec_b = spec_a;
    spec_b.split = Split::train;
    auto a = build_dataset(spec_a);
    auto b = build_dataset(spec_b);
    CHECK(dataset_content_hash(*a) != dataset_content_hash(*b));
}

TEST_CASE("empty dataset yields nothing") {
    auto spec = small_spec(0);
    auto ds = build_dataset(spec);
    CHECK(ds->size() == 0);
    CHECK_THROWS_AS(ds->pair(0), LookupError);
}

TEST_CASE("missing IDX sprite file raises IoError naming the path") {
    auto spec = small_spec(2, SpriteSourceSpec::Kind::idx);
    spec.sprites.path = "/nonexistent/sprites-idx3-ubyte";
    try {
        build_dataset(spec);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/sprites-idx3-ubyte") !=
              std::string::npos);
    }
}

TEST_CASE("IDX round trip preserves images") {
    const auto dir = temp_dir("idx");
    const auto glyphs = synthetic_glyphs(6, 12, {5, 0});
    const auto path = dir / "sprites-idx3-ubyte";
    save_idx_images(path, glyphs);
    const auto back = load_idx_images(path);
    REQUIRE(back.size() == glyphs.size());
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
        // One u8 quantization step of tolerance.
        CHECK(testutil::max_abs_diff(back[i], glyphs[i]) < 0.5 / 255.0 + 1e-6);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("mnist_cifar variant composites over a background") {
    DatasetSpec spec = DatasetSpec::defaults(Variant::mnist_cifar, Split::test);
    spec.count = 1;
    spec.frame = FrameSpec{3, 32, 32};
    spec.T = 2;
    spec.T_prime = 1;
    spec.sprites.synthetic_count = 4;
    spec.sprites.sprite_size = 10;
    spec.background.synthetic_count = 3;
    auto ds = build_dataset(spec);
    const auto p = ds->pair(0);
    CHECK(p.context.data.shape() == nn::Shape{1, 2, 3, 32, 32});
    // Backgrounds keep most pixels away from zero.
    std::int64_t nonzero = 0;
    for (std::int64_t i = 0; i < p.context.data.numel(); ++i) {
        nonzero += p.context.data[i] > 0.05f;
    }
    CHECK(nonzero > p.context.data.numel() / 2);
}

TEST_CASE("container round trip preserves content and sidecar hash") {
    const auto dir = temp_dir("npz");
    const auto spec = small_spec(3);
    auto ds = build_dataset(spec);
    const auto path = dir / "test.npz";
    save_dataset(*ds, path);
    REQUIRE(std::filesystem::exists(path));
    REQUIRE(std::filesystem::exists(path.string() + ".json"));

    auto loaded = load_dataset(path);
    REQUIRE(loaded->size() == ds->size());
    CHECK(loaded->context_len() == ds->context_len());
    CHECK(loaded->horizon() == ds->horizon());
    CHECK(dataset_content_hash(*loaded) == dataset_content_hash(*ds));
    REQUIRE(loaded->spec().has_value());
    CHECK(loaded->spec()->count == 3);
    std::filesystem::remove_all(dir);
}

// --------------------------------------------------------------------------
// perturbations
// --------------------------------------------------------------------------

TEST_CASE("missing with p=0 is the identity") {
    auto ds = build_dataset(small_spec(1));
    const auto pair = ds->pair(0);
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::missing;
    spec.p_missing = 0.0;
    const auto out = perturb(pair, spec);
    CHECK(testutil::max_abs_diff(out.context.data, pair.context.data) == 0.0);
    CHECK(testutil::max_abs_diff(out.target.data, pair.target.data) == 0.0);
}

TEST_CASE("missing with p=1 zeroes every context frame and keeps targets") {
    auto ds = build_dataset(small_spec(1));
    const auto pair = ds->pair(0);
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::missing;
    spec.p_missing = 1.0;
    const auto out = perturb(pair, spec);
    for (std::int64_t i = 0; i < out.context.data.numel(); ++i) {
        CHECK(out.context.data[i] == 0.0f);
    }
    CHECK(testutil::max_abs_diff(out.target.data, pair.target.data) == 0.0);
}

TEST_CASE("missing mask equals the seeded Bernoulli oracle") {
    auto ds = build_dataset(small_spec(1));
    const auto pair = ds->pair(0);
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::missing;
    spec.p_missing = 0.35;
    spec.seed = {2024, 5};
    const auto out = perturb(pair, spec);

    Rng oracle(2024, 5);
    const std::int64_t T = pair.context.time_len();
    const std::int64_t frame = pair.context.data.numel() / T;
    for (std::int64_t t = 0; t < T; ++t) {
        const bool dropped = oracle.bernoulli(0.35);
        bool all_zero = true;
        bool identical = true;
        for (std::int64_t i = 0; i < frame; ++i) {
            all_zero = all_zero && out.context.data[t * frame + i] == 0.0f;
            identical =
                identical && out.context.data[t * frame + i] == pair.context.data[t * frame + i];
        }
        if (dropped) {
            CHECK(all_zero);
        } else {
            CHECK(identical);
        }
    }
}

TEST_CASE("perceptual occlusion blacks one patch per context frame") {
    auto spec = small_spec(1);
    spec.frame = FrameSpec{1, 40, 40};
    auto ds = build_dataset(spec);
    const auto pair = ds->pair(0);
    PerturbationSpec pspec;
    pspec.kind = PerturbationSpec::Kind::perceptual;
    pspec.patch_size = 12;
    pspec.seed = {9, 0};
    const auto out = perturb(pair, pspec);

    Rng oracle(9, 0);
    const std::int64_t T = pair.context.time_len();
    for (std::int64_t t = 0; t < T; ++t) {
        const auto x0 = oracle.uniform_int(0, 40 - 12);
        const auto y0 = oracle.uniform_int(0, 40 - 12);
        for (std::int64_t y = 0; y < 40; ++y) {
            for (std::int64_t x = 0; x < 40; ++x) {
                const bool inside = x >= x0 && x < x0 + 12 && y >= y0 && y < y0 + 12;
                const float got = out.context.data.at(0, t, 0, y, x);
                const float orig = pair.context.data.at(0, t, 0, y, x);
                if (inside) {
                    CHECK(got == 0.0f);
                } else {
                    CHECK(got == orig);
                }
            }
        }
    }
    CHECK(testutil::max_abs_diff(out.target.data, pair.target.data) == 0.0);
}

TEST_CASE("dynamic without provenance is a provenance error") {
    auto ds = build_dataset(small_spec(2));
    auto pair = ds->pair(0);
    pair.provenance.reset();
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::dynamic;
    CHECK_THROWS_AS(perturb(pair, spec), ProvenanceError);
}

TEST_CASE("dynamic re-renders both context and target") {
    auto ds = build_dataset(small_spec(2));
    const auto pair = ds->pair(0);
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::dynamic;
    spec.sigma_v = 1.5;
    spec.seed = {31, 0};
    const auto out = perturb(pair, spec);
    CHECK(out.context.data.shape() == pair.context.data.shape());
    CHECK(out.target.data.shape() == pair.target.data.shape());
    // With sigma this large the rendered dynamics almost surely change, in
    // the target too (the whole rollout reflects the noisy motion).
    CHECK(testutil::max_abs_diff(out.target.data, pair.target.data) > 0.0);
    // First frame starts at the same position.
    REQUIRE(out.provenance != nullptr);
    CHECK(out.provenance->trajectories[0].positions[0][0] ==
          pair.provenance->trajectories[0].positions[0][0]);
    // Determinism: same spec, same result.
    const auto again = perturb(pair, spec);
    CHECK(testutil::max_abs_diff(again.context.data, out.context.data) == 0.0);
}

TEST_CASE("sigma 0 dynamic reproduces the original dynamics") {
    auto ds = build_dataset(small_spec(2));
    const auto pair = ds->pair(1);
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::dynamic;
    spec.sigma_v = 0.0;
    const auto out = perturb(pair, spec);
    CHECK(testutil::max_abs_diff(out.context.data, pair.context.data) == 0.0);
    CHECK(testutil::max_abs_diff(out.target.data, pair.target.data) == 0.0);
}

TEST_CASE("perturbed_view derives per-index streams") {
    auto ds = build_dataset(small_spec(3));
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::missing;
    spec.p_missing = 0.5;
    spec.seed = {77, 0};
    auto view = perturbed_view(ds, spec);
    REQUIRE(view->size() == 3);

    PerturbationSpec direct = spec;
    direct.seed.stream_id = 2;
    const auto expect = perturb(ds->pair(2), direct);
    const auto got = view->pair(2);
    CHECK(testutil::max_abs_diff(got.context.data, expect.context.data) == 0.0);
}

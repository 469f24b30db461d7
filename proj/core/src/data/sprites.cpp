#include "ministl/data/sprites.hpp"

#include <cmath>

#include "ministl/data/idx_io.hpp"

namespace ministl::data {

namespace {

struct Segment {
    double x0, y0, x1, y1;
};

// Seven-segment layout on the unit square.
const Segment kSegments[7] = {
    {0.25, 0.15, 0.75, 0.15},  // A top
    {0.75, 0.15, 0.75, 0.50},  // B upper right
    {0.75, 0.50, 0.75, 0.85},  // C lower right
    {0.25, 0.85, 0.75, 0.85},  // D bottom
    {0.25, 0.50, 0.25, 0.85},  // E lower left
    {0.25, 0.15, 0.25, 0.50},  // F upper left
    {0.25, 0.50, 0.75, 0.50},  // G middle
};

const int kDigitSegments[10] = {
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABDEG
    0b1001111,  // 3: ABCDG
    0b1100110,  // 4: BCFG
    0b1101101,  // 5: ACDFG
    0b1111101,  // 6: ACDEFG
    0b0000111,  // 7: ABC
    0b1111111,  // 8
    0b1101111,  // 9: ABCDFG
};

double point_segment_dist(double px, double py, const Segment& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double cx = s.x0 + t * dx, cy = s.y0 + t * dy;
    return std::hypot(px - cx, py - cy);
}

}  // namespace

std::vector<nn::Tensor<float>> synthetic_glyphs(int count, int size, SeedSpec seed) {
    MINISTL_CHECK(count >= 1 && size >= 8, ConfigError,
                  "synthetic glyph bank needs count >= 1 and size >= 8");
    std::vector<nn::Tensor<float>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(seed.master_seed, seed.stream_id + static_cast<std::uint64_t>(i));
        const int digit = i % 10;
        const double thickness = rng.uniform(0.055, 0.095);
        const double intensity = rng.uniform(0.85, 1.0);
        const double edge = 1.5 / size;

        Segment segs[7];
        for (int s = 0; s < 7; ++s) {
            segs[s] = kSegments[s];
            segs[s].x0 += rng.normal(0.0, 0.012);
            segs[s].y0 += rng.normal(0.0, 0.012);
            segs[s].x1 += rng.normal(0.0, 0.012);
            segs[s].y1 += rng.normal(0.0, 0.012);
        }

        nn::Tensor<float> img({size, size});
        float* p = img.data();
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double px = (x + 0.5) / size;
                const double py = (y + 0.5) / size;
                double v = 0.0;
                for (int s = 0; s < 7; ++s) {
                    if (!(kDigitSegments[digit] & (1 << s))) continue;
                    const double d = point_segment_dist(px, py, segs[s]);
                    const double a = (thickness - d) / edge + 0.5;
                    v = std::max(v, std::min(1.0, std::max(0.0, a)));
                }
                p[y * size + x] = static_cast<float>(v * intensity);
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<nn::Tensor<float>> synthetic_backgrounds(int count, int channels, int height,
                                                     int width, SeedSpec seed) {
    std::vector<nn::Tensor<float>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(seed.master_seed, seed.stream_id + 0x6267 + static_cast<std::uint64_t>(i));
        nn::Tensor<float> img({channels, height, width});
        for (std::int64_t c = 0; c < channels; ++c) {
            // A few random low-frequency waves per channel.
            double fx[3], fy[3], ph[3], amp[3];
            for (int k = 0; k < 3; ++k) {
                fx[k] = rng.uniform(0.5, 3.0);
                fy[k] = rng.uniform(0.5, 3.0);
                ph[k] = rng.uniform(0.0, 2.0 * M_PI);
                amp[k] = rng.uniform(0.3, 1.0);
            }
            float* p = img.data() + c * height * width;
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    double v = 0.0, norm = 0.0;
                    for (int k = 0; k < 3; ++k) {
                        v += amp[k] * std::sin(2.0 * M_PI *
                                                   (fx[k] * x / width + fy[k] * y / height) +
                                               ph[k]);
                        norm += amp[k];
                    }
                    p[y * width + x] = static_cast<float>(0.5 + 0.4 * v / norm);
                }
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

std::shared_ptr<const SpriteBank> load_sprite_bank(const SpriteSourceSpec& sprites,
                                                   const BackgroundSourceSpec& background,
                                                   const FrameSpec& frame, SeedSpec bank_seed) {
    auto bank = std::make_shared<SpriteBank>();
    switch (sprites.kind) {
        case SpriteSourceSpec::Kind::synthetic:
            bank->sprites =
                synthetic_glyphs(sprites.synthetic_count, sprites.sprite_size, bank_seed);
            break;
        case SpriteSourceSpec::Kind::idx:
            bank->sprites = load_idx_images(sprites.path);
            break;
    }
    switch (background.kind) {
        case BackgroundSourceSpec::Kind::none:
            break;
        case BackgroundSourceSpec::Kind::synthetic:
            bank->backgrounds = synthetic_backgrounds(
                background.synthetic_count, frame.channels, frame.height, frame.width,
                bank_seed);
            break;
        case BackgroundSourceSpec::Kind::cifar: {
            auto raw = load_cifar10_batch(background.path);
            bank->backgrounds.reserve(raw.size());
            for (const auto& img : raw) {
                MINISTL_CHECK(frame.channels == 3, ConfigError,
                              "CIFAR backgrounds need a 3-channel FrameSpec");
                bank->backgrounds.push_back(resize_bilinear(img, frame.height, frame.width));
            }
            break;
        }
    }
    MINISTL_CHECK(!bank->sprites.empty(), IoError, "sprite bank is empty");
    return bank;
}

}  // namespace ministl::data

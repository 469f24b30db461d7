#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ministl/frame.hpp"
#include "ministl/rng.hpp"
#include "ministl/tensor.hpp"

namespace ministl::data {

/// Where moving-object sprites come from: an IDX image file (MNIST or
/// FashionMNIST layout) or the built-in procedural glyph set, which keeps
/// the toolkit runnable without downloaded assets.
struct SpriteSourceSpec {
    enum class Kind { synthetic, idx };
    Kind kind = Kind::synthetic;
    std::string path;
    int synthetic_count = 64;
    int sprite_size = 28;

    bool operator==(const SpriteSourceSpec&) const = default;
};

struct BackgroundSourceSpec {
    enum class Kind { none, synthetic, cifar };
    Kind kind = Kind::none;
    std::string path;
    int synthetic_count = 32;

    bool operator==(const BackgroundSourceSpec&) const = default;
};

/// Immutable pool of sprites (grayscale (h, w) planes in [0, 1]) and
/// optional canvas-sized (C, H, W) backgrounds.
struct SpriteBank {
    std::vector<nn::Tensor<float>> sprites;
    std::vector<nn::Tensor<float>> backgrounds;

    int sprite_h() const { return static_cast<int>(sprites.at(0).dim(0)); }
    int sprite_w() const { return static_cast<int>(sprites.at(0).dim(1)); }
};

/// Procedural digit-like glyphs: seven-segment strokes with per-sprite
/// jitter in thickness, endpoints and intensity.
std::vector<nn::Tensor<float>> synthetic_glyphs(int count, int size, SeedSpec seed);

/// Smooth random fields in [0.1, 0.9] for background use.
std::vector<nn::Tensor<float>> synthetic_backgrounds(int count, int channels, int height,
                                                     int width, SeedSpec seed);

/// Assembles the bank for one split. CIFAR backgrounds are bilinearly
/// resized to the canvas; missing source files surface as IoError with the
/// expected path.
std::shared_ptr<const SpriteBank> load_sprite_bank(const SpriteSourceSpec& sprites,
                                                   const BackgroundSourceSpec& background,
                                                   const FrameSpec& frame, SeedSpec bank_seed);

}  // namespace ministl::data

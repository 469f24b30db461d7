#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ministl/common.hpp"

namespace ministl {

enum class LayerKind { conv2d, dense, attention, norm, elementwise };

/// One counted layer application in a forward pass. `repeat` folds in how
/// many times the layer runs (frames, timesteps).
struct LayerCost {
    LayerKind kind = LayerKind::elementwise;
    std::string tag;
    std::int64_t repeat = 1;

    // conv2d
    std::int64_t kh = 0, kw = 0, c_in = 0, c_out = 0, h_out = 0, w_out = 0, groups = 1;
    // dense
    std::int64_t fan_in = 0, fan_out = 0, positions = 1;
    // attention (score + weighted-sum over flattened tokens)
    std::int64_t dim = 0, tokens = 0, heads = 1;
    // norm / elementwise
    std::int64_t elements = 0;

    static LayerCost conv(std::string tag, std::int64_t kh, std::int64_t kw, std::int64_t c_in,
                          std::int64_t c_out, std::int64_t h_out, std::int64_t w_out,
                          std::int64_t groups = 1, std::int64_t repeat = 1);
    static LayerCost dense(std::string tag, std::int64_t fan_in, std::int64_t fan_out,
                           std::int64_t positions = 1, std::int64_t repeat = 1);
    static LayerCost attention(std::string tag, std::int64_t dim, std::int64_t tokens,
                               std::int64_t heads, std::int64_t repeat = 1);
    static LayerCost norm(std::string tag, std::int64_t elements, std::int64_t repeat = 1);
    static LayerCost elementwise(std::string tag, std::int64_t elements, std::int64_t repeat = 1);
};

/// Multiply-accumulate count of one layer. Throws CoverageError for a kind
/// it has no cost model for (never silently zero).
std::int64_t layer_macs(const LayerCost& layer);

/// Total MACs of a sequential composition (sum of the parts).
std::int64_t estimate_flops(const std::vector<LayerCost>& layers);

}  // namespace ministl

#pragma once

#include "ministl/data/trajectory.hpp"
#include "ministl/frame.hpp"

namespace ministl::data {

/// Composites sprites along their trajectories into a (1, T_len, C, H, W)
/// batch in [0, 1]. Overlapping sprites combine by per-pixel max of
/// intensities; with a background the combined intensity map is blended
/// over it as white ink with the intensity as alpha. Positions are rounded
/// to the pixel grid; a position that would clip raises GeometryError.
VideoBatch render_sequence(const std::vector<nn::Tensor<float>>& sprites,
                           const std::vector<TrajectorySpec>& trajectories,
                           const nn::Tensor<float>* background, const FrameSpec& frame);

}  // namespace ministl::data

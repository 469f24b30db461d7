#pragma once

#include <array>
#include <vector>

#include "ministl/rng.hpp"

namespace ministl::data {

using Vec2 = std::array<double, 2>;

/// Position and velocity of one bouncing object. Positions are top-left
/// sprite coordinates, one per frame; every position keeps the sprite fully
/// inside the canvas.
struct TrajectorySpec {
    int sprite_id = 0;
    Vec2 start{0.0, 0.0};
    Vec2 velocity{0.0, 0.0};
    std::vector<Vec2> positions;
};

/// One move-then-reflect step inside [0, x_max] x [0, y_max]: the position
/// advances by the velocity, overshoot is mirrored back into range and the
/// velocity component flips sign on contact.
void bounce_step(double& x, double& y, double& vx, double& vy, double x_max, double y_max);

/// Direction uniform on the unit circle, magnitude uniform on
/// [speed_min, speed_max), start uniform over valid placements.
TrajectorySpec sample_trajectory(Rng& rng, int num_frames, int canvas_h, int canvas_w,
                                 int sprite_h, int sprite_w, double speed_min,
                                 double speed_max);

}  // namespace ministl::data

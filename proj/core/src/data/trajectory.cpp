#include "ministl/data/trajectory.hpp"

#include <cmath>

#include "ministl/common.hpp"

namespace ministl::data {

namespace {

void reflect_axis(double& p, double& v, double p_max) {
    if (p_max <= 0.0) {
        p = 0.0;
        return;
    }
    while (p < 0.0 || p > p_max) {
        if (p < 0.0) {
            p = -p;
            v = -v;
        } else {
            p = 2.0 * p_max - p;
            v = -v;
        }
    }
}

}  // namespace

void bounce_step(double& x, double& y, double& vx, double& vy, double x_max, double y_max) {
    x += vx;
    y += vy;
    reflect_axis(x, vx, x_max);
    reflect_axis(y, vy, y_max);
}

TrajectorySpec sample_trajectory(Rng& rng, int num_frames, int canvas_h, int canvas_w,
                                 int sprite_h, int sprite_w, double speed_min,
                                 double speed_max) {
    MINISTL_CHECK(num_frames >= 1, ConfigError, "trajectory needs num_frames >= 1");
    MINISTL_CHECK(sprite_h <= canvas_h && sprite_w <= canvas_w, GeometryError,
                  "sprite " << sprite_h << "x" << sprite_w << " does not fit canvas "
                            << canvas_h << "x" << canvas_w);
    MINISTL_CHECK(speed_min >= 0.0 && speed_max >= speed_min, ConfigError,
                  "speed range [" << speed_min << ", " << speed_max << "] is invalid");

    const double x_max = canvas_w - sprite_w;
    const double y_max = canvas_h - sprite_h;

    TrajectorySpec t;
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double speed = rng.uniform(speed_min, speed_max);
    t.velocity = {speed * std::cos(angle), speed * std::sin(angle)};
    t.start = {rng.uniform(0.0, x_max), rng.uniform(0.0, y_max)};

    t.positions.reserve(num_frames);
    t.positions.push_back(t.start);
    double x = t.start[0], y = t.start[1];
    double vx = t.velocity[0], vy = t.velocity[1];
    for (int f = 1; f < num_frames; ++f) {
        bounce_step(x, y, vx, vy, x_max, y_max);
        t.positions.push_back({x, y});
    }
    return t;
}

}  // namespace ministl::data

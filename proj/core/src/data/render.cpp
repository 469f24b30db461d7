#include "ministl/data/render.hpp"

#include <cmath>

namespace ministl::data {

VideoBatch render_sequence(const std::vector<nn::Tensor<float>>& sprites,
                           const std::vector<TrajectorySpec>& trajectories,
                           const nn::Tensor<float>* background, const FrameSpec& frame) {
    frame.validate();
    std::size_t t_len = 0;
    for (const auto& t : trajectories) {
        MINISTL_CHECK(t.sprite_id >= 0 && t.sprite_id < static_cast<int>(sprites.size()),
                      ShapeError, "trajectory references sprite " << t.sprite_id << " of "
                                                                  << sprites.size());
        if (t_len == 0) {
            t_len = t.positions.size();
        }
        MINISTL_CHECK(t.positions.size() == t_len, ShapeError,
                      "trajectories disagree on frame count: " << t.positions.size() << " vs "
                                                               << t_len);
    }
    if (trajectories.empty()) t_len = 1;
    MINISTL_CHECK(t_len >= 1, ShapeError, "render_sequence needs at least one frame");
    if (background != nullptr) {
        MINISTL_CHECK((background->shape() ==
                       nn::Shape{frame.channels, frame.height, frame.width}),
                      ShapeError, "background " << nn::shape_str(background->shape())
                                                << " does not match the canvas");
    }

    const std::int64_t H = frame.height, W = frame.width, C = frame.channels;
    nn::Tensor<float> out({1, static_cast<std::int64_t>(t_len), C, H, W});
    nn::Tensor<float> intensity({H, W});

    for (std::size_t f = 0; f < t_len; ++f) {
        intensity.fill(0.0f);
        float* canvas = intensity.data();
        for (const auto& t : trajectories) {
            const auto& sprite = sprites[t.sprite_id];
            const std::int64_t sh = sprite.dim(0), sw = sprite.dim(1);
            const auto ix = static_cast<std::int64_t>(std::lround(t.positions[f][0]));
            const auto iy = static_cast<std::int64_t>(std::lround(t.positions[f][1]));
            MINISTL_CHECK(ix >= 0 && iy >= 0 && ix + sw <= W && iy + sh <= H, GeometryError,
                          "sprite placement (" << ix << ", " << iy
                                               << ") clips the canvas at frame " << f);
            const float* sp = sprite.data();
            for (std::int64_t y = 0; y < sh; ++y) {
                float* row = canvas + (iy + y) * W + ix;
                const float* srow = sp + y * sw;
                for (std::int64_t x = 0; x < sw; ++x) {
                    row[x] = std::max(row[x], srow[x]);
                }
            }
        }

        float* dst = out.data() + static_cast<std::int64_t>(f) * C * H * W;
        if (background != nullptr) {
            const float* bg = background->data();
            for (std::int64_t c = 0; c < C; ++c) {
                for (std::int64_t i = 0; i < H * W; ++i) {
                    const float s = canvas[i];
                    dst[c * H * W + i] = bg[c * H * W + i] * (1.0f - s) + s;
                }
            }
        } else {
            for (std::int64_t c = 0; c < C; ++c) {
                std::copy_n(canvas, H * W, dst + c * H * W);
            }
        }
    }
    return VideoBatch(std::move(out), frame, BatchRole::context);
}

}  // namespace ministl::data

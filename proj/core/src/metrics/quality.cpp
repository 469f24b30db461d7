#include "ministl/metrics/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ministl::metrics {

namespace {

void check_same_shape(const nn::Tensor<float>& a, const nn::Tensor<float>& b,
                      const char* what) {
    MINISTL_CHECK(a.shape() == b.shape(), ShapeError,
                  what << ": shape " << nn::shape_str(a.shape()) << " vs "
                       << nn::shape_str(b.shape()));
    MINISTL_CHECK(a.ndim() == 5, ShapeError, what << " expects (B,T,C,H,W)");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

inline float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

/// Valid-region separable Gaussian correlation of one (H, W) plane.
void gaussian_valid(const std::vector<double>& img, int h, int w,
                    const std::vector<double>& kernel, std::vector<double>& tmp,
                    std::vector<double>& out) {
    const int k = static_cast<int>(kernel.size());
    const int oh = h - k + 1;
    const int ow = w - k + 1;
    tmp.assign(static_cast<std::size_t>(h) * ow, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0;
            for (int i = 0; i < k; ++i) acc += kernel[i] * img[y * w + x + i];
            tmp[y * ow + x] = acc;
        }
    }
    out.assign(static_cast<std::size_t>(oh) * ow, 0.0);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0;
            for (int i = 0; i < k; ++i) acc += kernel[i] * tmp[(y + i) * ow + x];
            out[y * ow + x] = acc;
        }
    }
}

}  // namespace

ErrorPair mse(const nn::Tensor<float>& pred, const nn::Tensor<float>& target) {
    check_same_shape(pred, target, "mse");
    const float* p = pred.data();
    const float* t = target.data();
    double acc = 0;
    const std::int64_t n = pred.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(p[i]) - t[i];
        acc += e * e;
    }
    const double pixel = n > 0 ? acc / n : 0.0;
    const double chw =
        static_cast<double>(pred.dim(2)) * pred.dim(3) * pred.dim(4);
    return {pixel * chw, pixel};
}

ErrorPair mae(const nn::Tensor<float>& pred, const nn::Tensor<float>& target) {
    check_same_shape(pred, target, "mae");
    const float* p = pred.data();
    const float* t = target.data();
    double acc = 0;
    const std::int64_t n = pred.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        acc += std::abs(static_cast<double>(p[i]) - t[i]);
    }
    const double pixel = n > 0 ? acc / n : 0.0;
    const double chw =
        static_cast<double>(pred.dim(2)) * pred.dim(3) * pred.dim(4);
    return {pixel * chw, pixel};
}

ErrorPair mse(const VideoBatch& pred, const VideoBatch& target) {
    return mse(pred.data, target.data);
}

ErrorPair mae(const VideoBatch& pred, const VideoBatch& target) {
    return mae(pred.data, target.data);
}

double ssim(const nn::Tensor<float>& pred, const nn::Tensor<float>& target,
            const SsimOptions& opts) {
    check_same_shape(pred, target, "ssim");
    const std::int64_t B = pred.dim(0), T = pred.dim(1), C = pred.dim(2);
    const int h = static_cast<int>(pred.dim(3));
    const int w = static_cast<int>(pred.dim(4));
    const int win = std::min({opts.window, h, w});
    const auto kernel = gaussian_kernel(win, opts.sigma);

    const double c1 = (opts.k1 * opts.data_range) * (opts.k1 * opts.data_range);
    const double c2 = (opts.k2 * opts.data_range) * (opts.k2 * opts.data_range);

    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    std::vector<double> tmp, mx, my, mxx, myy, mxy;

    double total = 0;
    std::int64_t planes = 0;
    for (std::int64_t b = 0; b < B; ++b) {
        for (std::int64_t t = 0; t < T; ++t) {
            for (std::int64_t c = 0; c < C; ++c) {
                const std::int64_t base = ((b * T + t) * C + c) * plane;
                const float* pp = pred.data() + base;
                const float* tp = target.data() + base;
                for (std::int64_t i = 0; i < plane; ++i) {
                    const double xv = clamp01(pp[i]);
                    const double yv = clamp01(tp[i]);
                    x[i] = xv;
                    y[i] = yv;
                    xx[i] = xv * xv;
                    yy[i] = yv * yv;
                    xy[i] = xv * yv;
                }
                gaussian_valid(x, h, w, kernel, tmp, mx);
                gaussian_valid(y, h, w, kernel, tmp, my);
                gaussian_valid(xx, h, w, kernel, tmp, mxx);
                gaussian_valid(yy, h, w, kernel, tmp, myy);
                gaussian_valid(xy, h, w, kernel, tmp, mxy);

                double acc = 0;
                for (std::size_t i = 0; i < mx.size(); ++i) {
                    const double mu_x = mx[i], mu_y = my[i];
                    const double var_x = mxx[i] - mu_x * mu_x;
                    const double var_y = myy[i] - mu_y * mu_y;
                    const double cov = mxy[i] - mu_x * mu_y;
                    acc += ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) /
                           ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
                }
                total += acc / static_cast<double>(mx.size());
                ++planes;
            }
        }
    }
    return planes > 0 ? total / planes : 1.0;
}

double ssim(const VideoBatch& pred, const VideoBatch& target, const SsimOptions& opts) {
    return ssim(pred.data, target.data, opts);
}

double psnr(const nn::Tensor<float>& pred, const nn::Tensor<float>& target, double max_val) {
    check_same_shape(pred, target, "psnr");
    const std::int64_t B = pred.dim(0), T = pred.dim(1);
    const std::int64_t frame = pred.dim(2) * pred.dim(3) * pred.dim(4);
    double total = 0;
    std::int64_t finite_frames = 0;
    for (std::int64_t f = 0; f < B * T; ++f) {
        const float* p = pred.data() + f * frame;
        const float* t = target.data() + f * frame;
        double acc = 0;
        for (std::int64_t i = 0; i < frame; ++i) {
            const double e = static_cast<double>(clamp01(p[i])) - clamp01(t[i]);
            acc += e * e;
        }
        const double frame_mse = acc / frame;
        if (frame_mse > 0) {
            total += 10.0 * std::log10(max_val * max_val / frame_mse);
            ++finite_frames;
        }
    }
    if (finite_frames == 0) return std::numeric_limits<double>::infinity();
    return total / finite_frames;
}

double psnr(const VideoBatch& pred, const VideoBatch& target, double max_val) {
    return psnr(pred.data, target.data, max_val);
}

}  // namespace ministl::metrics

#pragma once

#include "ministl/frame.hpp"

namespace ministl::metrics {

/// MSE under both reporting conventions. `paper` sums the squared error
/// over channels and pixels and averages over batch and time — the
/// convention behind the benchmark tables; `pixel` is the plain per-element
/// mean. paper = pixel * C*H*W exactly.
struct ErrorPair {
    double paper = 0.0;
    double pixel = 0.0;
};

ErrorPair mse(const VideoBatch& pred, const VideoBatch& target);
ErrorPair mae(const VideoBatch& pred, const VideoBatch& target);

ErrorPair mse(const nn::Tensor<float>& pred, const nn::Tensor<float>& target);
ErrorPair mae(const nn::Tensor<float>& pred, const nn::Tensor<float>& target);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double data_range = 1.0;
};

/// Windowed SSIM, averaged per channel and frame over valid window
/// positions; inputs are clamped to [0,1] first. Windows shrink (with
/// renormalized weights) when a frame is smaller than 11x11.
double ssim(const nn::Tensor<float>& pred, const nn::Tensor<float>& target,
            const SsimOptions& opts = {});
double ssim(const VideoBatch& pred, const VideoBatch& target, const SsimOptions& opts = {});

/// Per-frame PSNR in dB averaged over frames and batch, on inputs clamped
/// to [0,1]. Frames with zero error carry no finite value and are skipped;
/// the result is +infinity iff every frame is exact.
double psnr(const nn::Tensor<float>& pred, const nn::Tensor<float>& target,
            double max_val = 1.0);
double psnr(const VideoBatch& pred, const VideoBatch& target, double max_val = 1.0);

}  // namespace ministl::metrics

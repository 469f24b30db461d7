#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ministl/metrics/quality.hpp"

namespace ministl::metrics {

/// Quality + computational metrics of one evaluation. The JSON form carries
/// explicit convention tags (frame-pixel-sum errors, MACs-as-FLOPs,
/// per-frame PSNR) so the numbers stay interpretable.
struct MetricReport {
    double mse_paper = 0.0;
    double mse_pixel = 0.0;
    double mae_paper = 0.0;
    double mae_pixel = 0.0;
    double rmse_pixel = 0.0;
    double ssim = 0.0;
    double psnr_db = 0.0;  // +inf iff the prediction is exact

    double params_m = 0.0;
    double flops_g = 0.0;
    double fps = 0.0;
    std::string device = "cpu";

    /// Perceptual metric slot; never populated (needs a pretrained network).
    std::optional<double> lpips;

    nlohmann::json to_json() const;
    static MetricReport from_json(const nlohmann::json& j);
};

/// Fills the quality fields from a prediction/target pair.
MetricReport quality_report(const VideoBatch& pred, const VideoBatch& target);

}  // namespace ministl::metrics

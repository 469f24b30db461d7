#include "ministl/metrics/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

namespace ministl::metrics {

namespace {

nlohmann::json encode_db(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

double decode_db(const nlohmann::json& j) {
    if (j.is_string()) {
        return std::numeric_limits<double>::infinity();
    }
    return j.get<double>();
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j{
        {"mse_convention", "frame_pixel_sum"},
        {"flops_convention", "macs"},
        {"psnr_convention", "per_frame_mean"},
        {"mse_paper", mse_paper},
        {"mse_pixel", mse_pixel},
        {"mae_paper", mae_paper},
        {"mae_pixel", mae_pixel},
        {"rmse_pixel", rmse_pixel},
        {"ssim", ssim},
        {"psnr_db", encode_db(psnr_db)},
        {"params_m", params_m},
        {"flops_g", flops_g},
        {"fps", fps},
        {"device", device},
        {"lpips", nullptr},
    };
    if (lpips) j["lpips"] = *lpips;
    return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
    MetricReport r;
    r.mse_paper = j.value("mse_paper", 0.0);
    r.mse_pixel = j.value("mse_pixel", 0.0);
    r.mae_paper = j.value("mae_paper", 0.0);
    r.mae_pixel = j.value("mae_pixel", 0.0);
    r.rmse_pixel = j.value("rmse_pixel", 0.0);
    r.ssim = j.value("ssim", 0.0);
    if (j.contains("psnr_db")) r.psnr_db = decode_db(j["psnr_db"]);
    r.params_m = j.value("params_m", 0.0);
    r.flops_g = j.value("flops_g", 0.0);
    r.fps = j.value("fps", 0.0);
    r.device = j.value("device", "cpu");
    if (j.contains("lpips") && !j["lpips"].is_null()) r.lpips = j["lpips"].get<double>();
    return r;
}

MetricReport quality_report(const VideoBatch& pred, const VideoBatch& target) {
    MetricReport r;
    const auto m = mse(pred, target);
    const auto a = mae(pred, target);
    r.mse_paper = m.paper;
    r.mse_pixel = m.pixel;
    r.mae_paper = a.paper;
    r.mae_pixel = a.pixel;
    r.rmse_pixel = std::sqrt(m.pixel);
    r.ssim = ssim(pred, target);
    r.psnr_db = psnr(pred, target);
    return r;
}

}  // namespace ministl::metrics

#include "ministl/harness/evaluate.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ministl/models/checkpoint.hpp"

namespace ministl::harness {

namespace {

struct QualityAccum {
    double sq_sum = 0.0;     // squared error over all elements
    double abs_sum = 0.0;    // absolute error over all elements
    std::int64_t elems = 0;
    double ssim_sum = 0.0;   // per-plane ssim, weighted by plane count
    std::int64_t planes = 0;
    double psnr_sum = 0.0;   // per-frame psnr over frames with nonzero error
    std::int64_t psnr_frames = 0;
    std::int64_t chw = 0;

    void add(const VideoBatch& pred, const VideoBatch& target) {
        const auto& p = pred.data;
        const auto& t = target.data;
        const std::int64_t B = p.dim(0), T = p.dim(1);
        const std::int64_t frame = p.dim(2) * p.dim(3) * p.dim(4);
        chw = frame;
        const float* pp = p.data();
        const float* tp = t.data();
        for (std::int64_t f = 0; f < B * T; ++f) {
            double sq = 0.0, ab = 0.0, sq_clamped = 0.0;
            for (std::int64_t i = 0; i < frame; ++i) {
                const double pv = pp[f * frame + i];
                const double tv = tp[f * frame + i];
                const double e = pv - tv;
                sq += e * e;
                ab += std::abs(e);
                const double pc = std::min(1.0, std::max(0.0, pv));
                const double tc = std::min(1.0, std::max(0.0, tv));
                sq_clamped += (pc - tc) * (pc - tc);
            }
            sq_sum += sq;
            abs_sum += ab;
            elems += frame;
            const double frame_mse = sq_clamped / frame;
            if (frame_mse > 0) {
                psnr_sum += 10.0 * std::log10(1.0 / frame_mse);
                ++psnr_frames;
            }
        }
        const double s = metrics::ssim(pred, target);
        const std::int64_t n_planes = B * T * p.dim(2);
        ssim_sum += s * n_planes;
        planes += n_planes;
    }

    void fill(metrics::MetricReport& r) const {
        r.mse_pixel = elems > 0 ? sq_sum / elems : 0.0;
        r.mae_pixel = elems > 0 ? abs_sum / elems : 0.0;
        r.mse_paper = r.mse_pixel * chw;
        r.mae_paper = r.mae_pixel * chw;
        r.rmse_pixel = std::sqrt(r.mse_pixel);
        r.ssim = planes > 0 ? ssim_sum / planes : 1.0;
        r.psnr_db = psnr_frames > 0 ? psnr_sum / psnr_frames
                                    : std::numeric_limits<double>::infinity();
    }
};

}  // namespace

metrics::MetricReport evaluate_quality(models::Model<float>& model,
                                       const data::Dataset& dataset,
                                       const std::vector<std::int64_t>& indices,
                                       int batch_size) {
    MINISTL_CHECK(batch_size >= 1, ConfigError, "batch_size must be >= 1");
    MINISTL_CHECK(dataset.frame() == model.config().frame &&
                      dataset.context_len() == model.config().T &&
                      dataset.horizon() == model.config().T_prime,
                  ShapeError,
                  "dataset shape (T=" << dataset.context_len() << ", T'=" << dataset.horizon()
                                      << ", C=" << dataset.frame().channels << ", "
                                      << dataset.frame().height << "x" << dataset.frame().width
                                      << ") is incompatible with the model (T="
                                      << model.config().T << ", T'=" << model.config().T_prime
                                      << ", C=" << model.config().frame.channels << ", "
                                      << model.config().frame.height << "x"
                                      << model.config().frame.width << ")");
    QualityAccum acc;
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(indices.size(), start + batch_size);
        std::vector<std::int64_t> chunk(indices.begin() + start, indices.begin() + end);
        auto pair = data::collate(dataset, chunk);
        auto pred = model.predict(pair.context);
        acc.add(pred, pair.target);
    }
    metrics::MetricReport r;
    acc.fill(r);
    return r;
}

metrics::MetricReport evaluate_model(models::Model<float>& model, const data::Dataset& dataset,
                                     const EvalOptions& opts) {
    std::vector<std::int64_t> all(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    metrics::MetricReport r;
    if (!all.empty()) {
        r = evaluate_quality(model, dataset, all, opts.batch_size);
    }
    r.device = opts.device;
    if (opts.computational) {
        r.params_m = static_cast<double>(metrics::count_params(model)) / 1e6;
        r.flops_g = static_cast<double>(metrics::model_flops(model)) / 1e9;
    }
    if (opts.fps) {
        auto fps_opts = *opts.fps;
        fps_opts.device = opts.device;
        r.fps = metrics::measure_fps(model, fps_opts).fps;
    }
    return r;
}

metrics::MetricReport run_eval(const EvalConfig& cfg_in) {
    EvalConfig cfg = cfg_in;
    cfg.resolve();
    auto loaded = models::load_checkpoint(cfg.checkpoint);
    data::DatasetPtr ds = build_dataset(cfg.dataset);
    if (cfg.perturbation) {
        ds = data::perturbed_view(ds, *cfg.perturbation);
    }
    EvalOptions opts;
    opts.batch_size = cfg.batch_size;
    opts.device = cfg.device;
    if (cfg.measure_fps) opts.fps = cfg.fps;
    auto report = evaluate_model(*loaded.model, *ds, opts);
    if (!cfg.out.empty()) {
        std::ofstream os(cfg.out, std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot write report to " << cfg.out);
        os << report.to_json().dump(2) << "\n";
    }
    return report;
}

}  // namespace ministl::harness

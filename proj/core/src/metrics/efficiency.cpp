#include "ministl/metrics/efficiency.hpp"

#include <algorithm>
#include <chrono>

#include "ministl/rng.hpp"

namespace ministl {

LayerCost LayerCost::conv(std::string tag, std::int64_t kh, std::int64_t kw, std::int64_t c_in,
                          std::int64_t c_out, std::int64_t h_out, std::int64_t w_out,
                          std::int64_t groups, std::int64_t repeat) {
    LayerCost l;
    l.kind = LayerKind::conv2d;
    l.tag = std::move(tag);
    l.kh = kh;
    l.kw = kw;
    l.c_in = c_in;
    l.c_out = c_out;
    l.h_out = h_out;
    l.w_out = w_out;
    l.groups = groups;
    l.repeat = repeat;
    return l;
}

LayerCost LayerCost::dense(std::string tag, std::int64_t fan_in, std::int64_t fan_out,
                           std::int64_t positions, std::int64_t repeat) {
    LayerCost l;
    l.kind = LayerKind::dense;
    l.tag = std::move(tag);
    l.fan_in = fan_in;
    l.fan_out = fan_out;
    l.positions = positions;
    l.repeat = repeat;
    return l;
}

LayerCost LayerCost::attention(std::string tag, std::int64_t dim, std::int64_t tokens,
                               std::int64_t heads, std::int64_t repeat) {
    LayerCost l;
    l.kind = LayerKind::attention;
    l.tag = std::move(tag);
    l.dim = dim;
    l.tokens = tokens;
    l.heads = heads;
    l.repeat = repeat;
    return l;
}

LayerCost LayerCost::norm(std::string tag, std::int64_t elements, std::int64_t repeat) {
    LayerCost l;
    l.kind = LayerKind::norm;
    l.tag = std::move(tag);
    l.elements = elements;
    l.repeat = repeat;
    return l;
}

LayerCost LayerCost::elementwise(std::string tag, std::int64_t elements, std::int64_t repeat) {
    LayerCost l;
    l.kind = LayerKind::elementwise;
    l.tag = std::move(tag);
    l.elements = elements;
    l.repeat = repeat;
    return l;
}

std::int64_t layer_macs(const LayerCost& layer) {
    switch (layer.kind) {
        case LayerKind::conv2d:
            return layer.repeat * layer.kh * layer.kw * (layer.c_in / layer.groups) *
                   layer.c_out * layer.h_out * layer.w_out;
        case LayerKind::dense:
            return layer.repeat * layer.fan_in * layer.fan_out * layer.positions;
        case LayerKind::attention:
            // scores (N^2 * d) + weighted sum (N^2 * d) + softmax elements.
            return layer.repeat * (2 * layer.tokens * layer.tokens * layer.dim +
                                   layer.heads * layer.tokens * layer.tokens);
        case LayerKind::norm:
        case LayerKind::elementwise:
            return layer.repeat * layer.elements;
    }
    throw CoverageError("layer_macs: no cost model for layer kind " +
                        std::to_string(static_cast<int>(layer.kind)) +
                        (layer.tag.empty() ? "" : " (" + layer.tag + ")"));
}

std::int64_t estimate_flops(const std::vector<LayerCost>& layers) {
    std::int64_t total = 0;
    for (const auto& l : layers) total += layer_macs(l);
    return total;
}

}  // namespace ministl

namespace ministl::metrics {

std::int64_t count_params(models::Model<float>& model) {
    std::int64_t total = 0;
    for (const auto& [name, var] : model.parameters()) {
        total += var.numel();
    }
    return total;
}

std::int64_t model_flops(const models::Model<float>& model) {
    return estimate_flops(model.cost_plan());
}

FpsResult measure_fps(models::Model<float>& model, const FpsOptions& opts) {
    MINISTL_CHECK(opts.batch >= 1 && opts.trials >= 1 && opts.warmup >= 0, ConfigError,
                  "measure_fps: invalid options");
    const auto& cfg = model.config();
    Rng rng(0xF5, 0);
    nn::Tensor<float> input(
        {opts.batch, cfg.T, cfg.frame.channels, cfg.frame.height, cfg.frame.width});
    float* p = input.data();
    for (std::int64_t i = 0; i < input.numel(); ++i) {
        p[i] = static_cast<float>(rng.uniform());
    }
    VideoBatch batch(input, cfg.frame, BatchRole::context);

    const bool was_training = model.training();
    model.set_training(false);
    for (int i = 0; i < opts.warmup; ++i) {
        (void)model.predict(batch);
    }
    std::vector<double> latencies;
    latencies.reserve(opts.trials);
    for (int i = 0; i < opts.trials; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)model.predict(batch);
        const auto t1 = std::chrono::steady_clock::now();
        latencies.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    model.set_training(was_training);

    std::sort(latencies.begin(), latencies.end());
    const double median = latencies[latencies.size() / 2];
    FpsResult r;
    r.median_latency_s = median;
    r.batch = opts.batch;
    r.trials = opts.trials;
    r.device = opts.device;
    r.fps = median > 0 ? static_cast<double>(opts.batch) * cfg.T_prime / median : 0.0;
    return r;
}

}  // namespace ministl::metrics

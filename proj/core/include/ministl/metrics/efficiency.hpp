#pragma once

#include "ministl/cost.hpp"
#include "ministl/models/model.hpp"

namespace ministl::metrics {

/// Exact count of learnable scalars.
std::int64_t count_params(models::Model<float>& model);

/// Analytic multiply-accumulate count of one forward pass at batch 1
/// (the convention behind the benchmark "FLOPs" column).
std::int64_t model_flops(const models::Model<float>& model);

struct FpsOptions {
    int batch = 16;
    int warmup = 10;
    int trials = 50;
    std::string device = "cpu";
};

struct FpsResult {
    double fps = 0.0;
    double median_latency_s = 0.0;
    int batch = 0;
    int trials = 0;
    std::string device;
};

/// Timed inference throughput: warm-up passes, then the median latency over
/// the timed passes on random input; FPS = batch * T' / median latency.
FpsResult measure_fps(models::Model<float>& model, const FpsOptions& opts = {});

}  // namespace ministl::metrics

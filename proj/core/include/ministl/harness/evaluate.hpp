#pragma once

#include <optional>

#include "ministl/harness/config.hpp"
#include "ministl/metrics/report.hpp"
#include "ministl/registry.hpp"

namespace ministl::harness {

struct EvalOptions {
    int batch_size = 16;
    bool computational = true;
    std::optional<metrics::FpsOptions> fps;  // engaged only when timing is wanted
    std::string device = "cpu";
};

/// Deterministic single pass over the dataset in index order; quality
/// metrics are reduced by exact summation of per-chunk statistics.
metrics::MetricReport evaluate_model(models::Model<float>& model, const data::Dataset& dataset,
                                     const EvalOptions& opts = {});

/// Quality-only evaluation over selected indices (validation during
/// training).
metrics::MetricReport evaluate_quality(models::Model<float>& model,
                                       const data::Dataset& dataset,
                                       const std::vector<std::int64_t>& indices,
                                       int batch_size);

/// Loads the checkpoint named by the config and evaluates it.
metrics::MetricReport run_eval(const EvalConfig& cfg);

}  // namespace ministl::harness

#pragma once

#include <nlohmann/json.hpp>

#include "ministl/harness/config.hpp"
#include "ministl/metrics/report.hpp"

namespace ministl::harness {

/// Outcome of one training run. The best checkpoint is the epoch with the
/// lowest validation MSE (frame-pixel-sum convention).
struct RunRecord {
    std::string config_hash;
    std::string run_dir;
    std::vector<double> train_loss;  // per-epoch mean of the per-pixel MSE loss
    std::vector<metrics::MetricReport> val_history;
    std::string best_checkpoint;
    std::string last_checkpoint;
    double best_val_mse = 0.0;  // +inf when no epoch ran
    int best_epoch = -1;        // 1-based; -1 when no epoch ran
    double wall_seconds = 0.0;
    nlohmann::json env;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

/// Runs minibatch Adam on per-pixel MSE with per-epoch validation and
/// best/last checkpointing under <out_dir>/<config-hash>/. Dispatches to
/// the lr x drop-path sweep when grid_search is set, returning the best
/// run. Reproducible bit for bit given the same config and build.
RunRecord train(const TrainConfig& cfg);

/// Single run, no grid dispatch; cfg must already be resolved.
RunRecord train_single(const TrainConfig& cfg);

}  // namespace ministl::harness

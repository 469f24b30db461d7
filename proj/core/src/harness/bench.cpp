#include "ministl/harness/bench.hpp"

#include <iostream>

#include "ministl/models/checkpoint.hpp"

namespace ministl::harness {

namespace {

ModelPtr obtain_model(const BenchConfig& cfg, const BenchEntry& entry) {
    if (!entry.checkpoint.empty()) {
        return models::load_checkpoint(entry.checkpoint).model;
    }
    TrainConfig tc = cfg.train;
    tc.model_name = entry.name;
    tc.model = entry.model;
    tc.resolve();
    const auto best = std::filesystem::path(tc.out_dir) / config_hash(tc) / "checkpoints" /
                      "best.ckpt";
    if (!std::filesystem::exists(best)) {
        std::cout << "[bench] training " << entry.name << "\n";
        train_single(tc);
    } else {
        std::cout << "[bench] reusing checkpoint for " << entry.name << "\n";
    }
    return models::load_checkpoint(best).model;
}

}  // namespace

ResultTable run_benchmark(const BenchConfig& cfg_in) {
    BenchConfig cfg = cfg_in;
    cfg.resolve();

    struct Condition {
        std::string name;
        data::DatasetPtr dataset;
    };
    std::vector<Condition> conditions;
    auto clean = data::build_dataset(cfg.eval_dataset);
    conditions.push_back({"clean", clean});
    for (const auto& p : cfg.perturbations) {
        conditions.push_back({data::to_string(p.kind), data::perturbed_view(clean, p)});
    }

    ResultTable table;
    for (const auto& entry : cfg.suite) {
        try {
            auto model = obtain_model(cfg, entry);
            EvalOptions opts;
            opts.batch_size = cfg.eval_batch_size;
            opts.device = cfg.train.device;
            metrics::MetricReport computational;
            computational.params_m =
                static_cast<double>(metrics::count_params(*model)) / 1e6;
            computational.flops_g = static_cast<double>(metrics::model_flops(*model)) / 1e9;
            double fps = 0.0;
            if (cfg.measure_fps) {
                auto fps_opts = cfg.fps;
                fps_opts.device = cfg.train.device;
                fps = metrics::measure_fps(*model, fps_opts).fps;
            }
            for (const auto& condition : conditions) {
                std::cout << "[bench] evaluating " << entry.name << " on " << condition.name
                          << "\n";
                opts.computational = false;
                BenchRow row;
                row.model = entry.name;
                row.condition = condition.name;
                row.report = evaluate_model(*model, *condition.dataset, opts);
                row.report.params_m = computational.params_m;
                row.report.flops_g = computational.flops_g;
                row.report.fps = fps;
                row.report.device = cfg.train.device;
                table.rows.push_back(std::move(row));
            }
            if (cfg.sample_strips > 0) {
                write_strips(*model, *clean, cfg.sample_strips,
                             std::filesystem::path(cfg.out_dir) / "strips", entry.name);
            }
        } catch (const std::exception& e) {
            BenchRow row;
            row.model = entry.name;
            row.condition = "-";
            row.status = std::string("failed: ") + e.what();
            table.rows.push_back(std::move(row));
        }
    }

    write_report(table, cfg.out_dir);
    return table;
}

}  // namespace ministl::harness

#include "ministl/harness/train.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include "ministl/harness/evaluate.hpp"
#include "ministl/models/checkpoint.hpp"

namespace ministl::harness {

namespace {

constexpr std::uint64_t kShuffleStreamBase = 0x73687566;  // "shuf"

std::vector<std::int64_t> shuffled_indices(std::int64_t n, const SeedSpec& seed, int epoch) {
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed.master_seed, kShuffleStreamBase + static_cast<std::uint64_t>(epoch));
    for (std::int64_t i = n - 1; i > 0; --i) {
        const auto j = rng.uniform_int(0, i);
        std::swap(order[i], order[j]);
    }
    return order;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream os(path, std::ios::trunc);
    MINISTL_CHECK(os.good(), IoError, "cannot write " << path);
    os << j.dump(2) << "\n";
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
    nlohmann::json val = nlohmann::json::array();
    for (const auto& v : val_history) val.push_back(v.to_json());
    return {
        {"config_hash", config_hash},
        {"run_dir", run_dir},
        {"train_loss", train_loss},
        {"val_history", val},
        {"best_checkpoint", best_checkpoint},
        {"last_checkpoint", last_checkpoint},
        {"best_val_mse", std::isfinite(best_val_mse) ? nlohmann::json(best_val_mse)
                                                     : nlohmann::json("inf")},
        {"best_epoch", best_epoch},
        {"wall_seconds", wall_seconds},
        {"env", env},
    };
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
    RunRecord r;
    r.config_hash = j.value("config_hash", std::string{});
    r.run_dir = j.value("run_dir", std::string{});
    r.train_loss = j.value("train_loss", std::vector<double>{});
    if (j.contains("val_history")) {
        for (const auto& v : j["val_history"]) {
            r.val_history.push_back(metrics::MetricReport::from_json(v));
        }
    }
    r.best_checkpoint = j.value("best_checkpoint", std::string{});
    r.last_checkpoint = j.value("last_checkpoint", std::string{});
    if (j.contains("best_val_mse")) {
        r.best_val_mse = j["best_val_mse"].is_string()
                             ? std::numeric_limits<double>::infinity()
                             : j["best_val_mse"].get<double>();
    }
    r.best_epoch = j.value("best_epoch", -1);
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.env = j.value("env", nlohmann::json::object());
    return r;
}

RunRecord train_single(const TrainConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::string hash = config_hash(cfg);
    const std::filesystem::path run_dir = std::filesystem::path(cfg.out_dir) / hash;
    const auto ckpt_dir = run_dir / "checkpoints";
    std::filesystem::create_directories(ckpt_dir);
    std::filesystem::create_directories(run_dir / "strips");

    {
        std::ofstream os(run_dir / "config.yaml", std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot write " << run_dir / "config.yaml");
        os << json_to_yaml(cfg.to_json());
    }

    data::DatasetPtr dataset = data::build_dataset(cfg.dataset);
    if (cfg.perturbation) {
        dataset = data::perturbed_view(dataset, *cfg.perturbation);
    }
    const std::int64_t n_total = dataset->size();
    std::int64_t n_val = 0;
    if (cfg.epochs > 0) {
        n_val = std::min<std::int64_t>(
            n_total - 1,
            std::max<std::int64_t>(1, std::llround(n_total * cfg.val_fraction)));
        MINISTL_CHECK(n_total >= 2, ConfigError,
                      "training needs at least 2 sequences (got " << n_total
                                                                  << ") to carve validation");
    }
    const std::int64_t n_train = n_total - n_val;
    std::vector<std::int64_t> val_indices(n_val);
    std::iota(val_indices.begin(), val_indices.end(), n_train);

    ModelConfig model_cfg = cfg.model;
    auto model = build_model(cfg.model_name, model_cfg);
    nn::Adam<float> adam(model->parameters(), cfg.lr, cfg.beta1, cfg.beta2);

    RunRecord record;
    record.config_hash = hash;
    record.run_dir = run_dir.string();
    record.best_val_mse = std::numeric_limits<double>::infinity();
    record.env = environment_fingerprint();

    const auto best_path = ckpt_dir / "best.ckpt";
    const auto last_path = ckpt_dir / "last.ckpt";
    models::save_checkpoint(best_path, cfg.model_name, *model);
    models::save_checkpoint(last_path, cfg.model_name, *model);
    record.best_checkpoint = best_path.string();
    record.last_checkpoint = last_path.string();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        model->set_training(true);
        const auto order = shuffled_indices(n_train, cfg.seed, epoch);
        double loss_sum = 0.0;
        std::int64_t loss_batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::int64_t> chunk(order.begin() + start, order.begin() + end);
            auto pair = data::collate(*dataset, chunk);
            auto x = models::context_to_var<float>(pair.context);
            auto pred = model->forward(x);
            auto loss = nn::mse_loss(pred, pair.target.data);
            const double loss_value = loss.value()[0];
            MINISTL_CHECK(std::isfinite(loss_value), NumericsError,
                          "non-finite training loss " << loss_value << " at epoch " << epoch
                                                      << ", batch " << loss_batches
                                                      << " (lr=" << adam.lr << ")");
            adam.zero_grad();
            loss.backward();
            adam.step();
            loss_sum += loss_value;
            ++loss_batches;
        }
        record.train_loss.push_back(loss_batches > 0 ? loss_sum / loss_batches : 0.0);

        model->set_training(false);
        auto val = evaluate_quality(*model, *dataset, val_indices, cfg.batch_size);
        record.val_history.push_back(val);

        models::save_checkpoint(last_path, cfg.model_name, *model);
        if (val.mse_paper < record.best_val_mse) {
            record.best_val_mse = val.mse_paper;
            record.best_epoch = epoch;
            models::save_checkpoint(best_path, cfg.model_name, *model);
        }
        write_json_file(run_dir / "history.json", record.to_json());
        std::cout << "[train] epoch " << epoch << "/" << cfg.epochs << " loss "
                  << record.train_loss.back() << " val_mse " << val.mse_paper << "\n";
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_json_file(run_dir / "history.json", record.to_json());
    return record;
}

RunRecord train(const TrainConfig& cfg_in) {
    TrainConfig cfg = cfg_in;
    cfg.resolve();
    if (!cfg.grid_search) {
        return train_single(cfg);
    }

    // Sweep the lr x drop-path grid and report the best run by validation.
    const std::string sweep_hash = config_hash(cfg);
    RunRecord best;
    best.best_val_mse = std::numeric_limits<double>::infinity();
    nlohmann::json summary = nlohmann::json::array();
    bool have_best = false;
    for (double lr : kLrGrid) {
        for (double dp : kDropPathGrid) {
            TrainConfig sub = cfg;
            sub.grid_search = false;
            sub.lr = lr;
            sub.model.drop_path = dp;
            auto rec = train_single(sub);
            summary.push_back({{"lr", lr},
                               {"drop_path", dp},
                               {"config_hash", rec.config_hash},
                               {"best_val_mse", std::isfinite(rec.best_val_mse)
                                                    ? nlohmann::json(rec.best_val_mse)
                                                    : nlohmann::json("inf")}});
            if (!have_best || rec.best_val_mse < best.best_val_mse) {
                best = rec;
                have_best = true;
            }
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_json_file(std::filesystem::path(cfg.out_dir) / ("grid_" + sweep_hash + ".json"),
                    {{"sweep_config_hash", sweep_hash},
                     {"runs", summary},
                     {"best_config_hash", best.config_hash},
                     {"best_val_mse", std::isfinite(best.best_val_mse)
                                          ? nlohmann::json(best.best_val_mse)
                                          : nlohmann::json("inf")}});
    return best;
}

}  // namespace ministl::harness

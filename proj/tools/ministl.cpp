#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <iostream>

#include "ministl/data/container.hpp"
#include "ministl/harness/bench.hpp"
#include "ministl/harness/evaluate.hpp"
#include "ministl/harness/train.hpp"
#include "ministl/models/checkpoint.hpp"
#include "ministl/registry.hpp"

namespace {

using namespace ministl;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
    std::string config;
    bool dry_run = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::string device;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_epochs = false) {
    cmd->add_option("--config", flags.config, "YAML config file")->required();
    cmd->add_flag("--dry-run", flags.dry_run,
                  "Validate the config, print the resolved plan, write nothing");
    cmd->add_option("--seed", flags.seed, "Override the master seed");
    cmd->add_option("--device", flags.device, "Override the device tag");
    cmd->add_option("--out", flags.out, "Override the output path/directory");
    if (with_epochs) {
        cmd->add_option("--epochs", flags.epochs, "Override the epoch count");
    }
}

void print_plan(const char* what, const nlohmann::json& resolved) {
    std::cout << "resolved " << what << " plan:\n" << resolved.dump(2) << "\n";
}

int cmd_gen_data(const CommonFlags& flags) {
    auto cfg = harness::GenDataConfig::from_yaml_file(flags.config);
    if (flags.seed) cfg.dataset.seed.master_seed = *flags.seed;
    if (!flags.out.empty()) cfg.out = flags.out;
    cfg.resolve();
    if (flags.dry_run) {
        print_plan("gen-data", cfg.to_json());
        return kExitOk;
    }
    auto dataset = data::build_dataset(cfg.dataset);
    data::save_dataset(*dataset, cfg.out);
    std::cout << "wrote " << cfg.out << " (" << dataset->size() << " sequences) and "
              << cfg.out << ".json\n";
    return kExitOk;
}

int cmd_train(const CommonFlags& flags) {
    auto cfg = harness::TrainConfig::from_yaml_file(flags.config);
    if (flags.seed) cfg.seed.master_seed = *flags.seed;
    if (flags.epochs) cfg.epochs = *flags.epochs;
    if (!flags.device.empty()) cfg.device = flags.device;
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    cfg.resolve();
    if (flags.dry_run) {
        auto plan = cfg.to_json();
        plan["config_hash"] = harness::config_hash(cfg);
        print_plan("train", plan);
        return kExitOk;
    }
    auto record = harness::train(cfg);
    std::cout << "run dir: " << record.run_dir << "\n"
              << "best checkpoint: " << record.best_checkpoint << "\n";
    if (record.best_epoch > 0) {
        std::cout << "best val mse: " << record.best_val_mse << " (epoch "
                  << record.best_epoch << ")\n";
    }
    return kExitOk;
}

int cmd_eval(const CommonFlags& flags) {
    auto cfg = harness::EvalConfig::from_yaml_file(flags.config);
    if (flags.seed) cfg.dataset.seed.master_seed = *flags.seed;
    if (!flags.device.empty()) cfg.device = flags.device;
    if (!flags.out.empty()) cfg.out = flags.out;
    cfg.resolve();
    if (flags.dry_run) {
        print_plan("eval", cfg.to_json());
        return kExitOk;
    }
    auto report = harness::run_eval(cfg);
    std::cout << report.to_json().dump(2) << "\n";
    return kExitOk;
}

int cmd_bench(const CommonFlags& flags) {
    auto cfg = harness::BenchConfig::from_yaml_file(flags.config);
    if (flags.seed) cfg.train.seed.master_seed = *flags.seed;
    if (flags.epochs) cfg.train.epochs = *flags.epochs;
    if (!flags.device.empty()) cfg.train.device = flags.device;
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    cfg.resolve();
    if (flags.dry_run) {
        print_plan("bench", cfg.to_json());
        return kExitOk;
    }
    auto table = harness::run_benchmark(cfg);
    std::cout << "wrote report files under " << cfg.out_dir << "\n";
    for (const auto& row : table.rows) {
        std::cout << row.model << " / " << row.condition << " : " << row.status << "\n";
    }
    return table.any_failed() ? kExitRuntime : kExitOk;
}

int cmd_report(const CommonFlags& flags) {
    auto j = harness::load_yaml_file(flags.config);
    MINISTL_CHECK(j.contains("table"), ConfigError,
                  "report config needs 'table' (path to a report.json)");
    const std::string table_path = j["table"].get<std::string>();
    std::string out_dir = j.value("out_dir", std::string("report_out"));
    if (!flags.out.empty()) out_dir = flags.out;

    if (flags.dry_run) {
        print_plan("report", {{"table", table_path}, {"out_dir", out_dir}});
        return kExitOk;
    }
    std::ifstream is(table_path);
    MINISTL_CHECK(is.good(), IoError, "cannot open table " << table_path);
    nlohmann::json table_json;
    is >> table_json;
    auto table = harness::ResultTable::from_json(table_json);
    harness::write_report(table, out_dir);

    // Optional qualitative strips when a checkpoint and dataset are given.
    if (j.contains("checkpoint") && j.contains("dataset")) {
        auto loaded = models::load_checkpoint(j["checkpoint"].get<std::string>());
        auto spec = data::DatasetSpec::from_json(j["dataset"]);
        harness::resolve_dataset_paths(spec);
        auto dataset = data::build_dataset(spec);
        harness::write_strips(*loaded.model, *dataset, j.value("samples", 2),
                              std::filesystem::path(out_dir) / "strips",
                              loaded.header.model_name);
    }
    std::cout << "wrote report files under " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ministl: compact spatio-temporal predictive learning toolkit"};
    app.require_subcommand(1);

    CommonFlags gen_flags, train_flags, eval_flags, bench_flags, report_flags;
    auto* gen = app.add_subcommand("gen-data", "Materialize a synthetic dataset split");
    add_common(gen, gen_flags);
    auto* train = app.add_subcommand("train", "Train a model from a config");
    add_common(train, train_flags, /*with_epochs=*/true);
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    add_common(eval, eval_flags);
    auto* bench = app.add_subcommand("bench", "Run a model suite and emit a results table");
    add_common(bench, bench_flags, /*with_epochs=*/true);
    auto* report = app.add_subcommand("report", "Re-emit report files from a stored table");
    add_common(report, report_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_flags);
        if (train->parsed()) return cmd_train(train_flags);
        if (eval->parsed()) return cmd_eval(eval_flags);
        if (bench->parsed()) return cmd_bench(bench_flags);
        if (report->parsed()) return cmd_report(report_flags);
    } catch (const ministl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ministl::LookupError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}

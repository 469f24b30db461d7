#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ministl/data/perturb.hpp"
#include "ministl/metrics/efficiency.hpp"
#include "ministl/model_config.hpp"

namespace ministl::harness {

/// YAML file -> JSON tree (maps, sequences, typed scalars). All config
/// parsing funnels through the JSON readers, so YAML and JSON configs
/// behave identically.
nlohmann::json load_yaml_file(const std::filesystem::path& path);
nlohmann::json yaml_string_to_json(const std::string& text);
std::string json_to_yaml(const nlohmann::json& j);

/// Dataset root for relative sprite/background paths and data outputs;
/// MINISTL_DATA_ROOT overrides the current directory.
std::filesystem::path data_root();

/// Applies the data root to relative source paths inside a DatasetSpec.
void resolve_dataset_paths(data::DatasetSpec& spec);

extern const std::vector<double> kLrGrid;        // {1e-2, 5e-3, 1e-3, 5e-4, 1e-4}
extern const std::vector<double> kDropPathGrid;  // {0.0, 0.1, 0.2}

struct TrainConfig {
    std::string model_name = "metavp-gated_attention";
    ModelConfig model;
    data::DatasetSpec dataset;  // train split
    std::optional<data::PerturbationSpec> perturbation;

    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int epochs = -1;  // resolved: 200 for 64x64 MMNIST-family geometry, 50 otherwise
    int batch_size = 16;
    SeedSpec seed{};
    std::string device = "cpu";
    bool grid_search = false;
    double val_fraction = 0.05;
    std::string out_dir = "runs";

    /// Fills derived fields (model frame/T from the dataset, init seed,
    /// epoch default, env overrides) and checks consistency.
    void resolve();
    void validate() const;

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig from_yaml_file(const std::filesystem::path& path);
};

/// Hash of the fully resolved config; any field change changes it.
std::string config_hash(const TrainConfig& cfg);

struct EvalConfig {
    std::string checkpoint;
    data::DatasetSpec dataset;  // test split
    std::optional<data::PerturbationSpec> perturbation;
    int batch_size = 16;
    bool measure_fps = false;
    metrics::FpsOptions fps{};
    std::string device = "cpu";
    std::string out;  // optional report JSON path

    void resolve();
    nlohmann::json to_json() const;
    static EvalConfig from_json(const nlohmann::json& j);
    static EvalConfig from_yaml_file(const std::filesystem::path& path);
};

struct BenchEntry {
    std::string name;
    ModelConfig model;
    std::string checkpoint;  // when set, skip training and load
};

struct BenchConfig {
    std::vector<BenchEntry> suite;
    TrainConfig train;  // shared training settings; per-entry model plugged in
    data::DatasetSpec eval_dataset;
    std::vector<data::PerturbationSpec> perturbations;
    int eval_batch_size = 16;
    bool measure_fps = true;
    metrics::FpsOptions fps{};
    int sample_strips = 2;
    std::string out_dir = "bench_out";

    void resolve();
    nlohmann::json to_json() const;
    static BenchConfig from_json(const nlohmann::json& j);
    static BenchConfig from_yaml_file(const std::filesystem::path& path);
};

struct GenDataConfig {
    data::DatasetSpec dataset;
    std::string out;  // container path (.npz)

    void resolve();
    nlohmann::json to_json() const;
    static GenDataConfig from_json(const nlohmann::json& j);
    static GenDataConfig from_yaml_file(const std::filesystem::path& path);
};

/// Build/runtime fingerprint recorded into run records.
nlohmann::json environment_fingerprint();

}  // namespace ministl::harness

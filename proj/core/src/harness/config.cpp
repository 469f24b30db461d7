#include "ministl/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>

#include "ministl/digest.hpp"

namespace ministl::harness {

namespace {

nlohmann::json yaml_node_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            const std::string& raw = node.Scalar();
            // Quoted scalars stay strings; plain scalars get typed.
            if (node.Tag() != "?") return raw;
            if (raw == "true" || raw == "True") return true;
            if (raw == "false" || raw == "False") return false;
            if (raw == "null" || raw == "~" || raw.empty()) return nullptr;
            try {
                std::size_t used = 0;
                const long long as_int = std::stoll(raw, &used);
                if (used == raw.size()) return as_int;
            } catch (...) {
            }
            try {
                std::size_t used = 0;
                const double as_double = std::stod(raw, &used);
                if (used == raw.size()) return as_double;
            } catch (...) {
            }
            return raw;
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& item : node) arr.push_back(yaml_node_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            nlohmann::json obj = nlohmann::json::object();
            for (const auto& kv : node) {
                obj[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
            }
            return obj;
        }
        case YAML::NodeType::Undefined:
            break;
    }
    return nullptr;
}

void emit_yaml(YAML::Emitter& out, const nlohmann::json& j) {
    if (j.is_object()) {
        out << YAML::BeginMap;
        for (const auto& [k, v] : j.items()) {
            out << YAML::Key << k << YAML::Value;
            emit_yaml(out, v);
        }
        out << YAML::EndMap;
    } else if (j.is_array()) {
        out << YAML::Flow << YAML::BeginSeq;
        for (const auto& v : j) emit_yaml(out, v);
        out << YAML::EndSeq;
    } else if (j.is_string()) {
        out << j.get<std::string>();
    } else if (j.is_boolean()) {
        out << j.get<bool>();
    } else if (j.is_number_integer()) {
        out << j.get<long long>();
    } else if (j.is_number_unsigned()) {
        out << j.get<unsigned long long>();
    } else if (j.is_number_float()) {
        out << j.get<double>();
    } else {
        out << YAML::Null;
    }
}

SeedSpec seed_from_json(const nlohmann::json& j) {
    SeedSpec s;
    if (j.is_number()) {
        s.master_seed = j.get<std::uint64_t>();
    } else if (j.is_object()) {
        s.master_seed = j.value("master", 0ull);
        s.stream_id = j.value("stream", 0ull);
    }
    return s;
}

nlohmann::json seed_to_json(const SeedSpec& s) {
    return {{"master", s.master_seed}, {"stream", s.stream_id}};
}

bool is_mmnist_like(const data::DatasetSpec& d) {
    return d.frame.height == 64 && d.frame.width == 64;
}

}  // namespace

nlohmann::json load_yaml_file(const std::filesystem::path& path) {
    MINISTL_CHECK(std::filesystem::exists(path), IoError, "config file not found: " << path);
    try {
        return yaml_node_to_json(YAML::LoadFile(path.string()));
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

nlohmann::json yaml_string_to_json(const std::string& text) {
    try {
        return yaml_node_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("cannot parse yaml: ") + e.what());
    }
}

std::string json_to_yaml(const nlohmann::json& j) {
    YAML::Emitter out;
    emit_yaml(out, j);
    return std::string(out.c_str()) + "\n";
}

std::filesystem::path data_root() {
    if (const char* env = std::getenv("MINISTL_DATA_ROOT"); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

void resolve_dataset_paths(data::DatasetSpec& spec) {
    const auto root = data_root();
    const auto fix = [&root](std::string& p) {
        if (!p.empty() && !std::filesystem::path(p).is_absolute()) {
            p = (root / p).string();
        }
    };
    fix(spec.sprites.path);
    fix(spec.background.path);
}

const std::vector<double> kLrGrid = {1e-2, 5e-3, 1e-3, 5e-4, 1e-4};
const std::vector<double> kDropPathGrid = {0.0, 0.1, 0.2};

// ---------------------------------------------------------------------------
// TrainConfig
// ---------------------------------------------------------------------------

void TrainConfig::resolve() {
    dataset.split = data::Split::train;
    resolve_dataset_paths(dataset);
    model.frame = dataset.frame;
    model.T = dataset.T;
    model.T_prime = dataset.T_prime;
    model.init_seed = seed.master_seed;
    if (epochs < 0) {
        epochs = is_mmnist_like(dataset) ? 200 : 50;
    }
    if (const char* env = std::getenv("MINISTL_DEVICE"); env != nullptr && *env != '\0') {
        device = env;
    }
    validate();
}

void TrainConfig::validate() const {
    model.validate();
    dataset.validate();
    if (perturbation) perturbation->validate();
    MINISTL_CHECK(lr > 0, ConfigError, "lr must be positive");
    MINISTL_CHECK(epochs >= 0, ConfigError, "epochs must be >= 0");
    MINISTL_CHECK(batch_size >= 1, ConfigError, "batch_size must be >= 1");
    MINISTL_CHECK(val_fraction >= 0.0 && val_fraction < 1.0, ConfigError,
                  "val_fraction must lie in [0, 1)");
    MINISTL_CHECK(device == "cpu", ConfigError,
                  "unsupported device '" << device << "' (this build runs on cpu)");
    if (grid_search) {
        const auto in_grid = [](double v, const std::vector<double>& grid) {
            for (double g : grid) {
                if (std::abs(v - g) <= 1e-12 * std::max(1.0, std::abs(g))) return true;
            }
            return false;
        };
        MINISTL_CHECK(in_grid(lr, kLrGrid), ConfigError,
                      "grid mode: lr " << lr << " is not in the sweep grid");
        MINISTL_CHECK(in_grid(model.drop_path, kDropPathGrid), ConfigError,
                      "grid mode: drop_path " << model.drop_path
                                              << " is not in the sweep grid");
    }
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j{
        {"model_name", model_name},
        {"model", model.to_json()},
        {"dataset", dataset.to_json()},
        {"optimizer",
         {{"kind", "adam"}, {"lr", lr}, {"beta1", beta1}, {"beta2", beta2}}},
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"seed", seed_to_json(seed)},
        {"device", device},
        {"grid_search", grid_search},
        {"val_fraction", val_fraction},
        {"out_dir", out_dir},
    };
    if (perturbation) j["perturbation"] = perturbation->to_json();
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.model_name = j.value("model_name", c.model_name);
    if (j.contains("model")) c.model = ModelConfig::from_json(j["model"]);
    MINISTL_CHECK(j.contains("dataset"), ConfigError, "train config needs a 'dataset' block");
    c.dataset = data::DatasetSpec::from_json(j["dataset"]);
    if (j.contains("perturbation") && !j["perturbation"].is_null()) {
        c.perturbation = data::PerturbationSpec::from_json(j["perturbation"]);
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        if (o.contains("kind")) {
            MINISTL_CHECK(o["kind"] == "adam", ConfigError,
                          "optimizer.kind must be 'adam', got " << o["kind"]);
        }
        c.lr = o.value("lr", c.lr);
        c.beta1 = o.value("beta1", c.beta1);
        c.beta2 = o.value("beta2", c.beta2);
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("seed")) c.seed = seed_from_json(j["seed"]);
    c.device = j.value("device", c.device);
    c.grid_search = j.value("grid_search", c.grid_search);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

TrainConfig TrainConfig::from_yaml_file(const std::filesystem::path& path) {
    return from_json(load_yaml_file(path));
}

std::string config_hash(const TrainConfig& cfg) {
    return sha256_hex(cfg.to_json().dump());
}

// ---------------------------------------------------------------------------
// EvalConfig
// ---------------------------------------------------------------------------

void EvalConfig::resolve() {
    resolve_dataset_paths(dataset);
    if (const char* env = std::getenv("MINISTL_DEVICE"); env != nullptr && *env != '\0') {
        device = env;
    }
    MINISTL_CHECK(device == "cpu", ConfigError,
                  "unsupported device '" << device << "' (this build runs on cpu)");
    MINISTL_CHECK(!checkpoint.empty(), ConfigError, "eval config needs a 'checkpoint' path");
    dataset.validate();
    if (perturbation) perturbation->validate();
    fps.device = device;
}

nlohmann::json EvalConfig::to_json() const {
    nlohmann::json j{
        {"checkpoint", checkpoint},
        {"dataset", dataset.to_json()},
        {"batch_size", batch_size},
        {"measure_fps", measure_fps},
        {"fps", {{"batch", fps.batch}, {"warmup", fps.warmup}, {"trials", fps.trials}}},
        {"device", device},
        {"out", out},
    };
    if (perturbation) j["perturbation"] = perturbation->to_json();
    return j;
}

EvalConfig EvalConfig::from_json(const nlohmann::json& j) {
    EvalConfig c;
    c.checkpoint = j.value("checkpoint", std::string{});
    MINISTL_CHECK(j.contains("dataset"), ConfigError, "eval config needs a 'dataset' block");
    c.dataset = data::DatasetSpec::from_json(j["dataset"]);
    if (j.contains("perturbation") && !j["perturbation"].is_null()) {
        c.perturbation = data::PerturbationSpec::from_json(j["perturbation"]);
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.measure_fps = j.value("measure_fps", c.measure_fps);
    if (j.contains("fps")) {
        const auto& f = j["fps"];
        c.fps.batch = f.value("batch", c.fps.batch);
        c.fps.warmup = f.value("warmup", c.fps.warmup);
        c.fps.trials = f.value("trials", c.fps.trials);
    }
    c.device = j.value("device", c.device);
    c.out = j.value("out", c.out);
    return c;
}

EvalConfig EvalConfig::from_yaml_file(const std::filesystem::path& path) {
    return from_json(load_yaml_file(path));
}

// ---------------------------------------------------------------------------
// BenchConfig
// ---------------------------------------------------------------------------

void BenchConfig::resolve() {
    train.resolve();
    eval_dataset.split = data::Split::test;
    resolve_dataset_paths(eval_dataset);
    eval_dataset.validate();
    for (auto& p : perturbations) p.validate();
    MINISTL_CHECK(eval_batch_size >= 1, ConfigError, "eval_batch_size must be >= 1");
    MINISTL_CHECK(sample_strips >= 0, ConfigError, "sample_strips must be >= 0");
    fps.device = train.device;
    for (auto& entry : suite) {
        MINISTL_CHECK(!entry.name.empty(), ConfigError, "bench entry without a model name");
        entry.model.frame = eval_dataset.frame;
        entry.model.T = eval_dataset.T;
        entry.model.T_prime = eval_dataset.T_prime;
        entry.model.init_seed = train.seed.master_seed;
        entry.model.validate();
    }
}

nlohmann::json BenchConfig::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : suite) {
        entries.push_back({{"name", e.name},
                           {"model", e.model.to_json()},
                           {"checkpoint", e.checkpoint}});
    }
    nlohmann::json perts = nlohmann::json::array();
    for (const auto& p : perturbations) perts.push_back(p.to_json());
    return {
        {"suite", entries},
        {"train", train.to_json()},
        {"eval_dataset", eval_dataset.to_json()},
        {"perturbations", perts},
        {"eval_batch_size", eval_batch_size},
        {"measure_fps", measure_fps},
        {"fps", {{"batch", fps.batch}, {"warmup", fps.warmup}, {"trials", fps.trials}}},
        {"sample_strips", sample_strips},
        {"out_dir", out_dir},
    };
}

BenchConfig BenchConfig::from_json(const nlohmann::json& j) {
    BenchConfig c;
    if (j.contains("suite")) {
        for (const auto& e : j["suite"]) {
            BenchEntry entry;
            entry.name = e.at("name").get<std::string>();
            if (e.contains("model")) entry.model = ModelConfig::from_json(e["model"]);
            entry.checkpoint = e.value("checkpoint", std::string{});
            c.suite.push_back(std::move(entry));
        }
    }
    MINISTL_CHECK(j.contains("train"), ConfigError, "bench config needs a 'train' block");
    c.train = TrainConfig::from_json(j["train"]);
    if (j.contains("eval_dataset")) {
        c.eval_dataset = data::DatasetSpec::from_json(j["eval_dataset"]);
    } else {
        c.eval_dataset = c.train.dataset;
        c.eval_dataset.split = data::Split::test;
    }
    if (j.contains("perturbations")) {
        for (const auto& p : j["perturbations"]) {
            c.perturbations.push_back(data::PerturbationSpec::from_json(p));
        }
    }
    c.eval_batch_size = j.value("eval_batch_size", c.eval_batch_size);
    c.measure_fps = j.value("measure_fps", c.measure_fps);
    if (j.contains("fps")) {
        const auto& f = j["fps"];
        c.fps.batch = f.value("batch", c.fps.batch);
        c.fps.warmup = f.value("warmup", c.fps.warmup);
        c.fps.trials = f.value("trials", c.fps.trials);
    }
    c.sample_strips = j.value("sample_strips", c.sample_strips);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

BenchConfig BenchConfig::from_yaml_file(const std::filesystem::path& path) {
    return from_json(load_yaml_file(path));
}

// ---------------------------------------------------------------------------
// GenDataConfig
// ---------------------------------------------------------------------------

void GenDataConfig::resolve() {
    resolve_dataset_paths(dataset);
    dataset.validate();
    MINISTL_CHECK(!out.empty(), ConfigError, "gen-data config needs an 'out' path");
    if (!std::filesystem::path(out).is_absolute()) {
        out = (data_root() / out).string();
    }
}

nlohmann::json GenDataConfig::to_json() const {
    return {{"dataset", dataset.to_json()}, {"out", out}};
}

GenDataConfig GenDataConfig::from_json(const nlohmann::json& j) {
    GenDataConfig c;
    MINISTL_CHECK(j.contains("dataset"), ConfigError, "gen-data config needs a 'dataset' block");
    c.dataset = data::DatasetSpec::from_json(j["dataset"]);
    c.out = j.value("out", std::string{});
    return c;
}

GenDataConfig GenDataConfig::from_yaml_file(const std::filesystem::path& path) {
    return from_json(load_yaml_file(path));
}

nlohmann::json environment_fingerprint() {
    return {
        {"compiler", __VERSION__},
        {"arch", "x86_64"},
        {"os", "linux"},
        {"threads", 1},
        {"scalar", "float32"},
    };
}

}  // namespace ministl::harness

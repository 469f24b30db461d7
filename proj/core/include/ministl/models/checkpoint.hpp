#pragma once

#include <filesystem>
#include <string>

#include "ministl/registry.hpp"

namespace ministl::models {

struct CheckpointHeader {
    int format_version = 1;
    std::string model_name;
    ModelConfig config;
};

/// Writes the model name, its config (JSON header) and the flat parameter
/// map. The file is written next to the target and renamed into place, so a
/// crash mid-write never clobbers an existing checkpoint.
void save_checkpoint(const std::filesystem::path& path, const std::string& model_name,
                     Model<float>& model);

struct LoadedCheckpoint {
    CheckpointHeader header;
    ModelPtr model;
};

/// Rebuilds the model through the registry and restores every parameter.
/// Missing or extra parameter names are errors.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

}  // namespace ministl::models

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ministl/models/model.hpp"

namespace ministl {

using ModelPtr = std::unique_ptr<models::Model<float>>;

/// A buildable model under its public benchmark name. Categories follow the
/// recurrent-based / recurrent-free taxonomy.
struct RegistryEntry {
    std::string name;
    ModelCategory category = ModelCategory::recurrent_free;
    std::function<ModelPtr(const ModelConfig&)> builder;
};

/// Adds an entry; the name must be new. The built-in entries (convlstm,
/// st_lstm, the four metavp mixers, copy_last) are registered on first use.
void register_model(RegistryEntry entry);

ModelPtr build_model(const std::string& name, const ModelConfig& config);

const RegistryEntry& registry_entry(const std::string& name);

/// Sorted names.
std::vector<std::string> registered_model_names();

}  // namespace ministl

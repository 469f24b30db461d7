#include "ministl/registry.hpp"

#include <map>
#include <mutex>

#include "ministl/models/baselines.hpp"
#include "ministl/models/metavp.hpp"
#include "ministl/models/recurrent.hpp"

namespace ministl {

namespace {

std::map<std::string, RegistryEntry>& registry_map() {
    static std::map<std::string, RegistryEntry> entries;
    return entries;
}

ModelPtr build_recurrent(ModelKind kind, const ModelConfig& config) {
    MINISTL_CHECK(config.kind == kind, ConfigError,
                  "registry entry expects kind=" << to_string(kind) << ", config says "
                                                 << to_string(config.kind));
    return std::make_unique<models::RecurrentModel<float>>(config);
}

ModelPtr build_metavp(MixerKind mixer, ModelConfig config) {
    MINISTL_CHECK(config.kind == ModelKind::metavp, ConfigError,
                  "registry entry expects kind=metavp, config says " << to_string(config.kind));
    if (!config.mixer.has_value()) {
        config.mixer = mixer;
    }
    MINISTL_CHECK(*config.mixer == mixer, ConfigError,
                  "config mixer " << to_string(*config.mixer)
                                  << " conflicts with registry entry mixer "
                                  << to_string(mixer));
    return std::make_unique<models::MetaVP<float>>(config);
}

void register_unlocked(RegistryEntry entry) {
    MINISTL_CHECK(!entry.name.empty(), ConfigError, "registry entry needs a name");
    MINISTL_CHECK(entry.builder, ConfigError, "registry entry needs a builder");
    auto [it, inserted] = registry_map().emplace(entry.name, entry);
    (void)it;
    MINISTL_CHECK(inserted, RegistrationError,
                  "model name already registered: " << entry.name);
}

void ensure_builtins() {
    static std::once_flag once;
    std::call_once(once, [] {
        register_unlocked({"convlstm", ModelCategory::recurrent_based,
                           [](const ModelConfig& c) { return build_recurrent(ModelKind::convlstm, c); }});
        register_unlocked({"st_lstm", ModelCategory::recurrent_based,
                           [](const ModelConfig& c) { return build_recurrent(ModelKind::st_lstm, c); }});
        for (MixerKind mixer : {MixerKind::attention, MixerKind::mlp_mixer, MixerKind::conv_next,
                                MixerKind::gated_attention}) {
            register_unlocked({std::string("metavp-") + to_string(mixer),
                               ModelCategory::recurrent_free,
                               [mixer](const ModelConfig& c) { return build_metavp(mixer, c); }});
        }
        register_unlocked({"copy_last", ModelCategory::recurrent_free, [](const ModelConfig& c) {
                               return std::make_unique<models::CopyLastModel<float>>(c);
                           }});
    });
}

}  // namespace

void register_model(RegistryEntry entry) {
    ensure_builtins();
    register_unlocked(std::move(entry));
}

ModelPtr build_model(const std::string& name, const ModelConfig& config) {
    return registry_entry(name).builder(config);
}

const RegistryEntry& registry_entry(const std::string& name) {
    ensure_builtins();
    auto it = registry_map().find(name);
    MINISTL_CHECK(it != registry_map().end(), LookupError, "unknown model name: " << name);
    return it->second;
}

std::vector<std::string> registered_model_names() {
    ensure_builtins();
    std::vector<std::string> names;
    names.reserve(registry_map().size());
    for (const auto& [name, entry] : registry_map()) names.push_back(name);
    return names;
}

}  // namespace ministl

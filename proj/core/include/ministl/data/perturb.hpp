#pragma once

#include <nlohmann/json_fwd.hpp>

#include "ministl/data/dataset.hpp"

namespace ministl::data {

/// The three robustness setups: random missing context frames, Gaussian
/// velocity noise (re-rendered dynamics), and black-patch occlusion of the
/// context.
struct PerturbationSpec {
    enum class Kind { missing, dynamic, perceptual };
    Kind kind = Kind::missing;
    double p_missing = 0.2;
    double sigma_v = 0.5;  // pixels/frame
    int patch_size = 24;
    SeedSpec seed{};

    void validate() const;
    nlohmann::json to_json() const;
    static PerturbationSpec from_json(const nlohmann::json& j);
};

const char* to_string(PerturbationSpec::Kind k);
PerturbationSpec::Kind perturbation_kind_from_string(const std::string& s);

/// Applies the perturbation to one (batch-1) pair, drawing from the spec's
/// stream. missing and perceptual touch only context frames; dynamic
/// re-renders the whole sequence from its provenance and fails with
/// ProvenanceError when the pair carries none.
SequencePair perturb(const SequencePair& pair, const PerturbationSpec& spec);

/// Lazy per-index view: pair i is perturbed with stream seed.stream_id + i.
DatasetPtr perturbed_view(DatasetPtr inner, const PerturbationSpec& spec);

}  // namespace ministl::data

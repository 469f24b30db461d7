#pragma once

#include <memory>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "ministl/data/render.hpp"
#include "ministl/data/sprites.hpp"

namespace ministl::data {

enum class Variant { mnist, fashion_mnist, mnist_cifar };
enum class Split { train, test };

const char* to_string(Variant v);
const char* to_string(Split s);
Variant variant_from_string(const std::string& s);
Split split_from_string(const std::string& s);

/// Full recipe of one synthetic split. Content is a pure function of this
/// struct: sequence i always comes from the sub-stream
/// (seed.master_seed, seed.stream_id + split_offset + i).
struct DatasetSpec {
    Variant variant = Variant::mnist;
    Split split = Split::train;
    std::int64_t count = 10000;
    FrameSpec frame{1, 64, 64};
    int T = 10;
    int T_prime = 10;
    int num_objects = 2;
    double speed_min = 2.0;
    double speed_max = 5.0;
    SeedSpec seed{};
    SpriteSourceSpec sprites{};
    BackgroundSourceSpec background{};

    void validate() const;
    nlohmann::json to_json() const;
    static DatasetSpec from_json(const nlohmann::json& j);

    /// Canonical defaults for a variant: 64x64, T = T' = 10, two objects,
    /// 10,000 sequences, 1 channel (3 with CIFAR background).
    static DatasetSpec defaults(Variant variant, Split split);

    std::uint64_t stream_offset() const;
};

/// What produced a generated pair; enough to re-render it (the dynamic
/// perturbation re-simulates trajectories against the same bank).
struct SequenceProvenance {
    std::vector<TrajectorySpec> trajectories;
    int background_id = -1;
    std::shared_ptr<const SpriteBank> bank;
    FrameSpec frame;
    int T = 0;
    int T_prime = 0;
};

/// Index-addressable collection of context/target pairs (batch size 1 per
/// pair). Implementations are immutable and safe to share across threads.
class Dataset {
public:
    virtual ~Dataset() = default;
    virtual std::int64_t size() const = 0;
    virtual SequencePair pair(std::int64_t index) const = 0;
    virtual FrameSpec frame() const = 0;
    virtual int context_len() const = 0;
    virtual int horizon() const = 0;
    virtual const std::optional<DatasetSpec>& spec() const = 0;
};

using DatasetPtr = std::shared_ptr<const Dataset>;

/// Deterministic lazily-generated dataset; loads the sprite bank itself.
DatasetPtr build_dataset(const DatasetSpec& spec);
DatasetPtr build_dataset(const DatasetSpec& spec, std::shared_ptr<const SpriteBank> bank);

/// Dataset view backed by in-memory u8 arrays (loaded containers).
DatasetPtr make_array_dataset(nn::Tensor<unsigned char> context,
                              nn::Tensor<unsigned char> target, FrameSpec frame,
                              std::optional<DatasetSpec> spec);

/// SHA-256 over the quantized (u8) content of every pair in index order.
std::string dataset_content_hash(const Dataset& dataset);

/// Stacks pairs into one (B, ...) SequencePair; provenance is dropped.
SequencePair collate(const Dataset& dataset, const std::vector<std::int64_t>& indices);

/// Quantization helpers shared by storage and hashing: u8 = round(v * 255).
nn::Tensor<unsigned char> quantize_u8(const nn::Tensor<float>& t);
nn::Tensor<float> dequantize_u8(const nn::Tensor<unsigned char>& t);

}  // namespace ministl::data

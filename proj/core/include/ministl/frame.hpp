#pragma once

#include <cstdint>
#include <memory>

#include "ministl/common.hpp"
#include "ministl/tensor.hpp"

namespace ministl {

namespace data {
struct SequenceProvenance;
}

/// Frame geometry. Pixel values are always normalized to [0, 1].
struct FrameSpec {
    int channels = 1;
    int height = 64;
    int width = 64;

    void validate() const {
        MINISTL_CHECK(channels >= 1 && height >= 1 && width >= 1, ConfigError,
                      "FrameSpec dimensions must be >= 1, got C=" << channels << " H=" << height
                                                                  << " W=" << width);
    }

    bool operator==(const FrameSpec&) const = default;
};

enum class BatchRole { context, target, prediction };

const char* to_string(BatchRole role);

/// A (B, T_len, C, H, W) stack of frames. Context and target batches hold
/// values in [0, 1]; predictions are finite but unclamped.
struct VideoBatch {
    nn::Tensor<float> data;
    FrameSpec spec;
    BatchRole role = BatchRole::context;

    VideoBatch() = default;
    VideoBatch(nn::Tensor<float> data_in, FrameSpec spec_in, BatchRole role_in);

    std::int64_t batch() const { return data.dim(0); }
    std::int64_t time_len() const { return data.dim(1); }

    static VideoBatch zeros(std::int64_t batch, std::int64_t time_len, FrameSpec spec,
                            BatchRole role);

    /// Shape consistency with the spec (cheap; called by the constructor).
    void check_shape() const;
    /// Full value contract: finiteness, and range for context/target roles.
    void validate() const;
};

/// Context/target pair. Pairs produced by the generator carry provenance
/// (sprites and trajectories) so perturbations that re-render can work.
struct SequencePair {
    VideoBatch context;
    VideoBatch target;
    std::shared_ptr<const data::SequenceProvenance> provenance;

    void validate() const;
};

}  // namespace ministl

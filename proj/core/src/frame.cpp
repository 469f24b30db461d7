#include "ministl/frame.hpp"

namespace ministl {

const char* to_string(BatchRole role) {
    switch (role) {
        case BatchRole::context: return "context";
        case BatchRole::target: return "target";
        case BatchRole::prediction: return "prediction";
    }
    return "?";
}

VideoBatch::VideoBatch(nn::Tensor<float> data_in, FrameSpec spec_in, BatchRole role_in)
    : data(std::move(data_in)), spec(spec_in), role(role_in) {
    check_shape();
}

VideoBatch VideoBatch::zeros(std::int64_t batch, std::int64_t time_len, FrameSpec spec,
                             BatchRole role) {
    return VideoBatch(
        nn::Tensor<float>::zeros({batch, time_len, spec.channels, spec.height, spec.width}), spec,
        role);
}

void VideoBatch::check_shape() const {
    spec.validate();
    MINISTL_CHECK(data.ndim() == 5, ShapeError,
                  "VideoBatch expects 5 axes (B,T,C,H,W), got " << nn::shape_str(data.shape()));
    MINISTL_CHECK(data.dim(2) == spec.channels && data.dim(3) == spec.height &&
                      data.dim(4) == spec.width,
                  ShapeError, "VideoBatch " << nn::shape_str(data.shape())
                                            << " does not match FrameSpec (C=" << spec.channels
                                            << ", H=" << spec.height << ", W=" << spec.width
                                            << ")");
}

void VideoBatch::validate() const {
    check_shape();
    const float* p = data.data();
    const bool bounded = role != BatchRole::prediction;
    for (std::int64_t i = 0; i < data.numel(); ++i) {
        MINISTL_CHECK(std::isfinite(p[i]), NumericsError,
                      to_string(role) << " batch has non-finite value at flat index " << i);
        if (bounded) {
            MINISTL_CHECK(p[i] >= 0.0f && p[i] <= 1.0f, NumericsError,
                          to_string(role) << " batch value " << p[i] << " outside [0,1] at "
                                          << i);
        }
    }
}

void SequencePair::validate() const {
    context.check_shape();
    target.check_shape();
    MINISTL_CHECK(context.spec == target.spec, ShapeError,
                  "SequencePair context/target FrameSpec mismatch");
    MINISTL_CHECK(context.role == BatchRole::context && target.role == BatchRole::target,
                  ShapeError, "SequencePair roles must be (context, target)");
    MINISTL_CHECK(context.time_len() >= 1 && target.time_len() >= 1, ShapeError,
                  "SequencePair needs T >= 1 and T' >= 1");
    MINISTL_CHECK(context.batch() == target.batch(), ShapeError,
                  "SequencePair batch mismatch");
}

}  // namespace ministl

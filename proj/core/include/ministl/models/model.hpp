#pragma once

#include "ministl/cost.hpp"
#include "ministl/frame.hpp"
#include "ministl/model_config.hpp"
#include "ministl/nn.hpp"

namespace ministl::models {

/// Common surface of all predictive models. forward() builds a graph mapping
/// a (B,T,C,H,W) context to a (B,T',C,H,W) prediction in one call; for the
/// recurrent family that call internally rolls the state chain.
///
/// Instances are not internally synchronized: one forward/backward at a time.
template <typename T>
class Model {
public:
    virtual ~Model() = default;

    virtual nn::Var<T> forward(const nn::Var<T>& context) = 0;
    virtual nn::ParamMap<T> parameters() = 0;
    virtual void set_training(bool training) = 0;
    virtual bool training() const = 0;
    virtual const ModelConfig& config() const = 0;

    /// Layer cost enumeration of one forward pass at batch 1.
    virtual std::vector<LayerCost> cost_plan() const = 0;

    /// Checks the context against the model's FrameSpec and T.
    void check_context(const VideoBatch& context) const;

    /// Eval-style convenience: raw frames in, unclamped prediction out.
    VideoBatch predict(const VideoBatch& context);
};

template <typename T>
nn::Var<T> context_to_var(const VideoBatch& batch);

VideoBatch prediction_to_batch(const nn::Tensor<float>& pred, const FrameSpec& spec);

}  // namespace ministl::models

#pragma once

#include "ministl/models/model.hpp"

namespace ministl::models {

/// Trivial reference predictor: repeats the last context frame across the
/// horizon. Useful as the untrained bar that a trained model must beat.
template <typename T>
class CopyLastModel : public Model<T> {
public:
    explicit CopyLastModel(const ModelConfig& config);

    nn::Var<T> forward(const nn::Var<T>& context) override;
    nn::ParamMap<T> parameters() override { return {}; }
    void set_training(bool training) override { training_ = training; }
    bool training() const override { return training_; }
    const ModelConfig& config() const override { return cfg_; }
    std::vector<LayerCost> cost_plan() const override { return {}; }

private:
    ModelConfig cfg_;
    bool training_ = true;
};

}  // namespace ministl::models

#pragma once

#include <utility>
#include <vector>

#include "ministl/models/model.hpp"

namespace ministl::models {

/// Standard ConvLSTM cell: gates i, f, o, g from one conv over [x, h];
/// c' = sigmoid(f) * c + sigmoid(i) * tanh(g), h' = sigmoid(o) * tanh(c').
template <typename T>
class ConvLSTMCell {
public:
    ConvLSTMCell() = default;
    ConvLSTMCell(int in_ch, int hidden, int kernel, Rng& rng);

    /// Returns (h', c').
    std::pair<nn::Var<T>, nn::Var<T>> step(const nn::Var<T>& x, const nn::Var<T>& h,
                                           const nn::Var<T>& c) const;
    void collect(const std::string& prefix, nn::ParamMap<T>& out);

    int hidden = 0;
    nn::Conv2d<T> gates;  // [x, h] -> 4 * hidden
};

/// PredRNN-style dual-memory cell: the temporal memory c is updated as in
/// ConvLSTM, the spatial memory m has its own gate set and travels up the
/// layer stack within a timestep, and the output gate reads both memories
/// through a 1x1 fusion conv.
template <typename T>
class STLSTMCell {
public:
    STLSTMCell() = default;
    STLSTMCell(int in_ch, int hidden, int kernel, Rng& rng);

    struct Out {
        nn::Var<T> h, c, m;
    };
    Out step(const nn::Var<T>& x, const nn::Var<T>& h, const nn::Var<T>& c,
             const nn::Var<T>& m) const;
    void collect(const std::string& prefix, nn::ParamMap<T>& out);

    int hidden = 0;
    nn::Conv2d<T> gates_h;  // [x, h] -> 3 * hidden (i, f, g)
    nn::Conv2d<T> gates_m;  // [x, m] -> 3 * hidden (i', f', g')
    nn::Conv2d<T> gate_o;   // [x, h, c', m'] -> hidden
    nn::Conv2d<T> fuse;     // 1x1 [c', m'] -> hidden
};

/// Layered recurrent predictor with the shared rollout engine: the T context
/// frames are consumed with ground-truth inputs, each further step feeds the
/// previous prediction, and a 1x1 readout maps the top hidden state to
/// frame channels. The same cell parameters are used at every timestep.
template <typename T>
class RecurrentModel : public Model<T> {
public:
    explicit RecurrentModel(const ModelConfig& config);

    nn::Var<T> forward(const nn::Var<T>& context) override;
    /// Rollout with an explicit horizon; horizon 0 yields an empty batch.
    nn::Var<T> rollout(const nn::Var<T>& context, int horizon);

    nn::ParamMap<T> parameters() override;
    void set_training(bool training) override { training_ = training; }
    bool training() const override { return training_; }
    const ModelConfig& config() const override { return cfg_; }
    std::vector<LayerCost> cost_plan() const override;

    const std::vector<ConvLSTMCell<T>>& conv_cells() const { return conv_cells_; }
    const std::vector<STLSTMCell<T>>& st_cells() const { return st_cells_; }
    const nn::Conv2d<T>& readout() const { return readout_; }

private:
    ModelConfig cfg_;
    bool training_ = true;
    std::vector<ConvLSTMCell<T>> conv_cells_;
    std::vector<STLSTMCell<T>> st_cells_;
    nn::Conv2d<T> readout_;
};

}  // namespace ministl::models

#include "ministl/models/recurrent.hpp"

namespace ministl::models {

namespace {
constexpr std::uint64_t kInitStream = 0x696e6974;
}

// ---------------------------------------------------------------------------
// cells
// ---------------------------------------------------------------------------

template <typename T>
ConvLSTMCell<T>::ConvLSTMCell(int in_ch, int hidden_in, int kernel, Rng& rng)
    : hidden(hidden_in),
      gates(in_ch + hidden_in, 4 * hidden_in, kernel,
            nn::Conv2dSpec{1, (kernel - 1) / 2, 1, 1}, nn::Init::he_normal, rng) {}

template <typename T>
std::pair<nn::Var<T>, nn::Var<T>> ConvLSTMCell<T>::step(const nn::Var<T>& x,
                                                        const nn::Var<T>& h,
                                                        const nn::Var<T>& c) const {
    using namespace nn;
    auto z = gates(concat<T>({x, h}, 1));
    auto i = sigmoid(narrow(z, 1, 0, hidden));
    auto f = sigmoid(narrow(z, 1, hidden, hidden));
    auto o = sigmoid(narrow(z, 1, 2 * hidden, hidden));
    auto g = tanh_op(narrow(z, 1, 3 * hidden, hidden));
    auto c_next = add(mul(f, c), mul(i, g));
    auto h_next = mul(o, tanh_op(c_next));
    return {h_next, c_next};
}

template <typename T>
void ConvLSTMCell<T>::collect(const std::string& prefix, nn::ParamMap<T>& out) {
    gates.collect(prefix + ".gates", out);
}

template <typename T>
STLSTMCell<T>::STLSTMCell(int in_ch, int hidden_in, int kernel, Rng& rng)
    : hidden(hidden_in),
      gates_h(in_ch + hidden_in, 3 * hidden_in, kernel,
              nn::Conv2dSpec{1, (kernel - 1) / 2, 1, 1}, nn::Init::he_normal, rng),
      gates_m(in_ch + hidden_in, 3 * hidden_in, kernel,
              nn::Conv2dSpec{1, (kernel - 1) / 2, 1, 1}, nn::Init::he_normal, rng),
      gate_o(in_ch + 3 * hidden_in, hidden_in, kernel,
             nn::Conv2dSpec{1, (kernel - 1) / 2, 1, 1}, nn::Init::he_normal, rng),
      fuse(2 * hidden_in, hidden_in, 1, nn::Conv2dSpec{}, nn::Init::he_normal, rng) {}

template <typename T>
typename STLSTMCell<T>::Out STLSTMCell<T>::step(const nn::Var<T>& x, const nn::Var<T>& h,
                                                const nn::Var<T>& c,
                                                const nn::Var<T>& m) const {
    using namespace nn;
    auto zh = gates_h(concat<T>({x, h}, 1));
    auto i = sigmoid(narrow(zh, 1, 0, hidden));
    auto f = sigmoid(narrow(zh, 1, hidden, hidden));
    auto g = tanh_op(narrow(zh, 1, 2 * hidden, hidden));
    auto c_next = add(mul(f, c), mul(i, g));

    auto zm = gates_m(concat<T>({x, m}, 1));
    auto i2 = sigmoid(narrow(zm, 1, 0, hidden));
    auto f2 = sigmoid(narrow(zm, 1, hidden, hidden));
    auto g2 = tanh_op(narrow(zm, 1, 2 * hidden, hidden));
    auto m_next = add(mul(f2, m), mul(i2, g2));

    auto o = sigmoid(gate_o(concat<T>({x, h, c_next, m_next}, 1)));
    auto h_next = mul(o, tanh_op(fuse(concat<T>({c_next, m_next}, 1))));
    return {h_next, c_next, m_next};
}

template <typename T>
void STLSTMCell<T>::collect(const std::string& prefix, nn::ParamMap<T>& out) {
    gates_h.collect(prefix + ".gates_h", out);
    gates_m.collect(prefix + ".gates_m", out);
    gate_o.collect(prefix + ".gate_o", out);
    fuse.collect(prefix + ".fuse", out);
}

// ---------------------------------------------------------------------------
// stacked model + rollout
// ---------------------------------------------------------------------------

template <typename T>
RecurrentModel<T>::RecurrentModel(const ModelConfig& config) : cfg_(config) {
    cfg_.validate();
    MINISTL_CHECK(cfg_.kind == ModelKind::convlstm || cfg_.kind == ModelKind::st_lstm,
                  ConfigError, "RecurrentModel built from a " << to_string(cfg_.kind)
                                                              << " config");
    Rng rng(cfg_.init_seed, kInitStream);
    int in_ch = cfg_.frame.channels;
    for (int l = 0; l < cfg_.rnn_layers; ++l) {
        if (cfg_.kind == ModelKind::convlstm) {
            conv_cells_.emplace_back(in_ch, cfg_.rnn_hidden, cfg_.rnn_kernel, rng);
        } else {
            st_cells_.emplace_back(in_ch, cfg_.rnn_hidden, cfg_.rnn_kernel, rng);
        }
        in_ch = cfg_.rnn_hidden;
    }
    readout_ = nn::Conv2d<T>(cfg_.rnn_hidden, cfg_.frame.channels, 1, nn::Conv2dSpec{},
                             nn::Init::he_normal, rng);
}

template <typename T>
nn::Var<T> RecurrentModel<T>::forward(const nn::Var<T>& context) {
    return rollout(context, cfg_.T_prime);
}

template <typename T>
nn::Var<T> RecurrentModel<T>::rollout(const nn::Var<T>& context, int horizon) {
    using namespace nn;
    const auto& s = context.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "rollout expects (B,T,C,H,W)");
    MINISTL_CHECK(s[1] == cfg_.T, ShapeError,
                  "rollout context length " << s[1] << " vs configured T " << cfg_.T);
    MINISTL_CHECK(s[2] == cfg_.frame.channels && s[3] == cfg_.frame.height &&
                      s[4] == cfg_.frame.width,
                  ShapeError, "rollout frame shape " << shape_str(s) << " vs config");
    const std::int64_t B = s[0], C = s[2], H = s[3], W = s[4];
    if (horizon == 0) {
        return Var<T>::constant(Tensor<T>::zeros({B, 0, C, H, W}));
    }

    const int layers = cfg_.rnn_layers;
    const Shape state_shape{B, cfg_.rnn_hidden, H, W};
    std::vector<Var<T>> h(layers), c(layers);
    for (int l = 0; l < layers; ++l) {
        h[l] = Var<T>::constant(Tensor<T>::zeros(state_shape));
        c[l] = Var<T>::constant(Tensor<T>::zeros(state_shape));
    }
    Var<T> m = Var<T>::constant(Tensor<T>::zeros(state_shape));

    // T + T' - 1 cell steps: the step consuming the last context frame emits
    // the first horizon prediction, every later step feeds its own output.
    const int total_steps = cfg_.T + horizon - 1;
    std::vector<Var<T>> preds;
    Var<T> prev_pred;
    for (int t = 0; t < total_steps; ++t) {
        Var<T> x;
        if (t < cfg_.T) {
            x = reshape(narrow(context, 1, t, 1), {B, C, H, W});
        } else {
            x = prev_pred;
        }
        for (int l = 0; l < layers; ++l) {
            const Var<T>& input = (l == 0) ? x : h[l - 1];
            if (cfg_.kind == ModelKind::convlstm) {
                auto [hn, cn] = conv_cells_[l].step(input, h[l], c[l]);
                h[l] = hn;
                c[l] = cn;
            } else {
                auto out = st_cells_[l].step(input, h[l], c[l], m);
                h[l] = out.h;
                c[l] = out.c;
                m = out.m;
            }
        }
        if (t >= cfg_.T - 1) {
            prev_pred = readout_(h[layers - 1]);
            preds.push_back(reshape(prev_pred, {B, 1, C, H, W}));
        }
    }
    return concat(preds, 1);
}

template <typename T>
nn::ParamMap<T> RecurrentModel<T>::parameters() {
    nn::ParamMap<T> out;
    for (std::size_t l = 0; l < conv_cells_.size(); ++l) {
        conv_cells_[l].collect("cell." + std::to_string(l), out);
    }
    for (std::size_t l = 0; l < st_cells_.size(); ++l) {
        st_cells_[l].collect("cell." + std::to_string(l), out);
    }
    readout_.collect("readout", out);
    return out;
}

template <typename T>
std::vector<LayerCost> RecurrentModel<T>::cost_plan() const {
    std::vector<LayerCost> plan;
    const std::int64_t H = cfg_.frame.height, W = cfg_.frame.width;
    const std::int64_t C = cfg_.frame.channels;
    const std::int64_t hid = cfg_.rnn_hidden;
    const std::int64_t k = cfg_.rnn_kernel;
    const std::int64_t steps = cfg_.T + cfg_.T_prime - 1;
    if (steps <= 0) return plan;

    std::int64_t in_ch = C;
    for (int l = 0; l < cfg_.rnn_layers; ++l) {
        if (cfg_.kind == ModelKind::convlstm) {
            plan.push_back(LayerCost::conv("cell.gates", k, k, in_ch + hid, 4 * hid, H, W, 1,
                                           steps));
            plan.push_back(LayerCost::elementwise("cell.update", 7 * hid * H * W, steps));
        } else {
            plan.push_back(LayerCost::conv("cell.gates_h", k, k, in_ch + hid, 3 * hid, H, W, 1,
                                           steps));
            plan.push_back(LayerCost::conv("cell.gates_m", k, k, in_ch + hid, 3 * hid, H, W, 1,
                                           steps));
            plan.push_back(LayerCost::conv("cell.gate_o", k, k, in_ch + 3 * hid, hid, H, W, 1,
                                           steps));
            plan.push_back(LayerCost::conv("cell.fuse", 1, 1, 2 * hid, hid, H, W, 1, steps));
            plan.push_back(LayerCost::elementwise("cell.update", 12 * hid * H * W, steps));
        }
        in_ch = hid;
    }
    plan.push_back(LayerCost::conv("readout", 1, 1, hid, C, H, W, 1, cfg_.T_prime));
    return plan;
}

template class ConvLSTMCell<float>;
template class ConvLSTMCell<double>;
template class STLSTMCell<float>;
template class STLSTMCell<double>;
template class RecurrentModel<float>;
template class RecurrentModel<double>;

}  // namespace ministl::models

#include "ministl/models/baselines.hpp"

namespace ministl::models {

// ---------------------------------------------------------------------------
// Model base helpers
// ---------------------------------------------------------------------------

template <typename T>
void Model<T>::check_context(const VideoBatch& context) const {
    context.check_shape();
    const auto& cfg = config();
    MINISTL_CHECK(context.spec == cfg.frame, ShapeError,
                  "context FrameSpec (C=" << context.spec.channels << ", H="
                                          << context.spec.height << ", W="
                                          << context.spec.width << ") does not match model");
    MINISTL_CHECK(context.time_len() == cfg.T, ShapeError,
                  "context length " << context.time_len() << " vs model T " << cfg.T);
}

template <typename T>
VideoBatch Model<T>::predict(const VideoBatch& context) {
    check_context(context);
    const bool was_training = training();
    set_training(false);
    auto x = context_to_var<T>(context);
    auto y = forward(x);
    set_training(was_training);
    return prediction_to_batch(y.value().template cast<float>(), context.spec);
}

template <typename T>
nn::Var<T> context_to_var(const VideoBatch& batch) {
    if constexpr (std::is_same_v<T, float>) {
        return nn::Var<float>::constant(batch.data);
    } else {
        return nn::Var<T>::constant(batch.data.template cast<T>());
    }
}

VideoBatch prediction_to_batch(const nn::Tensor<float>& pred, const FrameSpec& spec) {
    return VideoBatch(pred, spec, BatchRole::prediction);
}

// ---------------------------------------------------------------------------
// copy-last baseline
// ---------------------------------------------------------------------------

template <typename T>
CopyLastModel<T>::CopyLastModel(const ModelConfig& config) : cfg_(config) {
    cfg_.frame.validate();
    MINISTL_CHECK(cfg_.T >= 1 && cfg_.T_prime >= 0, ConfigError, "copy_last needs T >= 1");
}

template <typename T>
nn::Var<T> CopyLastModel<T>::forward(const nn::Var<T>& context) {
    using namespace nn;
    const auto& s = context.shape();
    MINISTL_CHECK(s.size() == 5, ShapeError, "forward expects (B,T,C,H,W)");
    MINISTL_CHECK(s[1] == cfg_.T, ShapeError,
                  "context length " << s[1] << " vs model T " << cfg_.T);
    auto last = narrow(context, 1, cfg_.T - 1, 1);
    if (cfg_.T_prime == 0) {
        return Var<T>::constant(Tensor<T>::zeros({s[0], 0, s[2], s[3], s[4]}));
    }
    std::vector<Var<T>> reps(cfg_.T_prime, last);
    return concat(reps, 1);
}

template class Model<float>;
template class Model<double>;
template nn::Var<float> context_to_var<float>(const VideoBatch&);
template nn::Var<double> context_to_var<double>(const VideoBatch&);
template class CopyLastModel<float>;
template class CopyLastModel<double>;

}  // namespace ministl::models

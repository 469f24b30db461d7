#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "ministl/common.hpp"

namespace ministl::nn {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += std::to_string(s[i]);
        if (i + 1 < s.size()) out += ", ";
    }
    return out + ")";
}

/// Dense row-major tensor. The buffer is shared, so copies are cheap views;
/// clone() gives an independent buffer. Always contiguous.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)),
          data_(std::make_shared<std::vector<T>>(shape_numel(shape_), T(0))) {}

    Tensor(Shape shape, std::vector<T> values)
        : shape_(std::move(shape)), data_(std::make_shared<std::vector<T>>(std::move(values))) {
        MINISTL_CHECK(static_cast<std::int64_t>(data_->size()) == shape_numel(shape_), ShapeError,
                      "tensor data size " << data_->size() << " does not match shape "
                                          << shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        std::fill(t.data_->begin(), t.data_->end(), value);
        return t;
    }

    static Tensor scalar(T value) { return full({1}, value); }

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    std::int64_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t ndim() const { return shape_.size(); }
    std::int64_t numel() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }

    T* data() { return data_->data(); }
    const T* data() const { return data_->data(); }
    T& operator[](std::int64_t i) { return (*data_)[i]; }
    const T& operator[](std::int64_t i) const { return (*data_)[i]; }

    /// Multi-index accessor; handy in tests and oracles, slow in loops.
    template <typename... Ix>
    T& at(Ix... ix) {
        return (*data_)[flat_index({static_cast<std::int64_t>(ix)...})];
    }
    template <typename... Ix>
    const T& at(Ix... ix) const {
        return (*data_)[flat_index({static_cast<std::int64_t>(ix)...})];
    }

    std::int64_t flat_index(std::initializer_list<std::int64_t> ix) const {
        MINISTL_CHECK(ix.size() == shape_.size(), ShapeError,
                      "index rank " << ix.size() << " vs tensor rank " << shape_.size());
        std::int64_t flat = 0;
        std::size_t k = 0;
        for (auto i : ix) {
            flat = flat * shape_[k] + i;
            ++k;
        }
        return flat;
    }

    /// Same buffer, new shape (element count must match).
    Tensor reshaped(Shape shape) const {
        MINISTL_CHECK(shape_numel(shape) == numel(), ShapeError,
                      "reshape " << shape_str(shape_) << " -> " << shape_str(shape)
                                 << " changes element count");
        Tensor out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

    Tensor clone() const {
        if (!defined()) return {};
        Tensor out;
        out.shape_ = shape_;
        out.data_ = std::make_shared<std::vector<T>>(*data_);
        return out;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        const T* src = data();
        U* dst = out.data();
        for (std::int64_t i = 0; i < numel(); ++i) dst[i] = static_cast<U>(src[i]);
        return out;
    }

    void fill(T value) { std::fill(data_->begin(), data_->end(), value); }

    void reset() {
        shape_.clear();
        data_.reset();
    }

    bool all_finite() const {
        const T* p = data();
        for (std::int64_t i = 0; i < numel(); ++i) {
            if (!std::isfinite(static_cast<double>(p[i]))) return false;
        }
        return true;
    }

private:
    Shape shape_;
    std::shared_ptr<std::vector<T>> data_;
};

}  // namespace ministl::nn

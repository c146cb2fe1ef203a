#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "stwarp/image.hpp"

namespace stwarp {

/// Dense B x C x H x W tensor (NCHW). Double precision in test mode, single
/// precision in run mode; both instantiations share this definition.
template <typename T>
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int b, int c, int h, int w, T fill = T{})
        : b_(b), c_(c), h_(h), w_(w), data_(size_t(b) * c * h * w, fill) {
        if (b <= 0 || c <= 0 || h <= 0 || w <= 0)
            throw ShapeError("Tensor4: non-positive dimensions");
    }

    int batch() const { return b_; }
    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    T& at(int b, int c, int y, int x) {
        return data_[((size_t(b) * c_ + c) * h_ + y) * w_ + x];
    }
    const T& at(int b, int c, int y, int x) const {
        return data_[((size_t(b) * c_ + c) * h_ + y) * w_ + x];
    }

    T* plane(int b, int c) { return data_.data() + (size_t(b) * c_ + c) * h_ * w_; }
    const T* plane(int b, int c) const { return data_.data() + (size_t(b) * c_ + c) * h_ * w_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool sameShape(const Tensor4& o) const {
        return b_ == o.b_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }
    bool operator==(const Tensor4& o) const { return sameShape(o) && data_ == o.data_; }

    template <typename U>
    Tensor4<U> cast() const {
        Tensor4<U> out(b_, c_, h_, w_);
        for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = U(data_[i]);
        return out;
    }

    static Tensor4 randomUniform(int b, int c, int h, int w, T lo, T hi, std::mt19937_64& rng) {
        Tensor4 t(b, c, h, w);
        std::uniform_real_distribution<double> dist{double(lo), double(hi)};
        for (auto& v : t.data_) v = T(dist(rng));
        return t;
    }

private:
    int b_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<T> data_;
};

/// Single-map (B=1) view conversions between the warp module's HWC feature
/// maps and NCHW tensors.
template <typename T>
Tensor4<T> toTensor(const FeatureMap<T>& f) {
    Tensor4<T> t(1, f.channels(), f.height(), f.width());
    std::copy(f.data(), f.data() + f.size(), t.data());
    return t;
}

template <typename T>
FeatureMap<T> toFeatureMap(const Tensor4<T>& t, int b = 0) {
    FeatureMap<T> f(t.height(), t.width(), t.channels());
    std::copy(t.plane(b, 0), t.plane(b, 0) + f.size(), f.data());
    return f;
}

}  // namespace stwarp

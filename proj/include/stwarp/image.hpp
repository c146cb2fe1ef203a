#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stwarp {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense H x W raster, row-major.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int h, int w, T fill = T{}) : h_(h), w_(w), data_(size_t(h) * w, fill) {
        if (h <= 0 || w <= 0) throw ShapeError("Grid: non-positive dimensions");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    bool empty() const { return data_.empty(); }

    T& at(int y, int x) { return data_[size_t(y) * w_ + x]; }
    const T& at(int y, int x) const { return data_[size_t(y) * w_ + x]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }

    bool operator==(const Grid& o) const {
        return h_ == o.h_ && w_ == o.w_ && data_ == o.data_;
    }

private:
    int h_ = 0, w_ = 0;
    std::vector<T> data_;
};

/// Depth in meters; 0 or NaN marks missing measurements.
using DepthImage = Grid<float>;

inline bool depthValid(float d) { return d > 0.0f && std::isfinite(d); }

/// Dense H x W x C raster stored as C planes (CHW).
template <typename T>
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(int h, int w, int c, T fill = T{})
        : h_(h), w_(w), c_(c), data_(size_t(h) * w * c, fill) {
        if (h <= 0 || w <= 0 || c <= 0) throw ShapeError("FeatureMap: non-positive dimensions");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    bool empty() const { return data_.empty(); }

    T& at(int y, int x, int c) { return data_[(size_t(c) * h_ + y) * w_ + x]; }
    const T& at(int y, int x, int c) const { return data_[(size_t(c) * h_ + y) * w_ + x]; }

    T* plane(int c) { return data_.data() + size_t(c) * h_ * w_; }
    const T* plane(int c) const { return data_.data() + size_t(c) * h_ * w_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }

    bool sameShape(const FeatureMap& o) const {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }
    bool operator==(const FeatureMap& o) const {
        return sameShape(o) && data_ == o.data_;
    }

private:
    int h_ = 0, w_ = 0, c_ = 0;
    std::vector<T> data_;
};

/// Per-pixel reprojection displacement (du, dv) in continuous pixels, with a
/// validity mask (false where source depth is missing or the point lands
/// behind the camera).
struct ShiftMatrix {
    Grid<float> du;
    Grid<float> dv;
    Grid<uint8_t> valid;

    ShiftMatrix() = default;
    ShiftMatrix(int h, int w) : du(h, w), dv(h, w), valid(h, w, 0) {}

    int height() const { return du.height(); }
    int width() const { return du.width(); }
};

/// Result of forward-scattering a feature map into a target frame.
template <typename T>
struct RegisteredMap {
    FeatureMap<T> map;
    DepthImage targetDepth;     // depth of the winning element in the target camera
    Grid<uint8_t> hitMask;      // pixel received at least one scattered element
    Grid<int32_t> sourceIndex;  // row-major source pixel of the winner, -1 if none
};

}  // namespace stwarp

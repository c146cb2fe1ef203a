#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>

#include "stwarp/geometry.hpp"
#include "stwarp/image.hpp"

namespace stwarp {

/// Nearest-integer rounding with ties toward +infinity.
inline int roundHalfUp(double x) { return int(std::floor(x + 0.5)); }

/// Per-pixel reprojection shift (Delta): for each valid source pixel q,
/// delta_q = project(tc * backproject(q, d_q)) - q. Pixels with missing depth
/// or a transformed point behind the camera are masked invalid.
ShiftMatrix computeShiftMatrix(const DepthImage& depth, const Pose& tc,
                               const CameraIntrinsics& k);

/// z component of tc * backproject(q, d_q) per source pixel; 0 where invalid.
DepthImage transformedDepth(const DepthImage& depth, const Pose& tc,
                            const CameraIntrinsics& k);

/// Bilinear resample of a masked scalar field (center-aligned sampling).
/// The output mask is conservative: a target pixel is valid only if every
/// contributing source pixel is valid.
std::pair<Grid<float>, Grid<uint8_t>> resizeMaskedField(const Grid<float>& src,
                                                        const Grid<uint8_t>& mask,
                                                        int targetH, int targetW);

/// Bilinear resize of the shift field to targetH x targetW, with the shift
/// components scaled by (targetW/W, targetH/H).
ShiftMatrix resizeShiftMatrix(const ShiftMatrix& delta, int targetH, int targetW);

namespace detail {

// Winner per destination pixel under the z-buffer rule: smallest target-frame
// depth wins the whole pixel; exact ties go to the lowest source row-major
// index. Sources iterate in row-major order with a strict < comparison, which
// realizes the tie rule for free.
template <typename T>
void resolveWinners(const ShiftMatrix& delta, const Grid<float>& targetDepth,
                    Grid<int32_t>& winner, Grid<float>& winDepth) {
    const int h = delta.height(), w = delta.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!delta.valid.at(y, x)) continue;
            const int dx = roundHalfUp(x + double(delta.du.at(y, x)));
            const int dy = roundHalfUp(y + double(delta.dv.at(y, x)));
            if (dx < 0 || dx >= w || dy < 0 || dy >= h) continue;
            const float td = targetDepth.at(y, x);
            int32_t& win = winner.at(dy, dx);
            if (win < 0 || td < winDepth.at(dy, dx)) {
                win = y * w + x;
                winDepth.at(dy, dx) = td;
            }
        }
    }
}

}  // namespace detail

/// Serial reference scatter: naive per-pixel double loop. Kept as the oracle
/// the vectorized path must match bitwise.
template <typename T>
RegisteredMap<T> registerFeatureMapReference(const FeatureMap<T>& f, const ShiftMatrix& delta,
                                             const Grid<float>& targetDepth, T fillValue) {
    const int h = f.height(), w = f.width(), c = f.channels();
    if (delta.height() != h || delta.width() != w ||
        targetDepth.height() != h || targetDepth.width() != w)
        throw ShapeError("registerFeatureMap: shift/depth dimensions do not match map");

    RegisteredMap<T> out;
    out.map = FeatureMap<T>(h, w, c, fillValue);
    out.targetDepth = DepthImage(h, w, 0.0f);
    out.hitMask = Grid<uint8_t>(h, w, 0);
    out.sourceIndex = Grid<int32_t>(h, w, -1);

    detail::resolveWinners<T>(delta, targetDepth, out.sourceIndex, out.targetDepth);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int32_t src = out.sourceIndex.at(y, x);
            if (src < 0) continue;
            out.hitMask.at(y, x) = 1;
            const int sy = src / w, sx = src % w;
            for (int ch = 0; ch < c; ++ch) out.map.at(y, x, ch) = f.at(sy, sx, ch);
        }
    }
    return out;
}

/// Parallel scatter. Destination computation and channel copies run under
/// OpenMP; the cheap winner-resolution pass stays serial so the output is
/// bitwise identical to the reference for any thread count.
template <typename T>
RegisteredMap<T> registerFeatureMap(const FeatureMap<T>& f, const ShiftMatrix& delta,
                                    const Grid<float>& targetDepth, T fillValue) {
    const int h = f.height(), w = f.width(), c = f.channels();
    if (delta.height() != h || delta.width() != w ||
        targetDepth.height() != h || targetDepth.width() != w)
        throw ShapeError("registerFeatureMap: shift/depth dimensions do not match map");

    RegisteredMap<T> out;
    out.map = FeatureMap<T>(h, w, c, fillValue);
    out.targetDepth = DepthImage(h, w, 0.0f);
    out.hitMask = Grid<uint8_t>(h, w, 0);
    out.sourceIndex = Grid<int32_t>(h, w, -1);

    detail::resolveWinners<T>(delta, targetDepth, out.sourceIndex, out.targetDepth);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int32_t src = out.sourceIndex.at(y, x);
            if (src < 0) continue;
            out.hitMask.at(y, x) = 1;
            const int sy = src / w, sx = src % w;
            for (int ch = 0; ch < c; ++ch) out.map.at(y, x, ch) = f.at(sy, sx, ch);
        }
    }
    return out;
}

/// Gradient of the scatter with respect to the source map: each destination
/// pixel routes its upstream gradient back to the source pixel that won it;
/// losing and discarded sources receive zero.
template <typename T>
FeatureMap<T> registerFeatureMapBackward(const Grid<int32_t>& sourceIndex,
                                         const FeatureMap<T>& gradOut) {
    const int h = gradOut.height(), w = gradOut.width(), c = gradOut.channels();
    FeatureMap<T> gradIn(h, w, c, T{});
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int32_t src = sourceIndex.at(y, x);
            if (src < 0) continue;
            const int sy = src / w, sx = src % w;
            for (int ch = 0; ch < c; ++ch) gradIn.at(sy, sx, ch) = gradOut.at(y, x, ch);
        }
    }
    return gradIn;
}

inline constexpr double kRegisterFillValue = 0.1;

/// Full registration of a (possibly lower-resolution) prior feature map into
/// the current frame: shift matrix at depth resolution, resized and scaled to
/// the map resolution, then z-buffered scatter.
template <typename T>
RegisteredMap<T> registerPrior(const FeatureMap<T>& prior, const DepthImage& depthFull,
                               const Pose& tc, const CameraIntrinsics& k,
                               T fillValue = T(kRegisterFillValue)) {
    if (prior.height() > depthFull.height() || prior.width() > depthFull.width())
        throw ShapeError("registerPrior: prior resolution exceeds depth resolution");

    ShiftMatrix deltaFull = computeShiftMatrix(depthFull, tc, k);
    DepthImage tdFull = transformedDepth(depthFull, tc, k);

    if (prior.height() == depthFull.height() && prior.width() == depthFull.width())
        return registerFeatureMap(prior, deltaFull, tdFull, fillValue);

    ShiftMatrix delta = resizeShiftMatrix(deltaFull, prior.height(), prior.width());
    auto [td, tdMask] = resizeMaskedField(tdFull, deltaFull.valid, prior.height(), prior.width());
    // A shift is only usable where its resampled target depth is also valid;
    // the masks coincide by construction but keep the AND for safety.
    for (int y = 0; y < prior.height(); ++y)
        for (int x = 0; x < prior.width(); ++x)
            delta.valid.at(y, x) = delta.valid.at(y, x) && tdMask.at(y, x);
    return registerFeatureMap(prior, delta, td, fillValue);
}

}  // namespace stwarp

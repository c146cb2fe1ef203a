#include "stwarp/warp.hpp"

namespace stwarp {

ShiftMatrix computeShiftMatrix(const DepthImage& depth, const Pose& tc,
                               const CameraIntrinsics& k) {
    const int h = depth.height(), w = depth.width();
    if (h != k.height || w != k.width)
        throw ShapeError("computeShiftMatrix: depth dimensions do not match intrinsics");

    ShiftMatrix delta(h, w);
    const Eigen::Matrix3d r = tc.rotationMatrix();
    const Eigen::Vector3d t = tc.translation();

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float d = depth.at(y, x);
            if (!depthValid(d)) continue;
            const Eigen::Vector3d p((x - k.cx) * d / k.fx, (y - k.cy) * d / k.fy, d);
            const Eigen::Vector3d p2 = r * p + t;
            if (!(p2.z() > 0)) continue;
            delta.du.at(y, x) = float(k.fx * p2.x() / p2.z() + k.cx - x);
            delta.dv.at(y, x) = float(k.fy * p2.y() / p2.z() + k.cy - y);
            delta.valid.at(y, x) = 1;
        }
    }
    return delta;
}

DepthImage transformedDepth(const DepthImage& depth, const Pose& tc,
                            const CameraIntrinsics& k) {
    const int h = depth.height(), w = depth.width();
    if (h != k.height || w != k.width)
        throw ShapeError("transformedDepth: depth dimensions do not match intrinsics");

    DepthImage out(h, w, 0.0f);
    const Eigen::Matrix3d r = tc.rotationMatrix();
    const Eigen::Vector3d t = tc.translation();

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float d = depth.at(y, x);
            if (!depthValid(d)) continue;
            const Eigen::Vector3d p((x - k.cx) * d / k.fx, (y - k.cy) * d / k.fy, d);
            const double z = r.row(2).dot(p) + t.z();
            if (z > 0) out.at(y, x) = float(z);
        }
    }
    return out;
}

std::pair<Grid<float>, Grid<uint8_t>> resizeMaskedField(const Grid<float>& src,
                                                        const Grid<uint8_t>& mask,
                                                        int targetH, int targetW) {
    if (targetH < 1 || targetW < 1)
        throw ShapeError("resizeMaskedField: target dimensions must be positive");
    const int sh = src.height(), sw = src.width();
    Grid<float> out(targetH, targetW, 0.0f);
    Grid<uint8_t> outMask(targetH, targetW, 0);

    const double scaleY = double(sh) / targetH;
    const double scaleX = double(sw) / targetW;

#pragma omp parallel for schedule(static)
    for (int y = 0; y < targetH; ++y) {
        const double sy = std::clamp((y + 0.5) * scaleY - 0.5, 0.0, double(sh - 1));
        const int y0 = int(sy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int x = 0; x < targetW; ++x) {
            const double sx = std::clamp((x + 0.5) * scaleX - 0.5, 0.0, double(sw - 1));
            const int x0 = int(sx);
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;

            const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
            const double w10 = fy * (1 - fx), w11 = fy * fx;

            bool ok = true;
            if (w00 > 0 && !mask.at(y0, x0)) ok = false;
            if (w01 > 0 && !mask.at(y0, x1)) ok = false;
            if (w10 > 0 && !mask.at(y1, x0)) ok = false;
            if (w11 > 0 && !mask.at(y1, x1)) ok = false;
            if (!ok) continue;

            out.at(y, x) = float(w00 * src.at(y0, x0) + w01 * src.at(y0, x1) +
                                 w10 * src.at(y1, x0) + w11 * src.at(y1, x1));
            outMask.at(y, x) = 1;
        }
    }
    return {std::move(out), std::move(outMask)};
}

ShiftMatrix resizeShiftMatrix(const ShiftMatrix& delta, int targetH, int targetW) {
    auto [du, maskU] = resizeMaskedField(delta.du, delta.valid, targetH, targetW);
    auto [dv, maskV] = resizeMaskedField(delta.dv, delta.valid, targetH, targetW);
    (void)maskV;  // identical to maskU by construction

    const float scaleU = float(targetW) / delta.width();
    const float scaleV = float(targetH) / delta.height();

    ShiftMatrix out(targetH, targetW);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < targetH; ++y) {
        for (int x = 0; x < targetW; ++x) {
            out.du.at(y, x) = du.at(y, x) * scaleU;
            out.dv.at(y, x) = dv.at(y, x) * scaleV;
            out.valid.at(y, x) = maskU.at(y, x);
        }
    }
    return out;
}

}  // namespace stwarp

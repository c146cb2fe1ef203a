#pragma once

#include <random>
#include <vector>

#include "stwarp/geometry.hpp"
#include "stwarp/image.hpp"

namespace stwarp {

struct OdometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateGeometryError : OdometryError {
    using OdometryError::OdometryError;
};

struct OdometryReading {
    double timestamp = 0.0;
    Pose pose;  // robot in odometry frame
};

/// Pose at an arbitrary timestamp: linear translation, slerp rotation.
Pose interpolatePose(const std::vector<OdometryReading>& log, double t);

/// Relative transform pose(t_i)^-1 * pose(t_j) between interpolated stamps.
Pose relativePose(const std::vector<OdometryReading>& log, double t_i, double t_j);

struct NoiseSpec {
    double sigmaT = 0.01;  // meters, per axis
    double sigmaR = 0.5;   // degrees, per axis

    NoiseSpec() = default;
    NoiseSpec(double st, double sr) : sigmaT(st), sigmaR(sr) {
        if (st < 0 || sr < 0) throw OdometryError("NoiseSpec: negative sigma");
    }
};

/// Perturb a pose with zero-mean Gaussian translation noise and a small-angle
/// Gaussian rotation (applied via the rotation exponential, so the result
/// stays on SO(3)).
Pose injectNoise(const Pose& p, const NoiseSpec& spec, std::mt19937_64& rng);

struct IcpConfig {
    int maxIterations = 30;
    double updateNormEps = 1e-6;
    int stride = 2;               // depth subsampling for correspondences
    double residualClamp = 0.05;  // meters
    int minCorrespondences = 100;
    double degeneracyEps = 1e-7;  // min/max eigenvalue ratio of the normal matrix
};

struct RefineResult {
    Pose pose;
    bool converged = false;
    int iterations = 0;
    double finalRms = 0.0;
};

/// Point-to-plane ICP with projective association, refining an initial
/// camera-frame transform (source frame i -> target frame j). Normals come
/// from depth-gradient cross products in the target frame. On
/// non-convergence the initial pose is returned with converged=false.
RefineResult refineWithDepth(const Pose& init, const DepthImage& depth_i,
                             const DepthImage& depth_j, const CameraIntrinsics& k,
                             const IcpConfig& cfg = {});

}  // namespace stwarp

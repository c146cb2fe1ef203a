#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "stwarp/geometry.hpp"
#include "stwarp/image.hpp"
#include "stwarp/io.hpp"

namespace stwarp {

enum class TrajectoryPreset { NadirStrafe, ObliqueArc };

/// Deterministic synthetic RGB-D scene: a textured ground plane plus
/// class-labeled ellipsoid blobs, rendered analytically (ray-plane and
/// ray-ellipsoid intersections) along a known trajectory. Depth, labels and
/// poses are exact, which is what makes the registration oracles airtight.
struct SceneConfig {
    int imageW = 96;
    int imageH = 64;
    int numClasses = 3;  // background, crop-like, weed-like
    double focal = 80.0;

    int blobCountMin = 70;
    int blobCountMax = 100;
    double blobSizeMin = 0.035;  // meters (semi-axis)
    double blobSizeMax = 0.085;
    double planeDepth = 1.2;   // meters below the camera
    double lateralBand = 0.9;  // blob scatter half-width, meters

    TrajectoryPreset trajectory = TrajectoryPreset::NadirStrafe;
    double speed = 0.4;  // m/s
    double fps = 15.0;
    int frames = 600;
    uint64_t seed = 1;

    // Appearance noise: per-blob-per-frame color flicker (illumination-like)
    // and independent per-pixel noise. Both reset every frame, so temporal
    // aggregation genuinely pays off.
    double blobFlickerSigma = 0.10;
    double pixelNoiseSigma = 0.10;

    // Wheel-odometry drift injected per step into trajectory.txt; the exact
    // poses go to groundtruth_trajectory.txt.
    double wheelSigmaT = 0.006;  // meters per step
    double wheelSigmaR = 0.25;   // degrees per step

    int labelStride = 5;   // annotate every k-th frame...
    int labelStart = 30;   // ...starting here, so random sampling never
                           // walks off the front of the sequence
};

struct Blob {
    Eigen::Vector3d center;
    Eigen::Vector3d semiAxes;
    int classId = 1;
    Eigen::Vector3d baseColor;
};

struct Scene {
    SceneConfig cfg;
    CameraIntrinsics intrinsics;
    std::vector<Blob> blobs;
    std::vector<Pose> poses;  // exact camera/robot pose per frame (robot == camera)
};

struct RenderedFrame {
    RgbImage rgb;
    DepthImage depth;
    Grid<uint8_t> labels;
};

struct RayHit {
    double depth = 0.0;  // camera z-depth; <= 0 means no hit
    int classId = 0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

/// Build the world (blob field + trajectory) deterministically from the seed.
Scene buildScene(const SceneConfig& cfg);

/// Nearest positive intersection among the ground plane and all blobs, for a
/// camera-frame ray direction at the given pose. Color excludes the
/// per-frame noise terms.
RayHit renderRay(const Scene& scene, const Pose& camPose, const Eigen::Vector3d& rayDirCam);

/// Render one frame, including the per-frame appearance noise.
RenderedFrame renderFrame(const Scene& scene, int frameIndex);

/// Render and write the dataset directory layout:
/// frames/NNNNNN.ppm, depth/NNNNNN.dpt, labels/NNNNNN.pgm (annotated frames
/// only), trajectory.txt (wheel), groundtruth_trajectory.txt, intrinsics.json,
/// scene.json.
void generateSequence(const SceneConfig& cfg, const std::filesystem::path& outDir);

SceneConfig presetConfig(const std::string& preset);  // "sb" or "bup"

}  // namespace stwarp

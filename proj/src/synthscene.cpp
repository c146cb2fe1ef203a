#include "stwarp/synthscene.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace stwarp {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct Path {
    TrajectoryPreset preset;
    double arcRadius = 8.0;
    double pitchRad = 0.0;

    Eigen::Vector3d position(double s) const {
        if (preset == TrajectoryPreset::NadirStrafe) return {s, 0.0, 0.0};
        const double th = s / arcRadius;
        return {arcRadius * std::sin(th), arcRadius * (1.0 - std::cos(th)), 0.0};
    }
    Eigen::Vector3d lateral(double s) const {
        if (preset == TrajectoryPreset::NadirStrafe) return {0.0, 1.0, 0.0};
        const double th = s / arcRadius;
        return {-std::sin(th), std::cos(th), 0.0};
    }
    Eigen::Quaterniond orientation(double s) const {
        Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
        if (preset == TrajectoryPreset::ObliqueArc) {
            const double th = s / arcRadius;
            q = Eigen::AngleAxisd(th, Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(pitchRad, Eigen::Vector3d::UnitX());
        }
        return q;
    }
};

Path makePath(const SceneConfig& cfg) {
    Path p;
    p.preset = cfg.trajectory;
    p.pitchRad = cfg.trajectory == TrajectoryPreset::ObliqueArc ? 25.0 * M_PI / 180.0 : 0.0;
    return p;
}

// World-anchored ground texture; constant across frames so warped views of
// the same patch agree.
Eigen::Vector3d groundColor(double x, double y) {
    const Eigen::Vector3d base(0.36, 0.28, 0.20);
    const double pattern = 0.10 * std::sin(14.0 * x) * std::sin(17.0 * y);
    const uint64_t cell = splitmix64(uint64_t(int64_t(std::floor(x * 250.0))) * 0x100000001b3ull ^
                                     uint64_t(int64_t(std::floor(y * 250.0))));
    const double grain = (double(cell >> 11) / double(1ull << 53) - 0.5) * 0.12;
    return base * (1.0 + pattern + grain);
}

}  // namespace

Scene buildScene(const SceneConfig& cfg) {
    if (cfg.blobSizeMin <= 0 || cfg.blobSizeMax < cfg.blobSizeMin)
        throw std::invalid_argument("SceneConfig: invalid blob size range");
    if (cfg.planeDepth <= cfg.blobSizeMax)
        throw std::invalid_argument("SceneConfig: plane depth must exceed blob height");

    Scene scene;
    scene.cfg = cfg;
    scene.intrinsics = CameraIntrinsics(cfg.focal, cfg.focal, cfg.imageW / 2.0, cfg.imageH / 2.0,
                                        cfg.imageW, cfg.imageH);

    const Path path = makePath(cfg);
    const double length = cfg.speed * cfg.frames / cfg.fps;

    std::mt19937_64 rng(splitmix64(cfg.seed));
    std::uniform_int_distribution<int> countDist(cfg.blobCountMin, cfg.blobCountMax);
    std::uniform_real_distribution<double> sDist(-0.6, length + 0.6);
    std::uniform_real_distribution<double> latDist(-cfg.lateralBand, cfg.lateralBand);
    std::uniform_real_distribution<double> sizeDist(cfg.blobSizeMin, cfg.blobSizeMax);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.03);

    // Class palettes deliberately overlap: a single noisy frame is ambiguous,
    // several fused frames are not.
    const Eigen::Vector3d cropColor(0.20, 0.55, 0.25);
    const Eigen::Vector3d weedColor(0.32, 0.47, 0.20);

    const int count = countDist(rng);
    scene.blobs.reserve(count);
    for (int i = 0; i < count; ++i) {
        Blob b;
        const double s = sDist(rng);
        const double lat = latDist(rng);
        const double r = sizeDist(rng);
        b.semiAxes = {r, r, 0.6 * r};
        b.center = path.position(s) + lat * path.lateral(s);
        b.center.z() = cfg.planeDepth - 0.4 * b.semiAxes.z();
        b.classId = unit(rng) < 0.6 ? 1 : 2;
        const Eigen::Vector3d& base = b.classId == 1 ? cropColor : weedColor;
        b.baseColor = base + Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
        scene.blobs.push_back(b);
    }

    scene.poses.reserve(cfg.frames);
    for (int f = 0; f < cfg.frames; ++f) {
        const double s = cfg.speed * f / cfg.fps;
        scene.poses.emplace_back(path.orientation(s), path.position(s));
    }
    return scene;
}

RayHit renderRay(const Scene& scene, const Pose& camPose, const Eigen::Vector3d& rayDirCam) {
    const Eigen::Vector3d o = camPose.translation();
    const Eigen::Vector3d d = camPose.rotation() * rayDirCam;

    RayHit hit;
    double bestT = -1.0;

    if (d.z() > 1e-9) {
        const double t = (scene.cfg.planeDepth - o.z()) / d.z();
        if (t > 0) {
            bestT = t;
            const Eigen::Vector3d p = o + t * d;
            hit.classId = 0;
            hit.color = groundColor(p.x(), p.y());
        }
    }

    for (const Blob& b : scene.blobs) {
        const Eigen::Vector3d e = (o - b.center).cwiseQuotient(b.semiAxes);
        const Eigen::Vector3d f = d.cwiseQuotient(b.semiAxes);
        const double a = f.squaredNorm();
        const double bb = 2.0 * e.dot(f);
        const double c = e.squaredNorm() - 1.0;
        const double disc = bb * bb - 4.0 * a * c;
        if (disc < 0) continue;
        const double sq = std::sqrt(disc);
        double t = (-bb - sq) / (2.0 * a);
        if (t <= 0) t = (-bb + sq) / (2.0 * a);
        if (t <= 0) continue;
        if (bestT < 0 || t < bestT) {
            bestT = t;
            const Eigen::Vector3d p = o + t * d;
            Eigen::Vector3d n =
                (p - b.center).cwiseQuotient(b.semiAxes.cwiseProduct(b.semiAxes)).normalized();
            const double lambert = std::max(0.3, -n.dot(d.normalized()));
            hit.classId = b.classId;
            hit.color = b.baseColor * lambert;
        }
    }

    // Ray direction is the unnormalized pinhole ray (dx, dy, 1), so the ray
    // parameter is the camera z-depth directly.
    hit.depth = bestT;
    return hit;
}

RenderedFrame renderFrame(const Scene& scene, int frameIndex) {
    const SceneConfig& cfg = scene.cfg;
    const CameraIntrinsics& k = scene.intrinsics;
    const Pose& pose = scene.poses.at(frameIndex);

    // Per-frame appearance flicker, one offset per blob, independent of which
    // blobs end up visible.
    std::vector<Eigen::Vector3d> flicker(scene.blobs.size());
    for (size_t i = 0; i < scene.blobs.size(); ++i) {
        std::mt19937_64 rng(splitmix64(cfg.seed ^ (uint64_t(frameIndex) << 20) ^ (i + 1)));
        std::normal_distribution<double> g(0.0, cfg.blobFlickerSigma);
        flicker[i] = {g(rng), g(rng), g(rng)};
    }

    RenderedFrame out;
    out.rgb = RgbImage(cfg.imageH, cfg.imageW);
    out.depth = DepthImage(cfg.imageH, cfg.imageW, 0.0f);
    out.labels = Grid<uint8_t>(cfg.imageH, cfg.imageW, 0);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < cfg.imageH; ++y) {
        // Row-seeded RNG keeps output bitwise identical under any schedule.
        std::mt19937_64 rng(
            splitmix64(cfg.seed ^ 0xabcdef12345ull ^ (uint64_t(frameIndex) << 24) ^ uint64_t(y)));
        std::normal_distribution<double> g(0.0, cfg.pixelNoiseSigma);
        for (int x = 0; x < cfg.imageW; ++x) {
            const Eigen::Vector3d dir((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);

            // Inline re-trace keeping the blob index for flicker lookup.
            const Eigen::Vector3d o = pose.translation();
            const Eigen::Vector3d d = pose.rotation() * dir;
            double bestT = -1.0;
            int blobIdx = -1;
            int classId = 0;
            Eigen::Vector3d color = Eigen::Vector3d::Zero();
            if (d.z() > 1e-9) {
                const double t = (cfg.planeDepth - o.z()) / d.z();
                if (t > 0) {
                    bestT = t;
                    const Eigen::Vector3d p = o + t * d;
                    color = groundColor(p.x(), p.y());
                }
            }
            for (size_t i = 0; i < scene.blobs.size(); ++i) {
                const Blob& b = scene.blobs[i];
                const Eigen::Vector3d e = (o - b.center).cwiseQuotient(b.semiAxes);
                const Eigen::Vector3d f = d.cwiseQuotient(b.semiAxes);
                const double a = f.squaredNorm();
                const double bb = 2.0 * e.dot(f);
                const double c = e.squaredNorm() - 1.0;
                const double disc = bb * bb - 4.0 * a * c;
                if (disc < 0) continue;
                const double sq = std::sqrt(disc);
                double t = (-bb - sq) / (2.0 * a);
                if (t <= 0) t = (-bb + sq) / (2.0 * a);
                if (t <= 0) continue;
                if (bestT < 0 || t < bestT) {
                    bestT = t;
                    blobIdx = int(i);
                    classId = b.classId;
                    Eigen::Vector3d n = (o + t * d - b.center)
                                            .cwiseQuotient(b.semiAxes.cwiseProduct(b.semiAxes))
                                            .normalized();
                    color = b.baseColor * std::max(0.3, -n.dot(d.normalized()));
                }
            }

            const double noise[3] = {g(rng), g(rng), g(rng)};
            if (bestT > 0) {
                out.depth.at(y, x) = float(bestT);
                out.labels.at(y, x) = uint8_t(classId);
                if (blobIdx >= 0) color += flicker[blobIdx];
            }
            for (int ch = 0; ch < 3; ++ch) {
                const double v = std::clamp(color[ch] + noise[ch], 0.0, 1.0);
                out.rgb.at(y, x)[ch] = uint8_t(std::lround(v * 255.0));
            }
        }
    }
    return out;
}

void generateSequence(const SceneConfig& cfg, const std::filesystem::path& outDir) {
    namespace fs = std::filesystem;
    const Scene scene = buildScene(cfg);

    fs::create_directories(outDir / "frames");
    fs::create_directories(outDir / "depth");
    fs::create_directories(outDir / "labels");

    writeIntrinsics(outDir / "intrinsics.json", scene.intrinsics);

    char name[32];
    for (int f = 0; f < cfg.frames; ++f) {
        RenderedFrame frame = renderFrame(scene, f);
        std::snprintf(name, sizeof(name), "%06d", f);
        writePpm(outDir / "frames" / (std::string(name) + ".ppm"), frame.rgb);
        writeDpt(outDir / "depth" / (std::string(name) + ".dpt"), frame.depth);
        if (f >= cfg.labelStart && (f - cfg.labelStart) % cfg.labelStride == 0)
            writePgm(outDir / "labels" / (std::string(name) + ".pgm"), frame.labels);
    }

    std::vector<OdometryReading> gt, wheel;
    std::mt19937_64 wheelRng(splitmix64(cfg.seed ^ 0x9e3779b9ull));
    const NoiseSpec stepNoise(cfg.wheelSigmaT, cfg.wheelSigmaR);
    for (int f = 0; f < cfg.frames; ++f) {
        const double ts = f / cfg.fps;
        gt.push_back({ts, scene.poses[f]});
        if (f == 0) {
            wheel.push_back({ts, scene.poses[0]});
        } else {
            const Pose rel = scene.poses[f - 1].inverse() * scene.poses[f];
            wheel.push_back({ts, wheel.back().pose * injectNoise(rel, stepNoise, wheelRng)});
        }
    }
    writeTrajectory(outDir / "groundtruth_trajectory.txt", gt);
    writeTrajectory(outDir / "trajectory.txt", wheel);

    nlohmann::json j;
    j["preset"] = cfg.trajectory == TrajectoryPreset::NadirStrafe ? "nadir-strafe" : "oblique-arc";
    j["frames"] = cfg.frames;
    j["seed"] = cfg.seed;
    j["plane_depth"] = cfg.planeDepth;
    j["speed"] = cfg.speed;
    j["fps"] = cfg.fps;
    j["num_classes"] = cfg.numClasses;
    j["label_stride"] = cfg.labelStride;
    j["label_start"] = cfg.labelStart;
    j["pixel_noise_sigma"] = cfg.pixelNoiseSigma;
    j["blob_flicker_sigma"] = cfg.blobFlickerSigma;
    j["blobs"] = nlohmann::json::array();
    for (const Blob& b : scene.blobs) {
        j["blobs"].push_back({{"center", {b.center.x(), b.center.y(), b.center.z()}},
                              {"semi_axes", {b.semiAxes.x(), b.semiAxes.y(), b.semiAxes.z()}},
                              {"class", b.classId},
                              {"color", {b.baseColor.x(), b.baseColor.y(), b.baseColor.z()}}});
    }
    std::ofstream(outDir / "scene.json") << j.dump(2) << "\n";
}

SceneConfig presetConfig(const std::string& preset) {
    SceneConfig cfg;
    if (preset == "sb") {
        cfg.trajectory = TrajectoryPreset::NadirStrafe;
        cfg.speed = 0.4;
    } else if (preset == "bup") {
        cfg.trajectory = TrajectoryPreset::ObliqueArc;
        cfg.speed = 0.2;
        cfg.blobSizeMin = 0.045;
        cfg.blobSizeMax = 0.10;
    } else {
        throw std::invalid_argument("unknown scene preset: " + preset);
    }
    return cfg;
}

}  // namespace stwarp

#include <doctest.h>

#include <random>

#include "stwarp/odometry.hpp"
#include "stwarp/synthscene.hpp"

using namespace stwarp;

namespace {

std::vector<OdometryReading> straightLog(double speed, double fps, int n) {
    std::vector<OdometryReading> log;
    for (int i = 0; i < n; ++i) {
        const double t = i / fps;
        log.push_back({t, Pose(Eigen::Quaterniond::Identity(), {speed * t, 0, 0})});
    }
    return log;
}

double rotationAngle(const Pose& p) {
    return Eigen::AngleAxisd(p.rotation()).angle();
}

Scene testScene(uint64_t seed = 3) {
    SceneConfig cfg;
    cfg.frames = 12;
    cfg.seed = seed;
    return buildScene(cfg);
}

}  // namespace

TEST_CASE("pose interpolation matches the lerp and slerp oracle") {
    const Pose a(Eigen::Quaterniond::Identity(), {0, 0, 0});
    const Pose b(Eigen::Quaterniond(Eigen::AngleAxisd(0.6, Eigen::Vector3d::UnitZ())),
                 {1.0, 2.0, 0.0});
    const std::vector<OdometryReading> log{{0.0, a}, {2.0, b}};

    CHECK(interpolatePose(log, 0.0).isApprox(a, 1e-12));
    CHECK(interpolatePose(log, 2.0).isApprox(b, 1e-12));

    const Pose mid = interpolatePose(log, 1.0);
    CHECK((mid.translation() - Eigen::Vector3d(0.5, 1.0, 0.0)).norm() < 1e-12);
    const Eigen::Quaterniond expected = a.rotation().slerp(0.5, b.rotation());
    CHECK(mid.rotation().angularDistance(expected) < 1e-12);

    CHECK_THROWS_AS(interpolatePose(log, -0.1), OdometryError);
    CHECK_THROWS_AS(interpolatePose(log, 2.1), OdometryError);
    CHECK_THROWS_AS(interpolatePose({}, 0.0), OdometryError);
}

TEST_CASE("relative pose identity, chain rule and constant-velocity log") {
    const auto log = straightLog(0.4, 15.0, 31);  // two seconds at 0.4 m/s

    CHECK(relativePose(log, 1.0, 1.0).isApprox(Pose::identity(), 1e-12));

    const Pose ab = relativePose(log, 0.2, 0.9);
    const Pose bc = relativePose(log, 0.9, 1.7);
    const Pose ac = relativePose(log, 0.2, 1.7);
    CHECK((ab * bc).isApprox(ac, 1e-9));

    // one second apart: 0.4 m forward along x
    const Pose step = relativePose(log, 0.5, 1.5);
    CHECK((step.translation() - Eigen::Vector3d(0.4, 0, 0)).norm() < 1e-9);
    CHECK(rotationAngle(step) < 1e-12);
}

TEST_CASE("noise injection statistics and manifold validity") {
    const Pose base(Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY())),
                    {1, 2, 3});
    std::mt19937_64 rng(7);

    CHECK(injectNoise(base, NoiseSpec(0.0, 0.0), rng).isApprox(base, 1e-12));
    CHECK_THROWS_AS(NoiseSpec(-1.0, 0.1), OdometryError);

    const NoiseSpec spec(0.02, 0.5);
    const int n = 4000;
    Eigen::Vector3d sumT = Eigen::Vector3d::Zero(), sumT2 = Eigen::Vector3d::Zero();
    double sumAngle = 0.0;
    for (int i = 0; i < n; ++i) {
        const Pose noisy = injectNoise(base, spec, rng);
        const Eigen::Matrix3d r = noisy.rotationMatrix();
        CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        const Eigen::Vector3d dt = noisy.translation() - base.translation();
        sumT += dt;
        sumT2 += dt.cwiseProduct(dt);
        sumAngle += base.rotation().angularDistance(noisy.rotation());
    }
    for (int a = 0; a < 3; ++a) {
        const double mean = sumT[a] / n;
        const double var = sumT2[a] / n - mean * mean;
        CHECK(std::abs(mean) < 0.002);  // ~4 sigma of the mean estimator
        CHECK(std::sqrt(var) == doctest::Approx(spec.sigmaT).epsilon(0.10));
    }
    // |N(0, s^2 I_3)| has mean s * sqrt(8 / pi)
    const double s = spec.sigmaR * M_PI / 180.0;
    CHECK(sumAngle / n == doctest::Approx(s * std::sqrt(8.0 / M_PI)).epsilon(0.10));
}

TEST_CASE("icp on an identical depth pair stays at identity") {
    const Scene scene = testScene();
    const DepthImage depth = renderFrame(scene, 5).depth;

    std::mt19937_64 rng(11);
    const Pose init = injectNoise(Pose::identity(), NoiseSpec(0.003, 0.1), rng);
    const RefineResult r = refineWithDepth(init, depth, depth, scene.intrinsics);

    CHECK(r.converged);
    CHECK(r.pose.translation().norm() < 1e-3);
    CHECK(rotationAngle(r.pose) < 2e-3);
}

TEST_CASE("icp refinement beats the noisy wheel initialization") {
    const Scene scene = testScene(5);
    const int i = 4, j = 5;
    const DepthImage di = renderFrame(scene, i).depth;
    const DepthImage dj = renderFrame(scene, j).depth;
    const Pose truth = scene.poses[j].inverse() * scene.poses[i];

    std::mt19937_64 rng(13);
    const Pose init = injectNoise(truth, NoiseSpec(0.004, 0.15), rng);
    const double initErr = (init.translation() - truth.translation()).norm();
    REQUIRE(initErr > 1e-3);

    const RefineResult r = refineWithDepth(init, di, dj, scene.intrinsics);
    CHECK(r.converged);
    const double refErr = (r.pose.translation() - truth.translation()).norm();
    CHECK(refErr < initErr);
    CHECK(refErr < 1e-3);
    CHECK(truth.rotation().angularDistance(r.pose.rotation()) < 2e-3);
}

TEST_CASE("featureless fronto-parallel plane is degenerate") {
    const CameraIntrinsics k(80.0, 80.0, 48.0, 32.0, 96, 64);
    const DepthImage flat(64, 96, 1.2f);
    CHECK_THROWS_AS(refineWithDepth(Pose::identity(), flat, flat, k),
                    DegenerateGeometryError);
}

TEST_CASE("too few valid depths is degenerate") {
    const CameraIntrinsics k(80.0, 80.0, 48.0, 32.0, 96, 64);
    DepthImage sparse(64, 96, 0.0f);  // invalid everywhere
    sparse.at(10, 10) = 1.0f;
    const DepthImage target(64, 96, 1.0f);
    CHECK_THROWS_AS(refineWithDepth(Pose::identity(), sparse, target, k),
                    DegenerateGeometryError);
}

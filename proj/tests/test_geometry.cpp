#include <doctest.h>

#include <random>

#include "stwarp/geometry.hpp"

using namespace stwarp;

namespace {

Pose randomPose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
    return Pose(q, Eigen::Vector3d(u(rng), u(rng), u(rng)));
}

// Dense 4x4 homogeneous-matrix oracle.
Eigen::Vector3d matrixTransform(const Eigen::Matrix4d& m, const Eigen::Vector3d& p) {
    Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
    return (m * h).head<3>();
}

const CameraIntrinsics kCam(100.0, 100.0, 50.0, 50.0, 100, 100);

}  // namespace

TEST_CASE("project principal ray and closed form") {
    CHECK(project({0, 0, 1}, kCam).isApprox(Pixel(50, 50)));
    CHECK(project({0.1, 0, 1}, kCam).isApprox(Pixel(60, 50)));
    CHECK_THROWS_AS(project({0, 0, -1}, kCam), GeometryError);
    CHECK_THROWS_AS(project({0, 0, 0}, kCam), GeometryError);
}

TEST_CASE("backproject inverts projection") {
    CHECK(backproject({50, 50}, 2.0, kCam).isApprox(Point3(0, 0, 2)));
    CHECK(backproject({60, 50}, 1.0, kCam).isApprox(Point3(0.1, 0, 1)));
    CHECK_THROWS_AS(backproject({10, 10}, 0.0, kCam), GeometryError);
    CHECK_THROWS_AS(backproject({10, 10}, -1.0, kCam), GeometryError);
    CHECK_THROWS_AS(backproject({10, 10}, std::nan(""), kCam), GeometryError);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> px(0.0, 99.0), depth(0.05, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const Pixel q(px(rng), px(rng));
        const double d = depth(rng);
        const Pixel back = project(backproject(q, d, kCam), kCam);
        CHECK((back - q).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("pose invariants") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const Pose t = randomPose(rng);
        const Eigen::Matrix3d r = t.rotationMatrix();
        CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((t.inverse() * t).isApprox(Pose::identity(), 1e-9));

        const Point3 p(0.3, -0.2, 1.5);
        CHECK((transformPoint(t.inverse(), transformPoint(t, p)) - p).norm() < 1e-9);
    }
}

TEST_CASE("transformPoint matches homogeneous matrix oracle") {
    CHECK(transformPoint(Pose::identity(), {1, 2, 3}).isApprox(Point3(1, 2, 3)));
    const Pose shift(Eigen::Quaterniond::Identity(), {0.1, 0, 0});
    CHECK(transformPoint(shift, {0, 0, 1}).isApprox(Point3(0.1, 0, 1)));

    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const Pose a = randomPose(rng), b = randomPose(rng);
        const Point3 p(0.5, -1.0, 2.0);
        CHECK((transformPoint(a, p) - matrixTransform(a.matrix(), p)).norm() < 1e-12);
        // composition associativity against the matrix product oracle
        CHECK((transformPoint(a * b, p) - transformPoint(a, transformPoint(b, p))).norm() <
              1e-9);
        CHECK((matrixTransform(a.matrix() * b.matrix(), p) - transformPoint(a * b, p)).norm() <
              1e-9);
    }
}

TEST_CASE("composeCameraTransform conjugation") {
    std::mt19937_64 rng(17);
    const Pose te = randomPose(rng);
    const Pose tr = randomPose(rng);

    CHECK(composeCameraTransform(tr, Pose::identity()).isApprox(tr, 1e-12));
    CHECK(composeCameraTransform(Pose::identity(), te).isApprox(Pose::identity(), 1e-9));

    const Eigen::Matrix4d oracle = te.matrix().inverse() * tr.matrix() * te.matrix();
    CHECK((composeCameraTransform(tr, te).matrix() - oracle).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("intrinsics invariants enforced") {
    CHECK_THROWS_AS(CameraIntrinsics(-1, 100, 50, 50, 100, 100), GeometryError);
    CHECK_THROWS_AS(CameraIntrinsics(100, 100, 120, 50, 100, 100), GeometryError);
}

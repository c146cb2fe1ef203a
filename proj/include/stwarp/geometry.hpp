#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace stwarp {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pinhole camera parameters. Distortion-free model; continuous pixel
/// coordinates with the origin at the top-left pixel center.
struct CameraIntrinsics {
    double fx = 0, fy = 0;
    double cx = 0, cy = 0;
    int width = 0, height = 0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
        if (fx <= 0 || fy <= 0)
            throw GeometryError("intrinsics: focal lengths must be positive");
        if (cx < 0 || cx >= w || cy < 0 || cy >= h)
            throw GeometryError("intrinsics: principal point outside image");
    }
};

using Point3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;

/// Rigid SE(3) transform. Rotation kept as a unit quaternion, normalized on
/// every construction so long odometry chains do not drift off the manifold.
class Pose {
public:
    Pose() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()) {}

    Pose(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) : q_(q.normalized()), t_(t) {}

    Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& t)
        : q_(Eigen::Quaterniond(rotation).normalized()), t_(t) {}

    static Pose identity() { return Pose(); }

    /// Exponential of a twist: axis-angle rotation plus translation.
    static Pose fromAxisAngle(const Eigen::Vector3d& axisAngle, const Eigen::Vector3d& t) {
        double angle = axisAngle.norm();
        Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
        if (angle > 0)
            q = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axisAngle / angle));
        return Pose(q, t);
    }

    const Eigen::Quaterniond& rotation() const { return q_; }
    const Eigen::Vector3d& translation() const { return t_; }
    Eigen::Matrix3d rotationMatrix() const { return q_.toRotationMatrix(); }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotationMatrix();
        m.topRightCorner<3, 1>() = t_;
        return m;
    }

    Pose inverse() const {
        Eigen::Quaterniond qi = q_.conjugate();
        return Pose(qi, -(qi * t_));
    }

    /// Composition: (a * b)(p) = a(b(p)).
    Pose operator*(const Pose& rhs) const {
        return Pose(q_ * rhs.q_, q_ * rhs.t_ + t_);
    }

    Point3 operator*(const Point3& p) const { return q_ * p + t_; }

    bool isApprox(const Pose& other, double tol = 1e-9) const {
        return (matrix() - other.matrix()).cwiseAbs().maxCoeff() <= tol;
    }

private:
    Eigen::Quaterniond q_;
    Eigen::Vector3d t_;
};

/// Pinhole projection (camera frame: x right, y down, z forward).
inline Pixel project(const Point3& p, const CameraIntrinsics& k) {
    if (!(p.z() > 0))
        throw GeometryError("project: point behind camera (z <= 0)");
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

/// Inverse projection at z-depth d.
inline Point3 backproject(const Pixel& q, double d, const CameraIntrinsics& k) {
    if (!(d > 0) || !std::isfinite(d))
        throw GeometryError("backproject: invalid depth " + std::to_string(d));
    return {(q.x() - k.cx) * d / k.fx, (q.y() - k.cy) * d / k.fy, d};
}

/// Camera-frame transform from a robot-frame transform and the camera
/// extrinsics: Tc = Te^-1 * Tr * Te.
inline Pose composeCameraTransform(const Pose& tr, const Pose& te) {
    return te.inverse() * tr * te;
}

inline Point3 transformPoint(const Pose& t, const Point3& p) { return t * p; }

}  // namespace stwarp

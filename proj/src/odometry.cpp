#include "stwarp/odometry.hpp"

#include <algorithm>
#include <cmath>

namespace stwarp {

Pose interpolatePose(const std::vector<OdometryReading>& log, double t) {
    if (log.empty()) throw OdometryError("interpolatePose: empty log");
    if (t < log.front().timestamp || t > log.back().timestamp)
        throw OdometryError("interpolatePose: timestamp outside log span");

    auto it = std::lower_bound(log.begin(), log.end(), t,
                               [](const OdometryReading& r, double v) { return r.timestamp < v; });
    if (it == log.begin()) return it->pose;
    const OdometryReading& b = *it;
    const OdometryReading& a = *(it - 1);
    if (b.timestamp == a.timestamp) return b.pose;

    const double u = (t - a.timestamp) / (b.timestamp - a.timestamp);
    Eigen::Quaterniond q = a.pose.rotation().slerp(u, b.pose.rotation());
    Eigen::Vector3d tr = (1.0 - u) * a.pose.translation() + u * b.pose.translation();
    return Pose(q, tr);
}

Pose relativePose(const std::vector<OdometryReading>& log, double t_i, double t_j) {
    return interpolatePose(log, t_i).inverse() * interpolatePose(log, t_j);
}

Pose injectNoise(const Pose& p, const NoiseSpec& spec, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector3d dt, dw;
    for (int i = 0; i < 3; ++i) dt[i] = spec.sigmaT * gauss(rng);
    const double sigmaRad = spec.sigmaR * M_PI / 180.0;
    for (int i = 0; i < 3; ++i) dw[i] = sigmaRad * gauss(rng);
    const Pose delta = Pose::fromAxisAngle(dw, dt);
    return delta * p;
}

namespace {

struct TargetCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> normals;
    std::vector<uint8_t> valid;
    int w = 0, h = 0;
};

TargetCloud buildCloud(const DepthImage& depth, const CameraIntrinsics& k) {
    TargetCloud c;
    c.w = depth.width();
    c.h = depth.height();
    c.points.assign(size_t(c.w) * c.h, Eigen::Vector3d::Zero());
    c.normals.assign(size_t(c.w) * c.h, Eigen::Vector3d::Zero());
    c.valid.assign(size_t(c.w) * c.h, 0);

    auto point = [&](int y, int x) -> Eigen::Vector3d {
        const double d = depth.at(y, x);
        return {(x - k.cx) * d / k.fx, (y - k.cy) * d / k.fy, d};
    };

#pragma omp parallel for schedule(static)
    for (int y = 0; y < c.h; ++y) {
        for (int x = 0; x < c.w; ++x) {
            if (!depthValid(depth.at(y, x))) continue;
            c.points[size_t(y) * c.w + x] = point(y, x);
            if (x == 0 || x == c.w - 1 || y == 0 || y == c.h - 1) continue;
            if (!depthValid(depth.at(y, x - 1)) || !depthValid(depth.at(y, x + 1)) ||
                !depthValid(depth.at(y - 1, x)) || !depthValid(depth.at(y + 1, x)))
                continue;
            const Eigen::Vector3d dx = point(y, x + 1) - point(y, x - 1);
            const Eigen::Vector3d dy = point(y + 1, x) - point(y - 1, x);
            Eigen::Vector3d n = dx.cross(dy);
            const double norm = n.norm();
            if (norm < 1e-12) continue;
            n /= norm;
            if (n.z() > 0) n = -n;  // orient toward the camera
            c.normals[size_t(y) * c.w + x] = n;
            c.valid[size_t(y) * c.w + x] = 1;
        }
    }
    return c;
}

}  // namespace

RefineResult refineWithDepth(const Pose& init, const DepthImage& depth_i,
                             const DepthImage& depth_j, const CameraIntrinsics& k,
                             const IcpConfig& cfg) {
    if (depth_i.height() != k.height || depth_i.width() != k.width ||
        depth_j.height() != depth_i.height() || depth_j.width() != depth_i.width())
        throw ShapeError("refineWithDepth: depth dimensions do not match intrinsics");

    const TargetCloud target = buildCloud(depth_j, k);

    RefineResult res;
    res.pose = init;

    for (int iter = 0; iter < cfg.maxIterations; ++iter) {
        const Eigen::Matrix3d r = res.pose.rotationMatrix();
        const Eigen::Vector3d t = res.pose.translation();

        Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
        double sqSum = 0.0;
        int count = 0;

        for (int y = 0; y < depth_i.height(); y += cfg.stride) {
            for (int x = 0; x < depth_i.width(); x += cfg.stride) {
                const float d = depth_i.at(y, x);
                if (!depthValid(d)) continue;
                const Eigen::Vector3d p((x - k.cx) * d / k.fx, (y - k.cy) * d / k.fy, d);
                const Eigen::Vector3d ph = r * p + t;
                if (!(ph.z() > 0)) continue;
                const int u = int(std::floor(k.fx * ph.x() / ph.z() + k.cx + 0.5));
                const int v = int(std::floor(k.fy * ph.y() / ph.z() + k.cy + 0.5));
                if (u < 0 || u >= target.w || v < 0 || v >= target.h) continue;
                const size_t idx = size_t(v) * target.w + u;
                if (!target.valid[idx]) continue;

                const Eigen::Vector3d& q = target.points[idx];
                const Eigen::Vector3d& n = target.normals[idx];
                double resid = n.dot(ph - q);
                if (std::abs(resid) > cfg.residualClamp) continue;

                Eigen::Matrix<double, 6, 1> jac;
                jac.head<3>() = n;
                jac.tail<3>() = ph.cross(n);
                a += jac * jac.transpose();
                b += jac * resid;
                sqSum += resid * resid;
                ++count;
            }
        }

        if (count < cfg.minCorrespondences)
            throw DegenerateGeometryError("refineWithDepth: too few correspondences (" +
                                          std::to_string(count) + ")");

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(a);
        const double minEv = eig.eigenvalues().minCoeff();
        const double maxEv = eig.eigenvalues().maxCoeff();
        if (maxEv <= 0 || minEv / maxEv < cfg.degeneracyEps)
            throw DegenerateGeometryError("refineWithDepth: degenerate geometry");

        const Eigen::Matrix<double, 6, 1> delta = a.ldlt().solve(-b);
        const Pose update = Pose::fromAxisAngle(delta.tail<3>(), delta.head<3>());
        res.pose = update * res.pose;
        res.iterations = iter + 1;
        res.finalRms = count > 0 ? std::sqrt(sqSum / count) : 0.0;

        if (delta.norm() < cfg.updateNormEps) {
            res.converged = true;
            return res;
        }
    }

    // Not converged within the iteration budget: hand back the initial pose.
    res.converged = false;
    res.pose = init;
    return res;
}

}  // namespace stwarp

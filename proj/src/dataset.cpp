#include "stwarp/dataset.hpp"

#include <algorithm>

namespace stwarp {

namespace fs = std::filesystem;

namespace {
std::string frameName(int frame, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d%s", frame, ext);
    return buf;
}
}  // namespace

Dataset::Dataset(const fs::path& root) : root_(root) {
    k_ = readIntrinsics(root / "intrinsics.json");
    wheel_ = readTrajectory(root / "trajectory.txt");
    if (fs::exists(root / "groundtruth_trajectory.txt"))
        groundTruth_ = readTrajectory(root / "groundtruth_trajectory.txt");

    for (const auto& entry : fs::directory_iterator(root / "labels")) {
        const std::string stem = entry.path().stem().string();
        annotated_.push_back(std::stoi(stem));
    }
    std::sort(annotated_.begin(), annotated_.end());
    if (annotated_.empty()) throw IoError("dataset has no annotated frames: " + root.string());
}

std::vector<int> Dataset::splitFrames(Split split) const {
    std::vector<int> out;
    for (size_t i = 0; i < annotated_.size(); ++i) {
        const int slot = int(i % 5);
        const Split s = slot < 3 ? Split::Train : (slot == 3 ? Split::Val : Split::Eval);
        if (s == split) out.push_back(annotated_[i]);
    }
    return out;
}

RgbImage Dataset::rgb(int frame) const {
    return readPpm(root_ / "frames" / frameName(frame, ".ppm"));
}

DepthImage Dataset::depth(int frame) const {
    return readDpt(root_ / "depth" / frameName(frame, ".dpt"), k_.height, k_.width);
}

Grid<uint8_t> Dataset::labels(int frame) const {
    return readPgm(root_ / "labels" / frameName(frame, ".pgm"));
}

Pose Dataset::pose(int frame, PoseSource source) const {
    if (source == PoseSource::GroundTruth) {
        if (groundTruth_.empty()) throw IoError("dataset has no ground-truth trajectory");
        return groundTruth_.at(frame).pose;
    }
    return wheel_.at(frame).pose;
}

SequenceSample Dataset::sample(int lastIndex, int n, Spacing spacing, int deltaMax,
                               std::mt19937_64& rng, PoseSource source) const {
    SequenceSample s;
    s.indices = sampleIndices(spacing, lastIndex, n, deltaMax, rng);
    for (int idx : s.indices) {
        s.rgb.push_back(rgb(idx));
        s.depth.push_back(depth(idx));
    }
    s.labels = labels(lastIndex);

    if (source == PoseSource::Refined) {
        // Chain pairwise ICP-refined transforms from the wheel initialization.
        s.poses.push_back(pose(s.indices[0], PoseSource::Wheel));
        for (size_t i = 1; i < s.indices.size(); ++i) {
            const Pose prev = pose(s.indices[i - 1], PoseSource::Wheel);
            const Pose curr = pose(s.indices[i], PoseSource::Wheel);
            // tc maps frame i-1 points into frame i
            const Pose init = curr.inverse() * prev;
            Pose refined = init;
            try {
                refined = refineWithDepth(init, s.depth[i - 1], s.depth[i], k_).pose;
            } catch (const DegenerateGeometryError&) {
                // keep wheel initialization
            }
            s.poses.push_back(s.poses.back() * refined.inverse());
        }
    } else {
        for (int idx : s.indices) s.poses.push_back(pose(idx, source));
    }
    return s;
}

std::vector<uint64_t> Dataset::classAreas(Split split, int numClasses) const {
    std::vector<uint64_t> areas(numClasses, 0);
    for (int frame : splitFrames(split)) {
        const Grid<uint8_t> lbl = labels(frame);
        for (int y = 0; y < lbl.height(); ++y)
            for (int x = 0; x < lbl.width(); ++x) {
                const int c = lbl.at(y, x);
                if (c < numClasses) ++areas[c];
            }
    }
    return areas;
}

}  // namespace stwarp

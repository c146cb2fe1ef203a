#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include "stwarp/io.hpp"
#include "stwarp/odometry.hpp"
#include "stwarp/sequencing.hpp"

namespace stwarp {

enum class PoseSource { Wheel, GroundTruth, Refined };

/// N frames of RGB-D plus robot poses; labels exist for the last frame only.
struct SequenceSample {
    std::vector<int> indices;
    std::vector<RgbImage> rgb;
    std::vector<DepthImage> depth;
    std::vector<Pose> poses;  // absolute robot poses, selected pose source
    Grid<uint8_t> labels;     // last frame
};

enum class Split { Train, Val, Eval };

/// Dataset directory produced by the synthetic generator (or anything with
/// the same layout): frames/NNNNNN.ppm, depth/NNNNNN.dpt, labels/NNNNNN.pgm,
/// trajectory.txt, intrinsics.json, optional groundtruth_trajectory.txt.
class Dataset {
public:
    explicit Dataset(const std::filesystem::path& root);

    const CameraIntrinsics& intrinsics() const { return k_; }
    int frameCount() const { return int(wheel_.size()); }
    const std::vector<int>& annotatedFrames() const { return annotated_; }

    /// Annotated frames assigned round-robin: 3 train, 1 val, 1 eval.
    std::vector<int> splitFrames(Split split) const;

    RgbImage rgb(int frame) const;
    DepthImage depth(int frame) const;
    Grid<uint8_t> labels(int frame) const;
    Pose pose(int frame, PoseSource source) const;

    /// Assemble a sequence ending at an annotated frame. PoseSource::Refined
    /// runs pairwise ICP seeded from the wheel poses.
    SequenceSample sample(int lastIndex, int n, Spacing spacing, int deltaMax,
                          std::mt19937_64& rng, PoseSource source = PoseSource::Wheel) const;

    /// Per-class ground-truth pixel areas over a split (for loss weights).
    std::vector<uint64_t> classAreas(Split split, int numClasses) const;

private:
    std::filesystem::path root_;
    CameraIntrinsics k_;
    std::vector<OdometryReading> wheel_;
    std::vector<OdometryReading> groundTruth_;  // empty if absent
    std::vector<int> annotated_;
};

}  // namespace stwarp

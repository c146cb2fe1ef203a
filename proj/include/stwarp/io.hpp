#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "stwarp/geometry.hpp"
#include "stwarp/image.hpp"
#include "stwarp/odometry.hpp"

namespace stwarp {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using RgbImage = Grid<std::array<uint8_t, 3>>;

// Binary PPM (P6) / PGM (P5).
void writePpm(const std::filesystem::path& path, const RgbImage& img);
RgbImage readPpm(const std::filesystem::path& path);
void writePgm(const std::filesystem::path& path, const Grid<uint8_t>& img);
Grid<uint8_t> readPgm(const std::filesystem::path& path);

// Raw depth raster: little-endian IEEE-754 single precision, row-major.
// Dimensions come from the sidecar intrinsics manifest.
void writeDpt(const std::filesystem::path& path, const DepthImage& depth);
DepthImage readDpt(const std::filesystem::path& path, int height, int width);

// Intrinsics manifest: {"fx","fy","cx","cy","width","height"}.
void writeIntrinsics(const std::filesystem::path& path, const CameraIntrinsics& k);
CameraIntrinsics readIntrinsics(const std::filesystem::path& path);

// Trajectory file: one line per frame,
// "timestamp tx ty tz qx qy qz qw".
void writeTrajectory(const std::filesystem::path& path, const std::vector<OdometryReading>& log);
std::vector<OdometryReading> readTrajectory(const std::filesystem::path& path);

/// False-color visualization of a scalar field (used for registered-map and
/// depth inspection dumps).
RgbImage falseColor(const Grid<float>& field, const Grid<uint8_t>* mask = nullptr);

}  // namespace stwarp

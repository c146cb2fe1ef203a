#include "stwarp/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stwarp {

namespace {

std::ofstream openOut(const std::filesystem::path& path, bool binary = true) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    return f;
}

std::ifstream openIn(const std::filesystem::path& path, bool binary = true) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    return f;
}

// Skips whitespace and '#' comments in PNM headers.
int pnmInt(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = in.get();
        c = in.get();
    }
    int v = 0;
    bool any = false;
    while (std::isdigit(c)) {
        v = v * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw IoError("malformed PNM header");
    return v;
}

}  // namespace

void writePpm(const std::filesystem::path& path, const RgbImage& img) {
    auto f = openOut(path);
    f << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size() * 3));
}

RgbImage readPpm(const std::filesystem::path& path) {
    auto f = openIn(path);
    char magic[2];
    f.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') throw IoError("not a P6 PPM: " + path.string());
    const int w = pnmInt(f), h = pnmInt(f), maxv = pnmInt(f);
    if (maxv != 255) throw IoError("unsupported PPM maxval");
    RgbImage img(h, w);
    f.read(reinterpret_cast<char*>(img.data()), std::streamsize(img.size() * 3));
    if (!f) throw IoError("truncated PPM: " + path.string());
    return img;
}

void writePgm(const std::filesystem::path& path, const Grid<uint8_t>& img) {
    auto f = openOut(path);
    f << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size()));
}

Grid<uint8_t> readPgm(const std::filesystem::path& path) {
    auto f = openIn(path);
    char magic[2];
    f.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw IoError("not a P5 PGM: " + path.string());
    const int w = pnmInt(f), h = pnmInt(f), maxv = pnmInt(f);
    if (maxv != 255) throw IoError("unsupported PGM maxval");
    Grid<uint8_t> img(h, w);
    f.read(reinterpret_cast<char*>(img.data()), std::streamsize(img.size()));
    if (!f) throw IoError("truncated PGM: " + path.string());
    return img;
}

static_assert(std::endian::native == std::endian::little,
              "depth raster IO assumes a little-endian host");

void writeDpt(const std::filesystem::path& path, const DepthImage& depth) {
    auto f = openOut(path);
    f.write(reinterpret_cast<const char*>(depth.data()),
            std::streamsize(depth.size() * sizeof(float)));
}

DepthImage readDpt(const std::filesystem::path& path, int height, int width) {
    auto f = openIn(path);
    DepthImage depth(height, width);
    f.read(reinterpret_cast<char*>(depth.data()),
           std::streamsize(depth.size() * sizeof(float)));
    if (!f) throw IoError("truncated depth raster: " + path.string());
    return depth;
}

void writeIntrinsics(const std::filesystem::path& path, const CameraIntrinsics& k) {
    nlohmann::json j{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
                     {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
    openOut(path, false) << j.dump(2) << "\n";
}

CameraIntrinsics readIntrinsics(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        openIn(path, false) >> j;
        return CameraIntrinsics(j.at("fx"), j.at("fy"), j.at("cx"), j.at("cy"), j.at("width"),
                                j.at("height"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed intrinsics manifest " + path.string() + ": " + e.what());
    }
}

void writeTrajectory(const std::filesystem::path& path,
                     const std::vector<OdometryReading>& log) {
    auto f = openOut(path, false);
    f.precision(17);
    for (const auto& r : log) {
        const auto& t = r.pose.translation();
        const auto& q = r.pose.rotation();
        f << r.timestamp << " " << t.x() << " " << t.y() << " " << t.z() << " " << q.x() << " "
          << q.y() << " " << q.z() << " " << q.w() << "\n";
    }
}

std::vector<OdometryReading> readTrajectory(const std::filesystem::path& path) {
    auto f = openIn(path, false);
    std::vector<OdometryReading> log;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double ts, tx, ty, tz, qx, qy, qz, qw;
        if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
            throw IoError("malformed trajectory line: " + line);
        log.push_back({ts, Pose(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz})});
    }
    return log;
}

RgbImage falseColor(const Grid<float>& field, const Grid<uint8_t>* mask) {
    float lo = 0, hi = 0;
    bool first = true;
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) {
            if (mask && !mask->at(y, x)) continue;
            const float v = field.at(y, x);
            if (first || v < lo) lo = v;
            if (first || v > hi) hi = v;
            first = false;
        }
    const float span = hi > lo ? hi - lo : 1.0f;

    RgbImage img(field.height(), field.width());
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) {
            if (mask && !mask->at(y, x)) {
                img.at(y, x) = {32, 32, 32};
                continue;
            }
            const float t = (field.at(y, x) - lo) / span;
            // blue -> cyan -> yellow -> red
            const float r = std::clamp(2.0f * t - 0.5f, 0.0f, 1.0f);
            const float g = std::clamp(1.5f - std::abs(2.0f * t - 1.0f), 0.0f, 1.0f);
            const float b = std::clamp(1.5f - 2.0f * t, 0.0f, 1.0f);
            img.at(y, x) = {uint8_t(255 * r), uint8_t(255 * g), uint8_t(255 * b)};
        }
    return img;
}

}  // namespace stwarp

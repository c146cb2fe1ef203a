#include "stwarp/checkpoint.hpp"

#include <bit>
#include <fstream>

#include "stwarp/io.hpp"

namespace stwarp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

void writeCheckpoint(const std::filesystem::path& path, const std::vector<ParamBlob>& params,
                     const nlohmann::json& meta) {
    nlohmann::json header;
    header["meta"] = meta;
    header["params"] = nlohmann::json::array();
    for (const auto& p : params) {
        size_t expect = 1;
        for (int d : p.shape) expect *= size_t(d);
        if (expect != p.values.size())
            throw IoError("writeCheckpoint: shape/value mismatch for " + p.name);
        header["params"].push_back({{"name", p.name}, {"shape", p.shape}});
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << header.dump() << "\n";
    for (const auto& p : params)
        f.write(reinterpret_cast<const char*>(p.values.data()),
                std::streamsize(p.values.size() * sizeof(float)));
}

Checkpoint readCheckpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::string headerLine;
    if (!std::getline(f, headerLine)) throw IoError("truncated checkpoint: " + path.string());

    Checkpoint ckpt;
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(headerLine);
        ckpt.meta = header.value("meta", nlohmann::json::object());
        for (const auto& pj : header.at("params")) {
            ParamBlob p;
            p.name = pj.at("name");
            p.shape = pj.at("shape").get<std::vector<int>>();
            size_t n = 1;
            for (int d : p.shape) n *= size_t(d);
            p.values.resize(n);
            f.read(reinterpret_cast<char*>(p.values.data()),
                   std::streamsize(n * sizeof(float)));
            if (!f) throw IoError("truncated checkpoint payload: " + path.string());
            ckpt.params.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed checkpoint header in " + path.string() + ": " + e.what());
    }
    return ckpt;
}

}  // namespace stwarp

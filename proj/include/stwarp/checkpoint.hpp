#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace stwarp {

/// One named parameter tensor in serialization order.
struct ParamBlob {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
};

/// Checkpoint layout: one JSON header line ({"meta":..., "params":[{name,
/// shape}...]}) terminated by '\n', followed by the flat little-endian
/// float32 values of every parameter in header order.
void writeCheckpoint(const std::filesystem::path& path, const std::vector<ParamBlob>& params,
                     const nlohmann::json& meta = nlohmann::json::object());

struct Checkpoint {
    std::vector<ParamBlob> params;
    nlohmann::json meta;
};

Checkpoint readCheckpoint(const std::filesystem::path& path);

}  // namespace stwarp

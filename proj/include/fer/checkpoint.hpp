#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fer {

/// One serialized tensor: identifier, shape, row-major values.
struct NamedTensorData {
    std::string id;
    std::vector<int> shape;
    std::vector<double> data;
};

/// Flat parameter container with a version header and an optional JSON
/// header string. All integers and doubles are stored little-endian.
struct ParamContainer {
    std::string json_header;
    std::vector<NamedTensorData> tensors;
};

void save_param_container(const std::filesystem::path& path, const ParamContainer& container);
ParamContainer load_param_container(const std::filesystem::path& path);

}  // namespace fer

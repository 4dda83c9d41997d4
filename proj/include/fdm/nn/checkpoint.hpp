#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fdm/nn/tensor.hpp"

namespace fdm::nn {

// Versioned binary container: magic "NNCP", u32 version, u32 entry count,
// then per entry a length-prefixed UTF-8 name, u32 ndim and u32 dims; all
// parameter blobs follow in manifest order as row-major little-endian f32.
void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, Tensor>>& entries);
std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::filesystem::path& path);

}  // namespace fdm::nn

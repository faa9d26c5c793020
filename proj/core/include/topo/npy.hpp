#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace topo {

/// Arbitrary-rank float array, C-order, as stored in an NPY file.
struct NpyArray {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    std::size_t size() const { return data.size(); }
};

/// Serializes `data` with the given shape as NPY format v1.0, dtype <f4,
/// C-order. The header dict is space-padded so the total header length
/// (magic + version + length field + dict + '\n') is a multiple of 64.
void write_npy(const std::filesystem::path& path,
               std::span<const std::size_t> shape,
               std::span<const float> data);

/// Parses an NPY v1.x file holding a little-endian C-order float array
/// (dtype <f4 or <f8; doubles are narrowed to float). Anything else —
/// fortran order, big-endian or non-float dtypes, truncated payload —
/// raises std::runtime_error naming the problem.
NpyArray read_npy(const std::filesystem::path& path);

}  // namespace topo

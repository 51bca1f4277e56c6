#pragma once

// INVT tensor container.
//
//   offset  field
//   0       magic "INVT"
//   4       u32 format version (1)
//   8       u32 dtype code (1 = float32)
//   12      u32 rank
//   16      u64 dims[rank]
//   ...     float32 data, row-major
//
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace invlint {

inline constexpr std::uint32_t kInvtVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 1;

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> data;

    std::uint64_t numel() const;
};

std::uint64_t numel(std::span<const std::uint64_t> dims);

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> data);
Tensor read_tensor(const std::filesystem::path& path);

/// Streams data into a container whose dims are known up front.
class TensorWriter {
public:
    TensorWriter(const std::filesystem::path& path, std::vector<std::uint64_t> dims);
    void append(std::span<const float> chunk);
    /// Throws unless exactly numel() elements were appended.
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<std::uint64_t> dims_;
    std::uint64_t written_ = 0;
};

/// Random access to the leading-axis slices of a container.
class TensorReader {
public:
    explicit TensorReader(const std::filesystem::path& path);
    const std::vector<std::uint64_t>& dims() const { return dims_; }
    std::uint64_t slice_size() const;
    std::vector<float> read_slice(std::uint64_t index);
    void read_slice(std::uint64_t index, std::span<float> out);

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::vector<std::uint64_t> dims_;
    std::streamoff data_offset_ = 0;
};

} // namespace invlint

#include "invlint/tensor_io.hpp"

#include "invlint/types.hpp"

#include <bit>
#include <cstring>

namespace invlint {

static_assert(std::endian::native == std::endian::little, "INVT I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'I', 'N', 'V', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ConfigError("truncated INVT header: " + path.string());
    return value;
}

void write_header(std::ostream& out, std::span<const std::uint64_t> dims) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kInvtVersion);
    put<std::uint32_t>(out, kDtypeFloat32);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put<std::uint64_t>(out, d);
}

std::vector<std::uint64_t> read_header(std::istream& in, const std::filesystem::path& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("not an INVT container: " + path.string());
    const auto version = get<std::uint32_t>(in, path);
    if (version != kInvtVersion)
        throw ConfigError("unsupported INVT version " + std::to_string(version) + ": " + path.string());
    const auto dtype = get<std::uint32_t>(in, path);
    if (dtype != kDtypeFloat32)
        throw ConfigError("unsupported INVT dtype " + std::to_string(dtype) + ": " + path.string());
    const auto rank = get<std::uint32_t>(in, path);
    std::vector<std::uint64_t> dims(rank);
    for (auto& d : dims) d = get<std::uint64_t>(in, path);
    return dims;
}

} // namespace

std::uint64_t numel(std::span<const std::uint64_t> dims) {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::uint64_t Tensor::numel() const { return invlint::numel(dims); }

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> data) {
    TensorWriter writer(path, {dims.begin(), dims.end()});
    writer.append(data);
    writer.close();
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    Tensor t;
    t.dims = read_header(in, path);
    t.data.resize(t.numel());
    in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!in) throw ConfigError("truncated INVT data: " + path.string());
    return t;
}

TensorWriter::TensorWriter(const std::filesystem::path& path, std::vector<std::uint64_t> dims)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), dims_(std::move(dims)) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    write_header(out_, dims_);
}

void TensorWriter::append(std::span<const float> chunk) {
    if (written_ + chunk.size() > numel(dims_)) throw ConfigError("INVT writer overflow: " + path_.string());
    out_.write(reinterpret_cast<const char*>(chunk.data()), static_cast<std::streamsize>(chunk.size_bytes()));
    written_ += chunk.size();
}

void TensorWriter::close() {
    if (written_ != numel(dims_))
        throw ConfigError("INVT writer closed with " + std::to_string(written_) + " of " +
                          std::to_string(numel(dims_)) + " elements: " + path_.string());
    out_.close();
    if (!out_) throw NumericError("write failed: " + path_.string());
}

TensorReader::TensorReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ConfigError("cannot open " + path.string());
    dims_ = read_header(in_, path);
    if (dims_.empty()) throw ConfigError("rank-0 INVT container has no slices: " + path.string());
    data_offset_ = in_.tellg();
}

std::uint64_t TensorReader::slice_size() const {
    return numel(std::span(dims_).subspan(1));
}

std::vector<float> TensorReader::read_slice(std::uint64_t index) {
    std::vector<float> out(slice_size());
    read_slice(index, out);
    return out;
}

void TensorReader::read_slice(std::uint64_t index, std::span<float> out) {
    if (index >= dims_[0]) throw ConfigError("slice index out of range: " + path_.string());
    if (out.size() != slice_size()) throw ConfigError("slice buffer size mismatch");
    in_.seekg(data_offset_ + static_cast<std::streamoff>(index * slice_size() * sizeof(float)));
    in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()));
    if (!in_) throw ConfigError("truncated INVT data: " + path_.string());
}

} // namespace invlint

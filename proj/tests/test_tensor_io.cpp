#include "invlint/hash.hpp"
#include "invlint/tensor_io.hpp"

#include <doctest.h>

#include <fstream>

using namespace invlint;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "invlint_unit";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("tensor round trip and header layout") {
    const fs::path p = scratch("rt.invt");
    const std::vector<std::uint64_t> dims{2, 3};
    const std::vector<float> data{1, 2, 3, 4, 5, 6.5f};
    write_tensor(p, dims, data);
    const Tensor t = read_tensor(p);
    CHECK(t.dims == dims);
    CHECK(t.data == data);
    CHECK(fs::file_size(p) == 4 + 4 + 4 + 4 + 2 * 8 + 6 * 4);
    std::ifstream in(p, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "INVT");
}

TEST_CASE("streaming writer and slice reader") {
    const fs::path p = scratch("stream.invt");
    TensorWriter w(p, {3, 2, 2});
    for (int i = 0; i < 3; ++i) {
        const std::vector<float> chunk(4, static_cast<float>(i));
        w.append(chunk);
    }
    w.close();
    TensorReader r(p);
    CHECK(r.slice_size() == 4);
    CHECK(r.read_slice(2) == std::vector<float>(4, 2.0f));
    CHECK(r.read_slice(0) == std::vector<float>(4, 0.0f));
    CHECK_THROWS(r.read_slice(3));
}

TEST_CASE("short writes and bad files are rejected") {
    TensorWriter w(scratch("short.invt"), {4});
    const std::vector<float> two(2, 1.0f);
    w.append(two);
    CHECK_THROWS(w.close());

    const fs::path bad = scratch("bad.invt");
    std::ofstream(bad) << "NOPE and more bytes";
    CHECK_THROWS(read_tensor(bad));
    CHECK_THROWS(read_tensor(scratch("does_not_exist.invt")));

    const std::vector<std::uint64_t> dims{5};
    CHECK_THROWS(write_tensor(scratch("mismatch.invt"), dims, two));
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const fs::path p = scratch("hash.txt");
    std::ofstream(p) << "abc";
    CHECK(sha256_file(p) == sha256_hex("abc"));
}

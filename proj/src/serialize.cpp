#include "thermogen/serialize.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace thermogen {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

void write_u32(std::ostream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& os, uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw IoError("truncated stream while reading u32");
    return v;
}

uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw IoError("truncated stream while reading u64");
    return v;
}

std::string read_string(std::istream& is) {
    uint32_t n = read_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw IoError("truncated stream while reading string");
    return s;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    os.write("TGT1", 4);
    write_u32(os, static_cast<uint32_t>(t.shape().size()));
    for (int64_t e : t.shape()) write_u64(os, static_cast<uint64_t>(e));
    os.write(reinterpret_cast<const char*>(t.values().data()),
             static_cast<std::streamsize>(t.values().size() * sizeof(float)));
}

Tensor read_tensor(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TGT1", 4) != 0)
        throw IoError("bad tensor magic, expected TGT1");
    uint32_t rank = read_u32(is);
    if (rank > 8) throw IoError("implausible tensor rank " + std::to_string(rank));
    Shape shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int64_t>(read_u64(is));
    std::vector<float> data(static_cast<size_t>(numel(shape)));
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!is) throw IoError("truncated tensor data");
    return Tensor::from_data(std::move(shape), std::move(data));
}

}  // namespace thermogen

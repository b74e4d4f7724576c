#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "thermogen/tensor.hpp"

namespace thermogen {

// Flat tensor format: magic "TGT1", u32 rank, u64 extents, raw float32
// values. All fields little-endian.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_string(std::ostream& os, const std::string& s);
uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
std::string read_string(std::istream& is);

}  // namespace thermogen

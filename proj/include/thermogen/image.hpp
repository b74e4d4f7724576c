#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermogen/tensor.hpp"

namespace thermogen {

// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct ImageU8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<uint8_t> pixels;

    size_t size() const { return pixels.size(); }
};

// Minimal PNG codec (bit depth 8, gray or RGB, no interlace). Encoding is
// byte-deterministic: same pixels -> same file.
void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

// [0,255] u8 <-> [0,1] float tensor of shape (1, C, H, W).
Tensor image_to_tensor(const ImageU8& img);
ImageU8 tensor_to_image(const Tensor& t);

// [0,1] <-> [-1,1]
Tensor to_model_range(const Tensor& t01);
Tensor to_eval_range(const Tensor& tm1);

// Bilinear resample of a (1,C,H,W) tensor to (1,C,out_h,out_w).
Tensor resize_bilinear(const Tensor& t, int64_t out_h, int64_t out_w);

}  // namespace thermogen

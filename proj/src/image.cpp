#include "thermogen/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace thermogen {

namespace {

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32be(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

void write_chunk(std::vector<uint8_t>& out, const char* type, const std::vector<uint8_t>& data) {
    put_u32be(out, static_cast<uint32_t>(data.size()));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc = crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32be(out, crc);
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

void write_png(const std::string& path, const ImageU8& img) {
    if (img.channels != 1 && img.channels != 3)
        throw ContractError("write_png supports 1 or 3 channels, got " +
                            std::to_string(img.channels));
    if (img.pixels.size() != static_cast<size_t>(img.width) * img.height * img.channels)
        throw ContractError("write_png pixel buffer size mismatch");

    size_t stride = static_cast<size_t>(img.width) * img.channels;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), img.pixels.begin() + y * stride,
                   img.pixels.begin() + (y + 1) * stride);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png deflate failed for " + path);
    comp.resize(comp_len);

    std::vector<uint8_t> file = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::vector<uint8_t> ihdr;
    put_u32be(ihdr, static_cast<uint32_t>(img.width));
    put_u32be(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);                                    // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);            // gray / RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(file, "IHDR", ihdr);
    write_chunk(file, "IDAT", comp);
    write_chunk(file, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(reinterpret_cast<const char*>(file.data()),
             static_cast<std::streamsize>(file.size()));
    if (!os) throw IoError("write failed: " + path);
}

ImageU8 read_png(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    std::vector<uint8_t> file((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
    static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (file.size() < 8 || std::memcmp(file.data(), sig, 8) != 0)
        throw IoError("not a PNG file: " + path);

    ImageU8 img;
    std::vector<uint8_t> idat;
    size_t pos = 8;
    int bit_depth = 0, color_type = 0;
    while (pos + 8 <= file.size()) {
        uint32_t len = get_u32be(file.data() + pos);
        if (pos + 12 + len > file.size()) throw IoError("truncated PNG: " + path);
        const char* type = reinterpret_cast<const char*>(file.data() + pos + 4);
        const uint8_t* data = file.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            img.width = static_cast<int>(get_u32be(data));
            img.height = static_cast<int>(get_u32be(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (bit_depth != 8 || (color_type != 0 && color_type != 2) || data[12] != 0)
                throw IoError("unsupported PNG variant: " + path);
            img.channels = color_type == 0 ? 1 : 3;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (img.width <= 0 || img.height <= 0 || idat.empty())
        throw IoError("malformed PNG: " + path);

    size_t stride = static_cast<size_t>(img.width) * img.channels;
    std::vector<uint8_t> raw((stride + 1) * img.height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw IoError("png inflate failed: " + path);

    img.pixels.resize(stride * img.height);
    int bpp = img.channels;
    for (int y = 0; y < img.height; ++y) {
        uint8_t filter = raw[y * (stride + 1)];
        const uint8_t* src = raw.data() + y * (stride + 1) + 1;
        uint8_t* cur = img.pixels.data() + y * stride;
        const uint8_t* prev = y > 0 ? img.pixels.data() + (y - 1) * stride : nullptr;
        for (size_t x = 0; x < stride; ++x) {
            int a = x >= static_cast<size_t>(bpp) ? cur[x - bpp] : 0;
            int b = prev ? prev[x] : 0;
            int c = (prev && x >= static_cast<size_t>(bpp)) ? prev[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw IoError("bad PNG filter byte: " + path);
            }
            cur[x] = static_cast<uint8_t>(v);
        }
    }
    return img;
}

Tensor image_to_tensor(const ImageU8& img) {
    int64_t C = img.channels, H = img.height, W = img.width;
    std::vector<float> data(static_cast<size_t>(C * H * W));
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            for (int64_t c = 0; c < C; ++c)
                data[static_cast<size_t>((c * H + y) * W + x)] =
                    img.pixels[static_cast<size_t>((y * W + x) * C + c)] / 255.0f;
    return Tensor::from_data({1, C, H, W}, std::move(data));
}

ImageU8 tensor_to_image(const Tensor& t) {
    const Shape& s = t.shape();
    if (s.size() != 4 || s[0] != 1 || (s[1] != 1 && s[1] != 3))
        throw ContractError("tensor_to_image needs shape (1,1|3,H,W), got " + shape_str(s));
    ImageU8 img;
    img.channels = static_cast<int>(s[1]);
    img.height = static_cast<int>(s[2]);
    img.width = static_cast<int>(s[3]);
    img.pixels.resize(static_cast<size_t>(s[1] * s[2] * s[3]));
    const auto& v = t.values();
    int64_t C = s[1], H = s[2], W = s[3];
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            for (int64_t c = 0; c < C; ++c) {
                float f = v[static_cast<size_t>((c * H + y) * W + x)];
                float clamped = std::clamp(f, 0.0f, 1.0f);
                img.pixels[static_cast<size_t>((y * W + x) * C + c)] =
                    static_cast<uint8_t>(std::lround(clamped * 255.0f));
            }
    return img;
}

Tensor to_model_range(const Tensor& t01) {
    std::vector<float> v = t01.values();
    for (float& f : v) f = f * 2.0f - 1.0f;
    return Tensor::from_data(t01.shape(), std::move(v));
}

Tensor to_eval_range(const Tensor& tm1) {
    std::vector<float> v = tm1.values();
    for (float& f : v) f = (f + 1.0f) * 0.5f;
    return Tensor::from_data(tm1.shape(), std::move(v));
}

Tensor resize_bilinear(const Tensor& t, int64_t out_h, int64_t out_w) {
    const Shape& s = t.shape();
    if (s.size() != 4) throw ContractError("resize_bilinear needs rank-4 input");
    int64_t N = s[0], C = s[1], H = s[2], W = s[3];
    if (H == out_h && W == out_w) return t.detach();
    std::vector<float> out(static_cast<size_t>(N * C * out_h * out_w));
    const auto& v = t.values();
    double sy = static_cast<double>(H) / out_h;
    double sx = static_cast<double>(W) / out_w;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            const float* src = v.data() + (n * C + c) * H * W;
            float* dst = out.data() + (n * C + c) * out_h * out_w;
            for (int64_t y = 0; y < out_h; ++y) {
                double fy = (y + 0.5) * sy - 0.5;
                int64_t y0 = static_cast<int64_t>(std::floor(fy));
                double wy = fy - y0;
                int64_t y0c = std::clamp<int64_t>(y0, 0, H - 1);
                int64_t y1c = std::clamp<int64_t>(y0 + 1, 0, H - 1);
                for (int64_t x = 0; x < out_w; ++x) {
                    double fx = (x + 0.5) * sx - 0.5;
                    int64_t x0 = static_cast<int64_t>(std::floor(fx));
                    double wx = fx - x0;
                    int64_t x0c = std::clamp<int64_t>(x0, 0, W - 1);
                    int64_t x1c = std::clamp<int64_t>(x0 + 1, 0, W - 1);
                    double top = src[y0c * W + x0c] * (1 - wx) + src[y0c * W + x1c] * wx;
                    double bot = src[y1c * W + x0c] * (1 - wx) + src[y1c * W + x1c] * wx;
                    dst[y * out_w + x] = static_cast<float>(top * (1 - wy) + bot * wy);
                }
            }
        }
    return Tensor::from_data({N, C, out_h, out_w}, std::move(out));
}

}  // namespace thermogen

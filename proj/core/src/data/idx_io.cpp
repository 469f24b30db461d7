#include "ministl/data/idx_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "ministl/common.hpp"

namespace ministl::data {

namespace {

std::uint32_t read_be32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    MINISTL_CHECK(is.good(), IoError, "IDX header truncated");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::vector<nn::Tensor<float>> load_idx_images(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    MINISTL_CHECK(is.good(), IoError, "sprite source file missing: expected " << path);
    const std::uint32_t magic = read_be32(is);
    MINISTL_CHECK(magic == 0x00000803u, IoError,
                  path << " is not an IDX u8 image file (magic 0x" << std::hex << magic << ")");
    const std::uint32_t n = read_be32(is);
    const std::uint32_t h = read_be32(is);
    const std::uint32_t w = read_be32(is);
    MINISTL_CHECK(n > 0 && h > 0 && w > 0, IoError, path << " has empty dimensions");

    std::vector<nn::Tensor<float>> images;
    images.reserve(n);
    std::vector<unsigned char> row(static_cast<std::size_t>(h) * w);
    for (std::uint32_t i = 0; i < n; ++i) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        MINISTL_CHECK(is.good(), IoError, path << " truncated at image " << i);
        nn::Tensor<float> img({static_cast<std::int64_t>(h), static_cast<std::int64_t>(w)});
        float* p = img.data();
        for (std::size_t j = 0; j < row.size(); ++j) p[j] = row[j] / 255.0f;
        images.push_back(std::move(img));
    }
    return images;
}

void save_idx_images(const std::filesystem::path& path,
                     const std::vector<nn::Tensor<float>>& images) {
    MINISTL_CHECK(!images.empty(), ConfigError, "save_idx_images needs at least one image");
    const auto& s0 = images[0].shape();
    MINISTL_CHECK(s0.size() == 2, ShapeError, "IDX images must be (h, w)");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    MINISTL_CHECK(os.good(), IoError, "cannot open " << path << " for writing");
    write_be32(os, 0x00000803u);
    write_be32(os, static_cast<std::uint32_t>(images.size()));
    write_be32(os, static_cast<std::uint32_t>(s0[0]));
    write_be32(os, static_cast<std::uint32_t>(s0[1]));
    std::vector<unsigned char> row(static_cast<std::size_t>(images[0].numel()));
    for (const auto& img : images) {
        MINISTL_CHECK(img.shape() == s0, ShapeError, "IDX images must share one shape");
        const float* p = img.data();
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = static_cast<unsigned char>(
                std::lround(std::min(1.0f, std::max(0.0f, p[j])) * 255.0f));
        }
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size()));
    }
    MINISTL_CHECK(os.good(), IoError, "write failed for " << path);
}

std::vector<nn::Tensor<float>> load_cifar10_batch(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    MINISTL_CHECK(is.good(), IoError, "background source file missing: expected " << path);
    constexpr std::size_t kRecord = 1 + 3 * 32 * 32;
    std::vector<unsigned char> rec(kRecord);
    std::vector<nn::Tensor<float>> images;
    while (is.read(reinterpret_cast<char*>(rec.data()), kRecord)) {
        nn::Tensor<float> img({3, 32, 32});
        float* p = img.data();
        for (std::size_t j = 0; j < 3 * 32 * 32; ++j) p[j] = rec[1 + j] / 255.0f;
        images.push_back(std::move(img));
    }
    MINISTL_CHECK(!images.empty(), IoError, path << " holds no CIFAR-10 records");
    return images;
}

nn::Tensor<float> resize_bilinear(const nn::Tensor<float>& img, int out_h, int out_w) {
    MINISTL_CHECK(img.ndim() == 3, ShapeError, "resize_bilinear expects (C, H, W)");
    const std::int64_t C = img.dim(0), H = img.dim(1), W = img.dim(2);
    nn::Tensor<float> out({C, out_h, out_w});
    const double sy = static_cast<double>(H) / out_h;
    const double sx = static_cast<double>(W) / out_w;
    for (std::int64_t c = 0; c < C; ++c) {
        const float* src = img.data() + c * H * W;
        float* dst = out.data() + static_cast<std::int64_t>(c) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            const double fy = (y + 0.5) * sy - 0.5;
            const std::int64_t y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(fy)));
            const std::int64_t y1 = std::min<std::int64_t>(H - 1, y0 + 1);
            const double wy = std::min(1.0, std::max(0.0, fy - y0));
            for (int x = 0; x < out_w; ++x) {
                const double fx = (x + 0.5) * sx - 0.5;
                const std::int64_t x0 =
                    std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(fx)));
                const std::int64_t x1 = std::min<std::int64_t>(W - 1, x0 + 1);
                const double wx = std::min(1.0, std::max(0.0, fx - x0));
                const double v = (1 - wy) * ((1 - wx) * src[y0 * W + x0] + wx * src[y0 * W + x1]) +
                                 wy * ((1 - wx) * src[y1 * W + x0] + wx * src[y1 * W + x1]);
                dst[y * out_w + x] = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace ministl::data

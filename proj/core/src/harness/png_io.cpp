#include "ministl/harness/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "ministl/common.hpp"

namespace ministl::harness {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const nn::Tensor<unsigned char>& image) {
    MINISTL_CHECK(image.ndim() == 3 && (image.dim(0) == 1 || image.dim(0) == 3), ShapeError,
                  "write_png expects (1,H,W) or (3,H,W), got " << nn::shape_str(image.shape()));
    const int C = static_cast<int>(image.dim(0));
    const int H = static_cast<int>(image.dim(1));
    const int W = static_cast<int>(image.dim(2));

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    MINISTL_CHECK(fp != nullptr, IoError, "cannot open " << path << " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    MINISTL_CHECK(png != nullptr, IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng error while writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, W, H, 8, C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(W) * C);
    const unsigned char* data = image.data();
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            for (int c = 0; c < C; ++c) {
                row[x * C + c] = data[(c * H + y) * W + x];
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

nn::Tensor<unsigned char> read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    MINISTL_CHECK(fp != nullptr, IoError, "cannot open " << path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    MINISTL_CHECK(png != nullptr, IoError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng error while reading " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int W = static_cast<int>(png_get_image_width(png, info));
    const int H = static_cast<int>(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int C = static_cast<int>(png_get_channels(png, info));
    MINISTL_CHECK(C == 1 || C == 3, IoError, path << ": unsupported channel count " << C);

    std::vector<unsigned char> rowbuf(static_cast<std::size_t>(W) * C);
    nn::Tensor<unsigned char> out({C, H, W});
    unsigned char* data = out.data();
    for (int y = 0; y < H; ++y) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (int x = 0; x < W; ++x) {
            for (int c = 0; c < C; ++c) {
                data[(c * static_cast<std::int64_t>(H) + y) * W + x] = rowbuf[x * C + c];
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace ministl::harness

#pragma once

#include <filesystem>

#include "ministl/tensor.hpp"

namespace ministl::harness {

/// Writes a (1, H, W) or (3, H, W) u8 image as grayscale / RGB PNG.
void write_png(const std::filesystem::path& path, const nn::Tensor<unsigned char>& image);

/// Reads a PNG back into (C, H, W) u8 with C in {1, 3}.
nn::Tensor<unsigned char> read_png(const std::filesystem::path& path);

}  // namespace ministl::harness

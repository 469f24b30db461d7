#pragma once

#include <filesystem>
#include <vector>

#include "ministl/tensor.hpp"

namespace ministl::data {

/// Reads an IDX image file (unsigned byte, 3 dims) into per-image (h, w)
/// float planes scaled to [0, 1].
std::vector<nn::Tensor<float>> load_idx_images(const std::filesystem::path& path);

/// Writes (h, w) planes as an IDX image file (values quantized to u8).
void save_idx_images(const std::filesystem::path& path,
                     const std::vector<nn::Tensor<float>>& images);

/// Reads a CIFAR-10 binary batch into (3, 32, 32) float images in [0, 1].
std::vector<nn::Tensor<float>> load_cifar10_batch(const std::filesystem::path& path);

/// Bilinear resize of a (C, H, W) image.
nn::Tensor<float> resize_bilinear(const nn::Tensor<float>& img, int out_h, int out_w);

}  // namespace ministl::data

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ministl/data/dataset.hpp"

namespace ministl::data {

/// One named array inside a container. dtype is the numpy descr:
/// "|u1" (u8) or "<f4" (f32).
struct ArrayEntry {
    std::string name;
    nn::Shape shape;
    std::string dtype;
    std::vector<unsigned char> raw;
};

/// Uncompressed .npz (zip of .npy members), readable by numpy.
void write_npz(const std::filesystem::path& path, const std::vector<ArrayEntry>& entries);
std::vector<ArrayEntry> read_npz(const std::filesystem::path& path);

/// Materializes a split: <path> gets arrays "context" and "target" (u8),
/// and a JSON sidecar <path>.json carries the DatasetSpec and the content
/// hash.
void save_dataset(const Dataset& dataset, const std::filesystem::path& npz_path);

/// Loads a materialized split (and its sidecar when present).
DatasetPtr load_dataset(const std::filesystem::path& npz_path);

/// Bit-exact float round trip for a single batch.
void save_video_batch(const std::filesystem::path& npz_path, const VideoBatch& batch);
VideoBatch load_video_batch(const std::filesystem::path& npz_path, BatchRole role);

}  // namespace ministl::data

#pragma once

#include "ministl/harness/evaluate.hpp"

namespace ministl::harness {

struct BenchRow {
    std::string model;
    std::string condition = "clean";
    metrics::MetricReport report;
    std::string status = "ok";
};

struct ResultTable {
    std::vector<BenchRow> rows;

    bool any_failed() const;
    nlohmann::json to_json() const;
    static ResultTable from_json(const nlohmann::json& j);
};

struct ReportFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
    std::filesystem::path markdown;
    std::vector<std::filesystem::path> strips;
};

/// Writes report.csv / report.json / report.md into out_dir. CSV numbers
/// round-trip exactly (max-precision formatting).
ReportFiles write_report(const ResultTable& table, const std::filesystem::path& out_dir);

/// Parses a report.csv back into a table (numeric columns only).
ResultTable read_report_csv(const std::filesystem::path& path);

/// Frame strip: context row on top, prediction row, target row, each frame
/// 1:1 pixels, prediction clamped to [0,1] and quantized like stored data.
nn::Tensor<unsigned char> make_strip(const SequencePair& pair, const VideoBatch& prediction);

/// Renders strips for the first n sequences of the dataset.
std::vector<std::filesystem::path> write_strips(models::Model<float>& model,
                                                const data::Dataset& dataset, int n,
                                                const std::filesystem::path& dir,
                                                const std::string& stem);

}  // namespace ministl::harness

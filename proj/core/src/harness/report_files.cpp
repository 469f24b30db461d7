#include "ministl/harness/report_files.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ministl/harness/png_io.hpp"

namespace ministl::harness {

namespace {

std::string num_exact(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_num(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::string num_pretty(double v, int prec = 4) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

bool ResultTable::any_failed() const {
    for (const auto& r : rows) {
        if (r.status != "ok") return true;
    }
    return false;
}

nlohmann::json ResultTable::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"model", r.model},
                       {"condition", r.condition},
                       {"status", r.status},
                       {"report", r.report.to_json()}});
    }
    return {{"rows", arr}};
}

ResultTable ResultTable::from_json(const nlohmann::json& j) {
    ResultTable t;
    for (const auto& r : j.at("rows")) {
        BenchRow row;
        row.model = r.value("model", std::string{});
        row.condition = r.value("condition", std::string{});
        row.status = r.value("status", std::string{"ok"});
        if (r.contains("report")) row.report = metrics::MetricReport::from_json(r["report"]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

ReportFiles write_report(const ResultTable& table, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    ReportFiles files;
    files.csv = out_dir / "report.csv";
    files.json = out_dir / "report.json";
    files.markdown = out_dir / "report.md";

    {
        std::ofstream os(files.csv, std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot write " << files.csv);
        os << "model,condition,params_m,flops_g,fps,mse,mae,ssim,psnr,status\n";
        for (const auto& r : table.rows) {
            os << r.model << ',' << r.condition << ',' << num_exact(r.report.params_m) << ','
               << num_exact(r.report.flops_g) << ',' << num_exact(r.report.fps) << ','
               << num_exact(r.report.mse_paper) << ',' << num_exact(r.report.mae_paper) << ','
               << num_exact(r.report.ssim) << ',' << num_exact(r.report.psnr_db) << ','
               << r.status << "\n";
        }
    }
    {
        std::ofstream os(files.json, std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot write " << files.json);
        os << table.to_json().dump(2) << "\n";
    }
    {
        std::ofstream os(files.markdown, std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot write " << files.markdown);
        os << "| Model | Condition | Params (M) | FLOPs (G) | FPS | MSE | MAE | SSIM | PSNR | "
              "Status |\n";
        os << "|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& r : table.rows) {
            os << "| " << r.model << " | " << r.condition << " | "
               << num_pretty(r.report.params_m, 2) << " | " << num_pretty(r.report.flops_g, 2)
               << " | " << num_pretty(r.report.fps, 1) << " | "
               << num_pretty(r.report.mse_paper, 2) << " | "
               << num_pretty(r.report.mae_paper, 2) << " | " << num_pretty(r.report.ssim, 4)
               << " | " << num_pretty(r.report.psnr_db, 2) << " | " << r.status << " |\n";
        }
    }
    return files;
}

ResultTable read_report_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    MINISTL_CHECK(is.good(), IoError, "cannot open " << path);
    std::string line;
    MINISTL_CHECK(static_cast<bool>(std::getline(is, line)), IoError, path << " is empty");
    ResultTable t;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        MINISTL_CHECK(cells.size() == 10, IoError,
                      path << ": expected 10 columns, got " << cells.size());
        BenchRow r;
        r.model = cells[0];
        r.condition = cells[1];
        r.report.params_m = parse_num(cells[2]);
        r.report.flops_g = parse_num(cells[3]);
        r.report.fps = parse_num(cells[4]);
        r.report.mse_paper = parse_num(cells[5]);
        r.report.mae_paper = parse_num(cells[6]);
        r.report.ssim = parse_num(cells[7]);
        r.report.psnr_db = parse_num(cells[8]);
        r.status = cells[9];
        t.rows.push_back(std::move(r));
    }
    return t;
}

nn::Tensor<unsigned char> make_strip(const SequencePair& pair, const VideoBatch& prediction) {
    const auto fs = pair.context.spec;
    MINISTL_CHECK(pair.context.batch() == 1 && prediction.batch() == 1, ShapeError,
                  "make_strip expects single-sequence batches");
    const std::int64_t T = pair.context.time_len();
    const std::int64_t Tp = prediction.time_len();
    const std::int64_t cols = std::max(T, std::max(Tp, pair.target.time_len()));
    const std::int64_t C = fs.channels, H = fs.height, W = fs.width;

    nn::Tensor<unsigned char> strip({C, 3 * H, cols * W});
    strip.fill(0);
    const auto blit = [&](const VideoBatch& src, std::int64_t row) {
        const auto u8 = data::quantize_u8(src.data);
        for (std::int64_t t = 0; t < src.time_len(); ++t) {
            for (std::int64_t c = 0; c < C; ++c) {
                for (std::int64_t y = 0; y < H; ++y) {
                    const unsigned char* s = u8.data() + (((0 * src.time_len() + t) * C + c) * H + y) * W;
                    unsigned char* d =
                        strip.data() + (c * 3 * H + row * H + y) * (cols * W) + t * W;
                    std::copy_n(s, W, d);
                }
            }
        }
    };
    blit(pair.context, 0);
    blit(prediction, 1);
    blit(pair.target, 2);
    return strip;
}

std::vector<std::filesystem::path> write_strips(models::Model<float>& model,
                                                const data::Dataset& dataset, int n,
                                                const std::filesystem::path& dir,
                                                const std::string& stem) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    const std::int64_t count = std::min<std::int64_t>(n, dataset.size());
    for (std::int64_t i = 0; i < count; ++i) {
        auto pair = dataset.pair(i);
        auto pred = model.predict(pair.context);
        const auto strip = make_strip(pair, pred);
        auto path = dir / (stem + "_" + std::to_string(i) + ".png");
        write_png(path, strip);
        out.push_back(std::move(path));
    }
    return out;
}

}  // namespace ministl::harness

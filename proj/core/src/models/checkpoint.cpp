#include "ministl/models/checkpoint.hpp"

#include <nlohmann/json.hpp>
#include <unistd.h>

#include <cstring>
#include <fstream>

namespace ministl::models {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'T', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    MINISTL_CHECK(is.good(), IoError, "checkpoint truncated");
    return v;
}

nlohmann::json header_json(const CheckpointHeader& h) {
    return {{"format_version", h.format_version},
            {"model_name", h.model_name},
            {"model_config", h.config.to_json()}};
}

CheckpointHeader header_from_json(const nlohmann::json& j) {
    CheckpointHeader h;
    h.format_version = j.at("format_version").get<int>();
    MINISTL_CHECK(h.format_version == static_cast<int>(kVersion), IoError,
                  "unsupported checkpoint format version " << h.format_version);
    h.model_name = j.at("model_name").get<std::string>();
    h.config = ModelConfig::from_json(j.at("model_config"));
    return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& model_name,
                     Model<float>& model) {
    auto params = model.parameters();
    const auto tmp = path.parent_path() /
                     (path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        MINISTL_CHECK(os.good(), IoError, "cannot open " << tmp << " for writing");
        os.write(kMagic, sizeof(kMagic));
        write_pod(os, kVersion);

        CheckpointHeader h{static_cast<int>(kVersion), model_name, model.config()};
        const std::string j = header_json(h).dump();
        write_pod(os, static_cast<std::uint64_t>(j.size()));
        os.write(j.data(), static_cast<std::streamsize>(j.size()));

        write_pod(os, static_cast<std::uint64_t>(params.size()));
        for (const auto& [name, var] : params) {
            write_pod(os, static_cast<std::uint32_t>(name.size()));
            os.write(name.data(), static_cast<std::streamsize>(name.size()));
            const auto& t = var.value();
            write_pod(os, static_cast<std::uint8_t>(0));  // dtype f32
            write_pod(os, static_cast<std::uint32_t>(t.ndim()));
            for (auto d : t.shape()) write_pod(os, static_cast<std::int64_t>(d));
            os.write(reinterpret_cast<const char*>(t.data()),
                     static_cast<std::streamsize>(t.numel() * sizeof(float)));
        }
        os.flush();
        MINISTL_CHECK(os.good(), IoError, "write failed for " << tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    MINISTL_CHECK(!ec, IoError, "rename " << tmp << " -> " << path << ": " << ec.message());
}

namespace {

CheckpointHeader read_header_stream(std::istream& is, const std::filesystem::path& path) {
    char magic[8];
    is.read(magic, sizeof(magic));
    MINISTL_CHECK(is.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, IoError,
                  path << " is not a checkpoint file");
    const auto version = read_pod<std::uint32_t>(is);
    MINISTL_CHECK(version == kVersion, IoError,
                  "unsupported checkpoint version " << version << " in " << path);
    const auto jlen = read_pod<std::uint64_t>(is);
    std::string j(jlen, '\0');
    is.read(j.data(), static_cast<std::streamsize>(jlen));
    MINISTL_CHECK(is.good(), IoError, "checkpoint header truncated: " << path);
    return header_from_json(nlohmann::json::parse(j));
}

}  // namespace

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    MINISTL_CHECK(is.good(), IoError, "cannot open checkpoint " << path);
    return read_header_stream(is, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    MINISTL_CHECK(is.good(), IoError, "cannot open checkpoint " << path);
    CheckpointHeader header = read_header_stream(is, path);

    LoadedCheckpoint out;
    out.header = header;
    out.model = build_model(header.model_name, header.config);
    auto params = out.model->parameters();

    const auto n_entries = read_pod<std::uint64_t>(is);
    MINISTL_CHECK(n_entries == params.size(), IoError,
                  "checkpoint has " << n_entries << " tensors, model expects "
                                    << params.size());
    std::size_t cursor = 0;
    for (std::uint64_t e = 0; e < n_entries; ++e) {
        const auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto dtype = read_pod<std::uint8_t>(is);
        MINISTL_CHECK(dtype == 0, IoError, "unsupported dtype tag " << int(dtype));
        const auto ndim = read_pod<std::uint32_t>(is);
        nn::Shape shape(ndim);
        for (auto& d : shape) d = read_pod<std::int64_t>(is);

        MINISTL_CHECK(cursor < params.size() && params[cursor].name == name, IoError,
                      "checkpoint parameter '" << name << "' does not match model parameter '"
                                               << (cursor < params.size()
                                                       ? params[cursor].name
                                                       : std::string("<none>"))
                                               << "'");
        auto& var = params[cursor].param;
        MINISTL_CHECK(var.shape() == shape, ShapeError,
                      "checkpoint tensor " << name << " shape " << nn::shape_str(shape)
                                           << " vs model " << nn::shape_str(var.shape()));
        is.read(reinterpret_cast<char*>(var.value().data()),
                static_cast<std::streamsize>(var.numel() * sizeof(float)));
        MINISTL_CHECK(is.good(), IoError, "checkpoint data truncated at " << name);
        ++cursor;
    }
    return out;
}

}  // namespace ministl::models

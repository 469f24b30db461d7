#include "ministl/data/container.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <cstring>
#include <fstream>

#include "ministl/digest.hpp"

namespace ministl::data {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
}

std::string npy_blob(const ArrayEntry& e) {
    std::string header = "{'descr': '" + e.dtype + "', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < e.shape.size(); ++i) {
        header += std::to_string(e.shape[i]);
        if (e.shape.size() == 1 || i + 1 < e.shape.size()) header += ",";
        if (i + 1 < e.shape.size()) header += " ";
    }
    header += "), }";
    const std::size_t base = 10;  // magic + version + header length field
    std::size_t total = base + header.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    header.append(padded - total, ' ');
    header.push_back('\n');

    std::string blob = "\x93NUMPY";
    blob.push_back('\x01');
    blob.push_back('\x00');
    put_le<std::uint16_t>(blob, static_cast<std::uint16_t>(header.size()));
    blob += header;
    blob.append(reinterpret_cast<const char*>(e.raw.data()), e.raw.size());
    return blob;
}

struct ParsedNpy {
    nn::Shape shape;
    std::string dtype;
    std::size_t data_offset;
};

ParsedNpy parse_npy_header(const std::string& blob, const std::string& name) {
    MINISTL_CHECK(blob.size() > 10 && blob.compare(0, 6, "\x93NUMPY") == 0, IoError,
                  name << " is not an npy member");
    const unsigned char major = blob[6];
    MINISTL_CHECK(major == 1, IoError, name << ": unsupported npy version " << int(major));
    const std::uint16_t hlen =
        static_cast<std::uint8_t>(blob[8]) | (static_cast<std::uint8_t>(blob[9]) << 8);
    const std::string header = blob.substr(10, hlen);

    ParsedNpy out;
    out.data_offset = 10 + hlen;

    const auto descr_pos = header.find("'descr':");
    MINISTL_CHECK(descr_pos != std::string::npos, IoError, name << ": npy header lacks descr");
    const auto q0 = header.find('\'', descr_pos + 8);
    const auto q1 = header.find('\'', q0 + 1);
    out.dtype = header.substr(q0 + 1, q1 - q0 - 1);

    MINISTL_CHECK(header.find("'fortran_order': False") != std::string::npos, IoError,
                  name << ": fortran-ordered npy members are not supported");

    const auto sh_pos = header.find("'shape':");
    const auto p0 = header.find('(', sh_pos);
    const auto p1 = header.find(')', p0);
    std::string dims = header.substr(p0 + 1, p1 - p0 - 1);
    std::int64_t value = 0;
    bool have_digit = false;
    for (char ch : dims) {
        if (ch >= '0' && ch <= '9') {
            value = value * 10 + (ch - '0');
            have_digit = true;
        } else if (ch == ',') {
            MINISTL_CHECK(have_digit, IoError, name << ": malformed npy shape tuple");
            out.shape.push_back(value);
            value = 0;
            have_digit = false;
        }
    }
    if (have_digit) out.shape.push_back(value);
    return out;
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "|u1") return 1;
    if (dtype == "<f4") return 4;
    throw IoError("unsupported array dtype: " + dtype);
}

}  // namespace

void write_npz(const std::filesystem::path& path, const std::vector<ArrayEntry>& entries) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    MINISTL_CHECK(os.good(), IoError, "cannot open " << path << " for writing");

    struct Record {
        std::string name;
        std::uint32_t crc;
        std::uint32_t size;
        std::uint32_t offset;
    };
    std::vector<Record> records;
    std::uint32_t offset = 0;

    for (const auto& e : entries) {
        const std::string member = e.name + ".npy";
        const std::string blob = npy_blob(e);
        const auto crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(blob.data()),
                  static_cast<uInt>(blob.size())));

        std::string local;
        put_le<std::uint32_t>(local, 0x04034b50);
        put_le<std::uint16_t>(local, 20);  // version needed
        put_le<std::uint16_t>(local, 0);   // flags
        put_le<std::uint16_t>(local, 0);   // stored
        put_le<std::uint16_t>(local, 0);   // mod time
        put_le<std::uint16_t>(local, 0);   // mod date
        put_le<std::uint32_t>(local, crc);
        put_le<std::uint32_t>(local, static_cast<std::uint32_t>(blob.size()));
        put_le<std::uint32_t>(local, static_cast<std::uint32_t>(blob.size()));
        put_le<std::uint16_t>(local, static_cast<std::uint16_t>(member.size()));
        put_le<std::uint16_t>(local, 0);  // extra length
        local += member;

        os.write(local.data(), static_cast<std::streamsize>(local.size()));
        os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        records.push_back({member, crc, static_cast<std::uint32_t>(blob.size()), offset});
        offset += static_cast<std::uint32_t>(local.size() + blob.size());
    }

    std::string central;
    for (const auto& r : records) {
        put_le<std::uint32_t>(central, 0x02014b50);
        put_le<std::uint16_t>(central, 20);  // made by
        put_le<std::uint16_t>(central, 20);  // version needed
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint16_t>(central, 0);  // stored
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint32_t>(central, r.crc);
        put_le<std::uint32_t>(central, r.size);
        put_le<std::uint32_t>(central, r.size);
        put_le<std::uint16_t>(central, static_cast<std::uint16_t>(r.name.size()));
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint16_t>(central, 0);
        put_le<std::uint32_t>(central, 0);
        put_le<std::uint32_t>(central, r.offset);
        central += r.name;
    }
    os.write(central.data(), static_cast<std::streamsize>(central.size()));

    std::string eocd;
    put_le<std::uint32_t>(eocd, 0x06054b50);
    put_le<std::uint16_t>(eocd, 0);
    put_le<std::uint16_t>(eocd, 0);
    put_le<std::uint16_t>(eocd, static_cast<std::uint16_t>(records.size()));
    put_le<std::uint16_t>(eocd, static_cast<std::uint16_t>(records.size()));
    put_le<std::uint32_t>(eocd, static_cast<std::uint32_t>(central.size()));
    put_le<std::uint32_t>(eocd, offset);
    put_le<std::uint16_t>(eocd, 0);
    os.write(eocd.data(), static_cast<std::streamsize>(eocd.size()));
    os.flush();
    MINISTL_CHECK(os.good(), IoError, "write failed for " << path);
}

std::vector<ArrayEntry> read_npz(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    MINISTL_CHECK(is.good(), IoError, "cannot open container " << path);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    const auto rd16 = [&bytes](std::size_t off) -> std::uint16_t {
        return static_cast<std::uint8_t>(bytes[off]) |
               (static_cast<std::uint8_t>(bytes[off + 1]) << 8);
    };
    const auto rd32 = [&bytes](std::size_t off) -> std::uint32_t {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(bytes[off + i]);
        return v;
    };

    std::vector<ArrayEntry> entries;
    std::size_t cursor = 0;
    while (cursor + 4 <= bytes.size() && rd32(cursor) == 0x04034b50) {
        const std::uint16_t method = rd16(cursor + 8);
        MINISTL_CHECK(method == 0, IoError,
                      path << ": compressed zip members are not supported");
        const std::uint32_t size = rd32(cursor + 18);
        const std::uint16_t name_len = rd16(cursor + 26);
        const std::uint16_t extra_len = rd16(cursor + 28);
        std::string member = bytes.substr(cursor + 30, name_len);
        const std::size_t data_off = cursor + 30 + name_len + extra_len;
        MINISTL_CHECK(data_off + size <= bytes.size(), IoError, path << " is truncated");
        const std::string blob = bytes.substr(data_off, size);

        if (member.size() > 4 && member.ends_with(".npy")) {
            const auto parsed = parse_npy_header(blob, member);
            ArrayEntry e;
            e.name = member.substr(0, member.size() - 4);
            e.shape = parsed.shape;
            e.dtype = parsed.dtype;
            e.raw.assign(blob.begin() + static_cast<std::ptrdiff_t>(parsed.data_offset),
                         blob.end());
            const std::size_t expected = dtype_size(e.dtype) *
                                         static_cast<std::size_t>(nn::shape_numel(e.shape));
            MINISTL_CHECK(e.raw.size() == expected, IoError,
                          path << ": member " << member << " has " << e.raw.size()
                               << " payload bytes, expected " << expected);
            entries.push_back(std::move(e));
        }
        cursor = data_off + size;
    }
    MINISTL_CHECK(!entries.empty(), IoError, path << " holds no array members");
    return entries;
}

namespace {

ArrayEntry u8_entry(std::string name, const nn::Tensor<unsigned char>& t) {
    ArrayEntry e;
    e.name = std::move(name);
    e.shape = t.shape();
    e.dtype = "|u1";
    e.raw.assign(t.data(), t.data() + t.numel());
    return e;
}

const ArrayEntry& find_entry(const std::vector<ArrayEntry>& entries, const std::string& name,
                             const std::filesystem::path& path) {
    for (const auto& e : entries) {
        if (e.name == name) return e;
    }
    throw IoError(path.string() + " lacks the '" + name + "' array");
}

nn::Tensor<unsigned char> entry_to_u8(const ArrayEntry& e) {
    MINISTL_CHECK(e.dtype == "|u1", IoError,
                  "array '" << e.name << "' has dtype " << e.dtype << ", expected |u1");
    nn::Tensor<unsigned char> t(e.shape);
    std::memcpy(t.data(), e.raw.data(), e.raw.size());
    return t;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& npz_path) {
    const auto fs = dataset.frame();
    const std::int64_t N = dataset.size();
    const std::int64_t T = dataset.context_len(), Tp = dataset.horizon();
    nn::Tensor<unsigned char> ctx({N, T, fs.channels, fs.height, fs.width});
    nn::Tensor<unsigned char> tgt({N, Tp, fs.channels, fs.height, fs.width});
    const std::int64_t ctx_elems = N > 0 ? ctx.numel() / N : 0;
    const std::int64_t tgt_elems = N > 0 ? tgt.numel() / N : 0;

    Sha256 hash;
    const auto add_dims = [&hash](const nn::Shape& s) {
        for (auto d : s) {
            const std::int64_t v = d;
            hash.update(&v, sizeof(v));
        }
    };
    for (std::int64_t i = 0; i < N; ++i) {
        const auto p = dataset.pair(i);
        const auto c8 = quantize_u8(p.context.data);
        const auto t8 = quantize_u8(p.target.data);
        if (i == 0) {
            add_dims(c8.shape());
            add_dims(t8.shape());
        }
        hash.update(c8.data(), static_cast<std::size_t>(c8.numel()));
        hash.update(t8.data(), static_cast<std::size_t>(t8.numel()));
        std::copy_n(c8.data(), ctx_elems, ctx.data() + i * ctx_elems);
        std::copy_n(t8.data(), tgt_elems, tgt.data() + i * tgt_elems);
    }

    write_npz(npz_path, {u8_entry("context", ctx), u8_entry("target", tgt)});

    nlohmann::json sidecar{
        {"format", "ministl-dataset"},
        {"version", 1},
        {"content_hash_sha256", hash.hex()},
        {"arrays",
         {{"context", {N, T, fs.channels, fs.height, fs.width}},
          {"target", {N, Tp, fs.channels, fs.height, fs.width}}}},
    };
    if (dataset.spec()) sidecar["spec"] = dataset.spec()->to_json();
    std::ofstream js(npz_path.string() + ".json", std::ios::trunc);
    MINISTL_CHECK(js.good(), IoError, "cannot write sidecar for " << npz_path);
    js << sidecar.dump(2) << "\n";
}

DatasetPtr load_dataset(const std::filesystem::path& npz_path) {
    const auto entries = read_npz(npz_path);
    auto ctx = entry_to_u8(find_entry(entries, "context", npz_path));
    auto tgt = entry_to_u8(find_entry(entries, "target", npz_path));
    MINISTL_CHECK(ctx.ndim() == 5 && tgt.ndim() == 5, IoError,
                  npz_path << ": context/target must be 5-D");

    std::optional<DatasetSpec> spec;
    const auto sidecar_path = npz_path.string() + ".json";
    if (std::filesystem::exists(sidecar_path)) {
        std::ifstream js(sidecar_path);
        nlohmann::json j;
        js >> j;
        if (j.contains("spec")) spec = DatasetSpec::from_json(j["spec"]);
    }
    FrameSpec frame{static_cast<int>(ctx.dim(2)), static_cast<int>(ctx.dim(3)),
                    static_cast<int>(ctx.dim(4))};
    return make_array_dataset(std::move(ctx), std::move(tgt), frame, std::move(spec));
}

void save_video_batch(const std::filesystem::path& npz_path, const VideoBatch& batch) {
    ArrayEntry e;
    e.name = "frames";
    e.shape = batch.data.shape();
    e.dtype = "<f4";
    e.raw.resize(static_cast<std::size_t>(batch.data.numel()) * sizeof(float));
    std::memcpy(e.raw.data(), batch.data.data(), e.raw.size());
    write_npz(npz_path, {e});
}

VideoBatch load_video_batch(const std::filesystem::path& npz_path, BatchRole role) {
    const auto entries = read_npz(npz_path);
    const auto& e = find_entry(entries, "frames", npz_path);
    MINISTL_CHECK(e.dtype == "<f4", IoError, npz_path << ": frames must be <f4");
    MINISTL_CHECK(e.shape.size() == 5, IoError, npz_path << ": frames must be 5-D");
    nn::Tensor<float> t(e.shape);
    std::memcpy(t.data(), e.raw.data(), e.raw.size());
    FrameSpec frame{static_cast<int>(e.shape[2]), static_cast<int>(e.shape[3]),
                    static_cast<int>(e.shape[4])};
    return VideoBatch(std::move(t), frame, role);
}

}  // namespace ministl::data

#include "core/io_formats.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

#include "core/errors.hpp"
#include "core/png_io.hpp"

namespace celf {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void put_bytes(std::ostream& out, const void* data, size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}

void put_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void get_bytes(std::istream& in, void* data, size_t n, const std::string& path) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) throw FormatError("truncated file: " + path);
}

uint16_t get_u16(std::istream& in, const std::string& path) {
    unsigned char b[2];
    get_bytes(in, b, 2, path);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    get_bytes(in, b, 4, path);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

uint64_t get_u64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    get_bytes(in, b, 8, path);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

float get_f32(std::istream& in, const std::string& path) {
    uint32_t bits = get_u32(in, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        body(out);
        out.flush();
        if (!out) {
            fs::remove(tmp);
            throw IoError("write failed: " + path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot move into place: " + path);
    }
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return in;
}

void check_magic(std::istream& in, const char expect[8], const std::string& path) {
    char magic[8];
    get_bytes(in, magic, 8, path);
    if (std::memcmp(magic, expect, 8) != 0)
        throw FormatError(std::string("bad magic, expected ") + std::string(expect, 8) + ": " + path);
}

constexpr char kMagicLf[8] = {'C', 'E', 'L', 'F', '-', 'L', 'F', '4'};
constexpr char kMagicEi[8] = {'C', 'E', 'L', 'F', '-', 'E', 'I', '1'};
constexpr char kMagicEv[8] = {'C', 'E', 'L', 'F', '-', 'E', 'V', '1'};
constexpr char kMagicNn[8] = {'C', 'E', 'L', 'F', '-', 'N', 'N', '1'};
constexpr char kMagicAp[8] = {'C', 'E', 'L', 'F', '-', 'A', 'P', '1'};

}  // namespace

void save_lightfield(const LightField& lf, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) {
        put_bytes(out, kMagicLf, 8);
        put_u32(out, static_cast<uint32_t>(lf.width()));
        put_u32(out, static_cast<uint32_t>(lf.height()));
        for (double v : lf.values()) put_f32(out, static_cast<float>(v));
    });
}

LightField load_lightfield(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_magic(in, kMagicLf, path);
    uint32_t w = get_u32(in, path);
    uint32_t h = get_u32(in, path);
    if (w == 0 || h == 0 || w > 65535 || h > 65535)
        throw FormatError("implausible light-field dimensions: " + path);
    size_t count = static_cast<size_t>(w) * h * 64;
    std::vector<double> values(count);
    for (size_t i = 0; i < count; ++i) values[i] = get_f32(in, path);
    return LightField::from_buffer(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

void save_lightfield_dir(const LightField& lf, const std::string& dir, int bit_depth) {
    fs::create_directories(dir);
    for (int v = 0; v < LightField::kViews; ++v) {
        for (int u = 0; u < LightField::kViews; ++u) {
            std::string name = "view_" + std::to_string(u) + "_" + std::to_string(v) + ".png";
            write_png_gray((fs::path(dir) / name).string(), lf.view(u, v), lf.width(), lf.height(),
                           bit_depth);
        }
    }
    json meta;
    meta["width"] = lf.width();
    meta["height"] = lf.height();
    meta["bit_depth"] = bit_depth;
    atomic_write((fs::path(dir) / "meta.json").string(),
                 [&](std::ostream& out) { out << meta.dump(2) << "\n"; });
}

LightField load_lightfield_dir(const std::string& dir) {
    std::ifstream meta_in((fs::path(dir) / "meta.json").string());
    if (!meta_in) throw IoError("missing meta.json in " + dir);
    json meta = json::parse(meta_in, nullptr, false);
    if (meta.is_discarded() || !meta.contains("width") || !meta.contains("height"))
        throw FormatError("malformed meta.json in " + dir);
    int w = meta["width"].get<int>();
    int h = meta["height"].get<int>();

    LightField lf(w, h);
    for (int v = 0; v < LightField::kViews; ++v) {
        for (int u = 0; u < LightField::kViews; ++u) {
            std::string name = "view_" + std::to_string(u) + "_" + std::to_string(v) + ".png";
            GrayImage img = read_png_gray((fs::path(dir) / name).string());
            if (img.width != w || img.height != h)
                throw FormatError("view size disagrees with meta.json: " + name);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    lf.set(x, y, u, v, img.values[static_cast<size_t>(y) * w + x]);
                }
            }
        }
    }
    lf.validate();
    return lf;
}

void save_event_image(const EventImage& ev, const std::string& path) {
    if (ev.width() > 65535 || ev.height() > 65535) fail_invalid("event image too large for format");
    if (ev.from() < 0 || ev.from() > 255) fail_invalid("transition index must fit in one byte");
    for (int32_t v : ev.values()) {
        if (v < -32768 || v > 32767) fail_invalid("event count out of 16-bit range");
    }
    atomic_write(path, [&](std::ostream& out) {
        put_bytes(out, kMagicEi, 8);
        put_u16(out, static_cast<uint16_t>(ev.width()));
        put_u16(out, static_cast<uint16_t>(ev.height()));
        unsigned char tr = static_cast<unsigned char>(ev.from());
        put_bytes(out, &tr, 1);
        for (int32_t v : ev.values()) put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
    });
}

EventImage load_event_image(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_magic(in, kMagicEi, path);
    int w = get_u16(in, path);
    int h = get_u16(in, path);
    unsigned char tr = 0;
    get_bytes(in, &tr, 1, path);
    if (w == 0 || h == 0) throw FormatError("zero event-image dimension: " + path);
    EventImage ev(w, h, tr, tr + 1);
    for (int32_t& v : ev.values()) v = static_cast<int16_t>(get_u16(in, path));
    return ev;
}

void save_event_stream(const EventStream& stream, const std::string& path) {
    if (stream.width() > 65535 || stream.height() > 65535)
        fail_invalid("event stream too large for format");
    atomic_write(path, [&](std::ostream& out) {
        put_bytes(out, kMagicEv, 8);
        put_u16(out, static_cast<uint16_t>(stream.width()));
        put_u16(out, static_cast<uint16_t>(stream.height()));
        put_u64(out, stream.records().size());
        for (const EventRecord& r : stream.records()) {
            put_u16(out, r.x);
            put_u16(out, r.y);
            put_u32(out, r.t);
            char p = static_cast<char>(r.polarity);
            put_bytes(out, &p, 1);
        }
    });
}

EventStream load_event_stream(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_magic(in, kMagicEv, path);
    int w = get_u16(in, path);
    int h = get_u16(in, path);
    uint64_t count = get_u64(in, path);
    if (w == 0 || h == 0) throw FormatError("zero event-stream dimension: " + path);
    std::vector<EventRecord> records;
    records.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        EventRecord r;
        r.x = get_u16(in, path);
        r.y = get_u16(in, path);
        r.t = get_u32(in, path);
        char p;
        get_bytes(in, &p, 1, path);
        r.polarity = static_cast<int8_t>(p);
        records.push_back(r);
    }
    return EventStream::from_records(w, h, std::move(records));
}

void save_recnet(const ReconNet& net, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) {
        put_bytes(out, kMagicNn, 8);
        put_u32(out, static_cast<uint32_t>(net.layer_count()));
        for (const ConvLayer& l : net.layers()) {
            put_u32(out, static_cast<uint32_t>(l.cin));
            put_u32(out, static_cast<uint32_t>(l.cout));
            for (double v : l.weight.values()) put_f32(out, static_cast<float>(v));
            for (double v : l.bias.values()) put_f32(out, static_cast<float>(v));
        }
    });
}

ReconNet load_recnet(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_magic(in, kMagicNn, path);
    uint32_t layers = get_u32(in, path);
    if (layers == 0 || layers > 64) throw FormatError("implausible layer count: " + path);

    std::vector<std::pair<uint32_t, uint32_t>> dims;
    std::vector<double> params;
    for (uint32_t li = 0; li < layers; ++li) {
        uint32_t cin = get_u32(in, path);
        uint32_t cout = get_u32(in, path);
        if (cin == 0 || cout == 0 || cin > 4096 || cout > 4096)
            throw FormatError("implausible channel count: " + path);
        if (!dims.empty() && dims.back().second != cin)
            throw FormatError("layer channel chain is inconsistent: " + path);
        dims.emplace_back(cin, cout);
        size_t nw = static_cast<size_t>(cout) * cin * 9;
        for (size_t i = 0; i < nw; ++i) params.push_back(get_f32(in, path));
        for (uint32_t i = 0; i < cout; ++i) params.push_back(get_f32(in, path));
    }

    std::vector<int> widths;
    widths.reserve(dims.size());
    for (const auto& d : dims) widths.push_back(static_cast<int>(d.second));
    ReconNet net(static_cast<int>(dims.front().first), widths, 0);
    net.import_params(params.data());
    return net;
}

void save_patterns(const std::vector<AperturePattern>& patterns, const std::string& path) {
    if (patterns.empty()) fail_invalid("no patterns to save");
    atomic_write(path, [&](std::ostream& out) {
        put_bytes(out, kMagicAp, 8);
        put_u32(out, static_cast<uint32_t>(patterns.size()));
        for (const AperturePattern& p : patterns) {
            for (double v : p.values()) put_f32(out, static_cast<float>(v));
        }
    });
}

std::vector<AperturePattern> load_patterns(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_magic(in, kMagicAp, path);
    uint32_t n = get_u32(in, path);
    if (n == 0 || n > 4096) throw FormatError("implausible pattern count: " + path);
    std::vector<AperturePattern> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        std::array<double, 64> a;
        bool binary = true;
        for (int j = 0; j < 64; ++j) {
            a[static_cast<size_t>(j)] = get_f32(in, path);
            if (a[static_cast<size_t>(j)] != 0.0 && a[static_cast<size_t>(j)] != 1.0) binary = false;
        }
        out.push_back(AperturePattern::from_array(a, binary));
    }
    return out;
}

}  // namespace celf

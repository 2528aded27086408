#include "salut/io.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace salut::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559);

constexpr char kLutMagic[8] = {'S', 'A', 'L', 'U', 'T', '4', 'D', '\0'};
constexpr char kWeightsMagic[8] = {'S', 'A', 'L', 'U', 'T', 'W', 'T', '\0'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 1u << 16;
constexpr std::size_t kMaxImageSide = 1u << 16;

class Reader {
public:
    explicit Reader(std::span<const std::byte> data) : m_data(data) {}

    std::size_t offset() const noexcept { return m_pos; }
    std::size_t remaining() const noexcept { return m_data.size() - m_pos; }

    void expectMagic(const char (&magic)[8])
    {
        if (remaining() < 8) {
            throw FormatError(FormatErrorKind::Truncated, m_pos, "file too short for magic");
        }
        if (std::memcmp(m_data.data() + m_pos, magic, 8) != 0) {
            throw FormatError(FormatErrorKind::BadMagic, m_pos, "bad magic");
        }
        m_pos += 8;
    }

    std::uint32_t u32(const char* what)
    {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, m_data.data() + m_pos, 4);
        m_pos += 4;
        return v;
    }

    void floats(std::span<float> out, const char* what)
    {
        need(out.size_bytes(), what);
        std::memcpy(out.data(), m_data.data() + m_pos, out.size_bytes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!std::isfinite(out[i])) {
                throw FormatError(FormatErrorKind::NonFinite, m_pos + 4 * i, std::string("non-finite value in ") + what);
            }
        }
        m_pos += out.size_bytes();
    }

    std::string string(std::size_t n, const char* what)
    {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(m_data.data() + m_pos), n);
        m_pos += n;
        return s;
    }

    void need(std::size_t n, const char* what) const
    {
        if (remaining() < n) {
            throw FormatError(FormatErrorKind::Truncated, m_pos,
                              std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, have "
                                  + std::to_string(remaining()));
        }
    }

private:
    std::span<const std::byte> m_data;
    std::size_t m_pos = 0;
};

class Writer {
public:
    void raw(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::byte*>(p);
        m_out.insert(m_out.end(), b, b + n);
    }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void f32(float v) { raw(&v, 4); }
    Bytes take() { return std::move(m_out); }

private:
    Bytes m_out;
};

// Netpbm header: magic, then whitespace/comment separated integers.
class PnmHeader {
public:
    explicit PnmHeader(std::span<const std::byte> data) : m_data(data) {}

    void magic(char kind)
    {
        if (m_data.size() < 2 || static_cast<char>(m_data[0]) != 'P' || static_cast<char>(m_data[1]) != kind) {
            throw FormatError(FormatErrorKind::BadMagic, 0, std::string("expected magic P") + kind);
        }
        m_pos = 2;
    }

    std::size_t offset() const noexcept { return m_pos; }

    std::size_t number(const char* what)
    {
        skipSpace();
        const std::size_t start = m_pos;
        std::size_t v = 0;
        while (m_pos < m_data.size() && isDigit(at(m_pos))) {
            if (m_pos - start >= 9) {
                throw FormatError(FormatErrorKind::Malformed, start, std::string(what) + " is too large");
            }
            v = v * 10 + static_cast<std::size_t>(at(m_pos) - '0');
            ++m_pos;
        }
        if (m_pos == start) {
            throw FormatError(m_pos >= m_data.size() ? FormatErrorKind::Truncated : FormatErrorKind::Malformed,
                              m_pos, std::string("expected ") + what);
        }
        return v;
    }

    /// Consumes the single whitespace byte that ends the header.
    std::size_t endOfHeader()
    {
        if (m_pos >= m_data.size()) {
            throw FormatError(FormatErrorKind::Truncated, m_pos, "header ends without raster");
        }
        if (!isSpace(at(m_pos))) {
            throw FormatError(FormatErrorKind::Malformed, m_pos, "expected whitespace after maxval");
        }
        return ++m_pos;
    }

private:
    char at(std::size_t i) const { return static_cast<char>(m_data[i]); }
    static bool isDigit(char c) { return c >= '0' && c <= '9'; }
    static bool isSpace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

    void skipSpace()
    {
        while (m_pos < m_data.size()) {
            if (isSpace(at(m_pos))) {
                ++m_pos;
            } else if (at(m_pos) == '#') {
                while (m_pos < m_data.size() && at(m_pos) != '\n') {
                    ++m_pos;
                }
            } else {
                break;
            }
        }
    }

    std::span<const std::byte> m_data;
    std::size_t m_pos = 0;
};

struct Raster {
    std::size_t width;
    std::size_t height;
    std::size_t maxval;
    std::size_t dataStart;
};

Raster parsePnm(std::span<const std::byte> data, char kind, std::size_t channels)
{
    PnmHeader h(data);
    h.magic(kind);
    Raster r{};
    r.width = h.number("width");
    r.height = h.number("height");
    if (r.width == 0 || r.height == 0 || r.width > kMaxImageSide || r.height > kMaxImageSide) {
        throw FormatError(FormatErrorKind::BadSize, h.offset(), "unsupported image dimensions");
    }
    r.maxval = h.number("maxval");
    const std::size_t maxvalPos = h.offset();
    if (r.maxval == 0 || r.maxval > 65535) {
        throw FormatError(FormatErrorKind::Malformed, maxvalPos, "maxval must be in [1, 65535]");
    }
    r.dataStart = h.endOfHeader();
    const std::size_t sampleBytes = r.maxval > 255 ? 2 : 1;
    const std::size_t need = r.width * r.height * channels * sampleBytes;
    if (data.size() - r.dataStart < need) {
        throw FormatError(FormatErrorKind::Truncated, data.size(),
                          "raster needs " + std::to_string(need) + " bytes, have "
                              + std::to_string(data.size() - r.dataStart));
    }
    return r;
}

void readSamples(std::span<const std::byte> data, const Raster& r, std::span<float> out)
{
    const float maxval = static_cast<float>(r.maxval);
    const std::byte* p = data.data() + r.dataStart;
    if (r.maxval > 255) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto v = static_cast<unsigned>(std::to_integer<unsigned>(p[2 * i]) << 8 | std::to_integer<unsigned>(p[2 * i + 1]));
            out[i] = std::min(1.0f, static_cast<float>(v) / maxval);
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::min(1.0f, static_cast<float>(std::to_integer<unsigned>(p[i])) / maxval);
        }
    }
}

unsigned quantize(float v, unsigned maxval)
{
    const float c = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
    return static_cast<unsigned>(std::lround(c * static_cast<float>(maxval)));
}

Bytes pnmHeader(const char* magic, std::size_t w, std::size_t h, unsigned maxval)
{
    const std::string s = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n"
                          + std::to_string(maxval) + "\n";
    Bytes out(s.size());
    std::memcpy(out.data(), s.data(), s.size());
    return out;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parseNumbers(std::string_view s, std::size_t lineStart)
{
    std::vector<double> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            ++i;
        }
        if (i >= s.size()) {
            break;
        }
        double v = 0.0;
        const char* first = s.data() + i;
        // from_chars rejects a leading '+'
        if (*first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
        if (ec != std::errc() || (ptr < s.data() + s.size() && *ptr != ' ' && *ptr != '\t')) {
            throw FormatError(FormatErrorKind::Malformed, lineStart + i, "bad number in cube file");
        }
        if (!std::isfinite(v)) {
            throw FormatError(FormatErrorKind::NonFinite, lineStart + i, "non-finite value in cube file");
        }
        out.push_back(v);
        i = static_cast<std::size_t>(ptr - s.data());
    }
    return out;
}

void checkedFloat(Writer& w, double v, const char* what)
{
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) {
        throw Error(ErrorKind::Numeric, std::string("cannot encode non-finite value in ") + what);
    }
    w.f32(f);
}

} // namespace

Bytes read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    }
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    Bytes data(static_cast<std::size_t>(size));
    if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), size)) {
        throw Error(ErrorKind::Io, "failed reading '" + path.string() + "'");
    }
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot create '" + path.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

// --- PPM -------------------------------------------------------------------

ImageBuffer parse_ppm(std::span<const std::byte> data)
{
    const Raster r = parsePnm(data, '6', 3);
    ImageBuffer img(r.height, r.width);
    readSamples(data, r, img.values());
    return img;
}

Bytes encode_ppm(const ImageBuffer& image)
{
    Bytes out = pnmHeader("P6", image.width(), image.height(), 255);
    const std::size_t header = out.size();
    out.resize(header + image.values().size());
    std::span<const float> v = image.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[header + i] = static_cast<std::byte>(quantize(v[i], 255));
    }
    return out;
}

ImageBuffer read_ppm(const std::filesystem::path& path)
{
    return parse_ppm(read_file(path));
}

void write_ppm(const std::filesystem::path& path, const ImageBuffer& image)
{
    write_file(path, encode_ppm(image));
}

// --- context PGM -----------------------------------------------------------

ContextMap parse_ctx(std::span<const std::byte> data)
{
    const Raster r = parsePnm(data, '5', 1);
    ContextMap ctx(r.height, r.width);
    readSamples(data, r, ctx.values());
    return ctx;
}

Bytes encode_ctx(const ContextMap& ctx)
{
    Bytes out = pnmHeader("P5", ctx.width(), ctx.height(), 65535);
    const std::size_t header = out.size();
    out.resize(header + 2 * ctx.pixelCount());
    std::span<const float> v = ctx.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const unsigned s = quantize(v[i], 65535);
        out[header + 2 * i] = static_cast<std::byte>(s >> 8);
        out[header + 2 * i + 1] = static_cast<std::byte>(s & 0xff);
    }
    return out;
}

ContextMap read_ctx(const std::filesystem::path& path)
{
    return parse_ctx(read_file(path));
}

void write_ctx(const std::filesystem::path& path, const ContextMap& ctx)
{
    write_file(path, encode_ctx(ctx));
}

// --- .cube -----------------------------------------------------------------

Lut3D parse_cube(std::string_view text)
{
    std::string title;
    std::size_t size = 0;
    std::array<double, 3> dmin{0.0, 0.0, 0.0};
    std::array<double, 3> dmax{1.0, 1.0, 1.0};
    std::vector<double> rows;
    std::size_t rowCount = 0;

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        const std::size_t lineStart = pos;
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const char first = line.front();
        const bool numeric = (first >= '0' && first <= '9') || first == '-' || first == '+' || first == '.';
        if (!numeric) {
            const std::size_t sp = line.find_first_of(" \t");
            const std::string_view key = line.substr(0, sp);
            const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
            if (key == "TITLE") {
                title = std::string(rest);
                if (title.size() >= 2 && title.front() == '"' && title.back() == '"') {
                    title = title.substr(1, title.size() - 2);
                }
            } else if (key == "LUT_3D_SIZE") {
                const std::vector<double> v = parseNumbers(rest, lineStart);
                if (v.size() != 1 || v[0] != std::floor(v[0]) || v[0] < 2 || v[0] > static_cast<double>(kMaxLutSize)) {
                    throw FormatError(FormatErrorKind::BadSize, lineStart, "LUT_3D_SIZE must be an integer in [2, 128]");
                }
                if (rowCount > 0) {
                    throw FormatError(FormatErrorKind::Malformed, lineStart, "LUT_3D_SIZE after data rows");
                }
                size = static_cast<std::size_t>(v[0]);
            } else if (key == "DOMAIN_MIN" || key == "DOMAIN_MAX") {
                const std::vector<double> v = parseNumbers(rest, lineStart);
                if (v.size() != 3) {
                    throw FormatError(FormatErrorKind::Malformed, lineStart, std::string(key) + " needs 3 values");
                }
                std::copy(v.begin(), v.end(), (key == "DOMAIN_MIN" ? dmin : dmax).begin());
            } else if (key == "LUT_3D_INPUT_RANGE") {
                const std::vector<double> v = parseNumbers(rest, lineStart);
                if (v.size() != 2) {
                    throw FormatError(FormatErrorKind::Malformed, lineStart, "LUT_3D_INPUT_RANGE needs 2 values");
                }
                dmin.fill(v[0]);
                dmax.fill(v[1]);
            } else if (key == "LUT_1D_SIZE") {
                throw FormatError(FormatErrorKind::Unsupported, lineStart, "1D cube LUTs are not supported");
            }
            // other keywords are vendor extensions; ignore them
            continue;
        }
        if (size == 0) {
            throw FormatError(FormatErrorKind::Malformed, lineStart, "data row before LUT_3D_SIZE");
        }
        const std::vector<double> v = parseNumbers(line, lineStart);
        if (v.size() != 3) {
            throw FormatError(FormatErrorKind::Malformed, lineStart, "data row must have 3 values");
        }
        if (rowCount >= size * size * size) {
            throw FormatError(FormatErrorKind::BadSize, lineStart, "more data rows than LUT_3D_SIZE^3");
        }
        rows.insert(rows.end(), v.begin(), v.end());
        ++rowCount;
    }
    if (size == 0) {
        throw FormatError(FormatErrorKind::Malformed, text.size(), "missing LUT_3D_SIZE");
    }
    if (rowCount != size * size * size) {
        throw FormatError(FormatErrorKind::BadSize, text.size(),
                          "expected " + std::to_string(size * size * size) + " data rows, got "
                              + std::to_string(rowCount));
    }
    for (std::size_t c = 0; c < 3; ++c) {
        if (!(dmax[c] > dmin[c])) {
            throw FormatError(FormatErrorKind::Malformed, 0, "DOMAIN_MAX must exceed DOMAIN_MIN");
        }
    }

    Lut3D lut(size);
    lut.title = title;
    lut.domainMin = dmin;
    lut.domainMax = dmax;
    for (std::size_t n = 0; n < rowCount; ++n) {
        const std::size_t r = n % size;
        const std::size_t g = (n / size) % size;
        const std::size_t b = n / (size * size);
        for (std::size_t c = 0; c < 3; ++c) {
            lut.entry(c, r, g, b) = rows[3 * n + c];
        }
    }
    return lut;
}

std::string encode_cube(const Lut3D& lut)
{
    std::string out;
    if (!lut.title.empty()) {
        out += "TITLE \"" + lut.title + "\"\n";
    }
    out += "LUT_3D_SIZE " + std::to_string(lut.size()) + "\n";
    char buf[96];
    if (lut.domainMin != std::array<double, 3>{0.0, 0.0, 0.0} || lut.domainMax != std::array<double, 3>{1.0, 1.0, 1.0}) {
        std::snprintf(buf, sizeof buf, "DOMAIN_MIN %.6f %.6f %.6f\n", lut.domainMin[0], lut.domainMin[1], lut.domainMin[2]);
        out += buf;
        std::snprintf(buf, sizeof buf, "DOMAIN_MAX %.6f %.6f %.6f\n", lut.domainMax[0], lut.domainMax[1], lut.domainMax[2]);
        out += buf;
    }
    const std::size_t n = lut.size();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t g = 0; g < n; ++g) {
            for (std::size_t r = 0; r < n; ++r) {
                const double vr = lut.entry(0, r, g, b), vg = lut.entry(1, r, g, b), vb = lut.entry(2, r, g, b);
                if (!std::isfinite(vr) || !std::isfinite(vg) || !std::isfinite(vb)) {
                    throw Error(ErrorKind::Numeric, "cannot write non-finite cube entry");
                }
                std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", vr, vg, vb);
                out += buf;
            }
        }
    }
    return out;
}

Lut3D read_cube(const std::filesystem::path& path)
{
    const Bytes data = read_file(path);
    return parse_cube(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

void write_cube(const std::filesystem::path& path, const Lut3D& lut)
{
    const std::string text = encode_cube(lut);
    write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

// --- LUT4D -----------------------------------------------------------------

Lut4D parse_lut4d(std::span<const std::byte> data)
{
    Reader in(data);
    in.expectMagic(kLutMagic);
    const std::size_t versionAt = in.offset();
    if (in.u32("version") != kLut4dVersion) {
        throw FormatError(FormatErrorKind::BadVersion, versionAt, "unsupported LUT4D version");
    }
    const std::size_t dimsAt = in.offset();
    const std::uint32_t size = in.u32("size");
    const std::uint32_t bins = in.u32("context bins");
    const std::uint32_t channels = in.u32("channels");
    if (size < 2 || size > kMaxLutSize || bins < 1 || bins > kMaxContextBins || channels != 3) {
        throw FormatError(FormatErrorKind::BadSize, dimsAt,
                          "bad LUT4D dimensions D=" + std::to_string(size) + " C=" + std::to_string(bins)
                              + " channels=" + std::to_string(channels));
    }
    const std::size_t count = 3ull * bins * size * size * size;
    in.need(count * 4, "LUT4D payload");
    std::vector<float> values(count);
    in.floats(values, "LUT4D payload");
    if (in.remaining() != 0) {
        throw FormatError(FormatErrorKind::BadSize, in.offset(), "trailing bytes after LUT4D payload");
    }
    return Lut4D(size, bins, std::vector<double>(values.begin(), values.end()));
}

Bytes encode_lut4d(const Lut4D& lut)
{
    Writer w;
    w.raw(kLutMagic, 8);
    w.u32(kLut4dVersion);
    w.u32(static_cast<std::uint32_t>(lut.size()));
    w.u32(static_cast<std::uint32_t>(lut.bins()));
    w.u32(3);
    for (double v : lut.entries()) {
        checkedFloat(w, v, "LUT4D");
    }
    return w.take();
}

Lut4D read_lut4d(const std::filesystem::path& path)
{
    return parse_lut4d(read_file(path));
}

void write_lut4d(const std::filesystem::path& path, const Lut4D& lut)
{
    write_file(path, encode_lut4d(lut));
}

// --- weight archives -------------------------------------------------------

nn::WeightArchive parse_weights(std::span<const std::byte> data)
{
    Reader in(data);
    in.expectMagic(kWeightsMagic);
    const std::size_t versionAt = in.offset();
    if (in.u32("version") != kWeightsVersion) {
        throw FormatError(FormatErrorKind::BadVersion, versionAt, "unsupported weight archive version");
    }
    const std::uint32_t count = in.u32("tensor count");
    nn::WeightArchive archive;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::size_t entryAt = in.offset();
        const std::uint32_t nameLength = in.u32("name length");
        if (nameLength > kMaxNameLength) {
            throw FormatError(FormatErrorKind::BadSize, entryAt, "tensor name too long");
        }
        std::string name = in.string(nameLength, "tensor name");
        const std::size_t rankAt = in.offset();
        const std::uint32_t rank = in.u32("rank");
        if (rank > kMaxRank) {
            throw FormatError(FormatErrorKind::BadSize, rankAt, "tensor rank " + std::to_string(rank) + " too large");
        }
        std::vector<std::uint32_t> dims(rank);
        std::size_t elements = 1;
        for (auto& d : dims) {
            d = in.u32("dims");
            // Bound by what the remaining payload could hold.
            if (d != 0 && elements > in.remaining() / 4 / d) {
                throw FormatError(FormatErrorKind::Truncated, in.offset(), "tensor '" + name + "' exceeds file size");
            }
            elements *= d;
        }
        std::vector<float> values(elements);
        in.floats(values, "tensor data");
        if (archive.contains(name)) {
            throw FormatError(FormatErrorKind::DuplicateName, entryAt, "duplicate tensor name '" + name + "'");
        }
        archive.add(std::move(name), nn::Tensor(std::move(dims), std::move(values)));
    }
    if (in.remaining() != 0) {
        throw FormatError(FormatErrorKind::BadSize, in.offset(), "trailing bytes after weight archive");
    }
    return archive;
}

Bytes encode_weights(const nn::WeightArchive& archive)
{
    Writer w;
    w.raw(kWeightsMagic, 8);
    w.u32(kWeightsVersion);
    w.u32(static_cast<std::uint32_t>(archive.size()));
    for (const auto& [name, tensor] : archive.entries()) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.raw(name.data(), name.size());
        w.u32(static_cast<std::uint32_t>(tensor.rank()));
        for (std::uint32_t d : tensor.dims) {
            w.u32(d);
        }
        for (float v : tensor.data) {
            checkedFloat(w, v, name.c_str());
        }
    }
    return w.take();
}

nn::WeightArchive read_weights(const std::filesystem::path& path)
{
    return parse_weights(read_file(path));
}

void write_weights(const std::filesystem::path& path, const nn::WeightArchive& archive)
{
    write_file(path, encode_weights(archive));
}

// --- basis banks -----------------------------------------------------------

nn::WeightArchive bank_to_archive(const BasisLutBank& bank)
{
    const auto n = static_cast<std::uint32_t>(bank.count());
    const auto c = static_cast<std::uint32_t>(bank.bins());
    const auto d = static_cast<std::uint32_t>(bank.size());
    nn::Tensor t({n, 3, c, d, d, d});
    std::size_t i = 0;
    for (const Lut4D& basis : bank.bases()) {
        for (double v : basis.entries()) {
            t.data[i++] = static_cast<float>(v);
        }
    }
    nn::WeightArchive a;
    a.add("bases", std::move(t));
    return a;
}

BasisLutBank bank_from_archive(const nn::WeightArchive& archive)
{
    const nn::Tensor& t = archive.get("bases");
    if (t.rank() != 6 || t.dims[1] != 3 || t.dims[3] != t.dims[4] || t.dims[4] != t.dims[5]) {
        throw Error(ErrorKind::DimensionMismatch, "bank tensor 'bases' must have shape [N,3,C,D,D,D]");
    }
    const std::size_t n = t.dims[0];
    const std::size_t bins = t.dims[2];
    const std::size_t size = t.dims[3];
    const std::size_t per = 3 * bins * size * size * size;
    std::vector<Lut4D> bases;
    bases.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bases.emplace_back(size, bins,
                           std::vector<double>(t.data.begin() + static_cast<std::ptrdiff_t>(i * per),
                                               t.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * per)));
    }
    return BasisLutBank(size, bins, std::move(bases));
}

BasisLutBank read_bank(const std::filesystem::path& path)
{
    return bank_from_archive(read_weights(path));
}

void write_bank(const std::filesystem::path& path, const BasisLutBank& bank)
{
    write_weights(path, bank_to_archive(bank));
}

} // namespace salut::io

#include "stereotune/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string_view>

namespace stereotune {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

/// Whitespace/comment-aware header tokenizer shared by the PNM readers.
class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::optional<std::string> next(bool allow_comments)
    {
        skip_space(allow_comments);
        if (pos_ >= bytes_.size())
            return std::nullopt;
        std::string tok;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) &&
               !(allow_comments && bytes_[pos_] == '#'))
            tok.push_back(static_cast<char>(bytes_[pos_++]));
        return tok;
    }

    /// Consumes the single whitespace byte that terminates a binary header.
    bool take_one_space()
    {
        if (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::size_t pos() const { return pos_; }

private:
    void skip_space(bool allow_comments)
    {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (allow_comments && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

long parse_int_token(const std::optional<std::string>& tok, std::string_view field)
{
    if (!tok)
        throw FormatError("truncated header: missing " + std::string(field));
    const std::string& s = *tok;
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        s.size() > 9)
        throw FormatError("malformed " + std::string(field) + " token '" + s + "'");
    return std::stol(s);
}

} // namespace

GrayImage parse_pgm(std::span<const std::uint8_t> bytes)
{
    HeaderReader hdr(bytes);
    auto magic = hdr.next(true);
    if (!magic)
        throw FormatError("empty file: missing magic");
    const bool binary = *magic == "P5";
    if (!binary && *magic != "P2")
        throw FormatError("unsupported magic '" + *magic + "' (expected P2 or P5)");

    const long width = parse_int_token(hdr.next(true), "width");
    const long height = parse_int_token(hdr.next(true), "height");
    auto maxval_tok = hdr.next(true);
    const long maxval = parse_int_token(maxval_tok, "maxval");
    if (width < 1 || height < 1)
        throw FormatError("invalid dimensions '" + std::to_string(width) + " " +
                          std::to_string(height) + "'");
    if (maxval < 1 || maxval > 255)
        throw FormatError("unsupported maxval '" + *maxval_tok + "'");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> data;
    data.reserve(count);

    if (binary) {
        if (!hdr.take_one_space())
            throw FormatError("missing whitespace after maxval '" + *maxval_tok + "'");
        const std::size_t start = hdr.pos();
        if (bytes.size() - start < count)
            throw FormatError("truncated payload: expected " + std::to_string(count) +
                              " bytes, found " + std::to_string(bytes.size() - start));
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint8_t v = bytes[start + i];
            if (v > maxval)
                throw FormatError("sample '" + std::to_string(v) + "' exceeds maxval");
            data.push_back(v);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            auto tok = hdr.next(true);
            if (!tok)
                throw FormatError("truncated payload: expected " + std::to_string(count) +
                                  " samples, found " + std::to_string(i));
            const long v = parse_int_token(tok, "sample");
            if (v > maxval)
                throw FormatError("sample '" + *tok + "' exceeds maxval");
            data.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

GrayImage load_pgm(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return parse_pgm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path)
{
    const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.pixels().begin(), img.pixels().end());
    write_file(path, bytes);
}

DisparityMap parse_pfm(std::span<const std::uint8_t> bytes)
{
    HeaderReader hdr(bytes);
    auto magic = hdr.next(false);
    if (!magic)
        throw FormatError("empty file: missing magic");
    if (*magic != "Pf")
        throw FormatError("unsupported magic '" + *magic + "' (expected Pf)");
    const long width = parse_int_token(hdr.next(false), "width");
    const long height = parse_int_token(hdr.next(false), "height");
    if (width < 1 || height < 1)
        throw FormatError("invalid dimensions '" + std::to_string(width) + " " +
                          std::to_string(height) + "'");
    auto scale_tok = hdr.next(false);
    if (!scale_tok)
        throw FormatError("truncated header: missing scale");
    double scale = 0.0;
    try {
        std::size_t used = 0;
        scale = std::stod(*scale_tok, &used);
        if (used != scale_tok->size())
            throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw FormatError("malformed scale token '" + *scale_tok + "'");
    }
    if (scale == 0.0 || !std::isfinite(scale))
        throw FormatError("malformed scale token '" + *scale_tok + "'");
    if (!hdr.take_one_space())
        throw FormatError("missing whitespace after scale '" + *scale_tok + "'");

    const bool little = scale < 0.0;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t start = hdr.pos();
    if (bytes.size() - start < count * 4)
        throw FormatError("truncated payload: expected " + std::to_string(count * 4) +
                          " bytes, found " + std::to_string(bytes.size() - start));

    DisparityMap map(static_cast<int>(width), static_cast<int>(height));
    const std::uint8_t* src = bytes.data() + start;
    for (long y = 0; y < height; ++y) {
        // Rows are stored bottom-up.
        const int dst_y = static_cast<int>(height - 1 - y);
        for (long x = 0; x < width; ++x, src += 4) {
            std::uint32_t bits = 0;
            if (little)
                bits = std::uint32_t(src[0]) | std::uint32_t(src[1]) << 8 |
                       std::uint32_t(src[2]) << 16 | std::uint32_t(src[3]) << 24;
            else
                bits = std::uint32_t(src[3]) | std::uint32_t(src[2]) << 8 |
                       std::uint32_t(src[1]) << 16 | std::uint32_t(src[0]) << 24;
            map.at(static_cast<int>(x), dst_y) = std::bit_cast<float>(bits);
        }
    }
    return map;
}

DisparityMap load_pfm(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return parse_pfm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pfm(const DisparityMap& map)
{
    for (float v : map.pixels())
        if (std::isnan(v))
            throw std::invalid_argument("disparity map contains NaN");

    const std::string header = "Pf\n" + std::to_string(map.width()) + " " +
                               std::to_string(map.height()) + "\n-1.0\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + map.size() * 4);
    for (int y = map.height() - 1; y >= 0; --y) {
        for (float v : map.row(y)) {
            const auto bits = std::bit_cast<std::uint32_t>(v);
            bytes.push_back(static_cast<std::uint8_t>(bits));
            bytes.push_back(static_cast<std::uint8_t>(bits >> 8));
            bytes.push_back(static_cast<std::uint8_t>(bits >> 16));
            bytes.push_back(static_cast<std::uint8_t>(bits >> 24));
        }
    }
    return bytes;
}

void save_pfm(const DisparityMap& map, const std::filesystem::path& path)
{
    write_file(path, encode_pfm(map));
}

GradientImage sobel_magnitude(const GrayImage& img)
{
    if (img.width() < 3 || img.height() < 3)
        throw DimensionError("sobel_magnitude requires at least 3x3 input, got " +
                             std::to_string(img.width()) + "x" + std::to_string(img.height()));

    GradientImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            auto p = [&](int dx, int dy) { return int(img.clamped(x + dx, y + dy)); };
            const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
            const double mag = std::sqrt(double(gx) * gx + double(gy) * gy) / 4.0;
            out.at(x, y) = static_cast<std::uint8_t>(std::min(255.0, std::round(mag)));
        }
    }
    return out;
}

} // namespace stereotune

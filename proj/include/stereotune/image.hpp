#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stereotune {

/// Thrown for malformed or unsupported image files. The message names the
/// offending token or path.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when raster dimensions are unusable for an operation.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Row-major raster. The tag keeps intensity, gradient and disparity planes
/// from being passed where another is expected.
template <typename T, typename Tag>
class Plane {
public:
    using value_type = T;

    Plane() = default;

    Plane(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        if (width < 1 || height < 1)
            throw DimensionError("raster dimensions must be positive, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Plane(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 1 || height < 1)
            throw DimensionError("raster dimensions must be positive, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw DimensionError("raster data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(width) + "x" +
                                 std::to_string(height));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& at(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& at(int x, int y) const noexcept { return data_[index(x, y)]; }

    /// Edge-clamped read.
    const T& clamped(int x, int y) const noexcept
    {
        x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
        y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
        return data_[index(x, y)];
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    std::span<const T> row(int y) const noexcept
    {
        return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
    }

    template <typename OtherT, typename OtherTag>
    bool same_shape(const Plane<OtherT, OtherTag>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct GrayTag;
struct GradientTag;
struct DisparityTag;

using GrayImage = Plane<std::uint8_t, GrayTag>;
using GradientImage = Plane<std::uint8_t, GradientTag>;
using DisparityMap = Plane<float, DisparityTag>;

inline constexpr float kInvalidDisparity = -1.0f;

inline bool is_valid(float d) noexcept { return d >= 0.0f; }

template <typename A, typename TagA, typename B, typename TagB>
void require_same_shape(const Plane<A, TagA>& a, const Plane<B, TagB>& b, const char* what)
{
    if (!a.same_shape(b))
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
}

// PGM (P2 / P5, maxval <= 255).
GrayImage load_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(std::span<const std::uint8_t> bytes);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

// PFM grayscale ("Pf"), little-endian, bottom-up rows.
DisparityMap load_pfm(const std::filesystem::path& path);
DisparityMap parse_pfm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pfm(const DisparityMap& map);
void save_pfm(const DisparityMap& map, const std::filesystem::path& path);

/// 3x3 Sobel gradient magnitude, min(255, round(|g| / 4)), clamp-to-edge.
/// Requires at least 3x3 input.
GradientImage sobel_magnitude(const GrayImage& img);

} // namespace stereotune

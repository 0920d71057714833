#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msvc {

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

inline constexpr Rgb8 kVoidColor{255, 255, 255};

/// Dense row-major image. Row 0 is the top of the picture.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill)
    {
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    T& operator()(int x, int y) noexcept { return pixels_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return pixels_[index(x, y)]; }

    T& operator[](std::size_t i) noexcept { return pixels_[i]; }
    const T& operator[](std::size_t i) const noexcept { return pixels_[i]; }

    std::span<T> pixels() noexcept { return pixels_; }
    std::span<const T> pixels() const noexcept { return pixels_; }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    bool same_size(int w, int h) const noexcept { return width_ == w && height_ == h; }

    template <typename U>
    bool same_size(const Image<U>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> pixels_;
};

using RgbImage = Image<Rgb8>;
using DepthImage = Image<float>;
using MaskImage = Image<std::uint8_t>;

} // namespace msvc

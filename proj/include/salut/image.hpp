#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace salut {

/// Metadata tag only; no transfer curve is ever applied.
enum class ColorSpace { Log, Srgb };

/// Interleaved RGB float image, values in [0,1].
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(std::size_t height, std::size_t width, ColorSpace space = ColorSpace::Srgb);
    ImageBuffer(std::size_t height, std::size_t width, std::vector<float> values,
                ColorSpace space = ColorSpace::Srgb);

    std::size_t height() const noexcept { return m_height; }
    std::size_t width() const noexcept { return m_width; }
    std::size_t pixelCount() const noexcept { return m_height * m_width; }
    bool empty() const noexcept { return m_values.empty(); }

    ColorSpace space() const noexcept { return m_space; }
    void setSpace(ColorSpace space) noexcept { m_space = space; }

    float& at(std::size_t y, std::size_t x, std::size_t c) { return m_values[(y * m_width + x) * 3 + c]; }
    float at(std::size_t y, std::size_t x, std::size_t c) const { return m_values[(y * m_width + x) * 3 + c]; }

    std::span<float> values() noexcept { return m_values; }
    std::span<const float> values() const noexcept { return m_values; }

    /// Replaces non-finite values by 0 and clips the rest to [0,1].
    void clamp();

    bool sameShape(const ImageBuffer& other) const noexcept
    {
        return m_height == other.m_height && m_width == other.m_width;
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<float> m_values;
    ColorSpace m_space = ColorSpace::Srgb;
};

/// Single-channel per-pixel context coordinate, values in [0,1].
class ContextMap {
public:
    ContextMap() = default;
    ContextMap(std::size_t height, std::size_t width, float fill = 0.0f);
    ContextMap(std::size_t height, std::size_t width, std::vector<float> values);

    std::size_t height() const noexcept { return m_height; }
    std::size_t width() const noexcept { return m_width; }
    std::size_t pixelCount() const noexcept { return m_height * m_width; }

    float& at(std::size_t y, std::size_t x) { return m_values[y * m_width + x]; }
    float at(std::size_t y, std::size_t x) const { return m_values[y * m_width + x]; }

    std::span<float> values() noexcept { return m_values; }
    std::span<const float> values() const noexcept { return m_values; }

    void clamp();

    bool matches(const ImageBuffer& image) const noexcept
    {
        return m_height == image.height() && m_width == image.width();
    }

    friend bool operator==(const ContextMap&, const ContextMap&) = default;

private:
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<float> m_values;
};

} // namespace salut

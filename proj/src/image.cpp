#include "salut/image.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace salut {

namespace {

void clampValues(std::span<float> values)
{
    for (float& v : values) {
        v = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
    }
}

} // namespace

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, ColorSpace space)
    : m_height(height), m_width(width), m_values(height * width * 3, 0.0f), m_space(space)
{
}

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, std::vector<float> values,
                         ColorSpace space)
    : m_height(height), m_width(width), m_values(std::move(values)), m_space(space)
{
    if (m_values.size() != height * width * 3) {
        throw Error(ErrorKind::DimensionMismatch,
                    "image buffer expects " + std::to_string(height * width * 3) + " values, got "
                        + std::to_string(m_values.size()));
    }
}

void ImageBuffer::clamp()
{
    clampValues(m_values);
}

ContextMap::ContextMap(std::size_t height, std::size_t width, float fill)
    : m_height(height), m_width(width), m_values(height * width, fill)
{
}

ContextMap::ContextMap(std::size_t height, std::size_t width, std::vector<float> values)
    : m_height(height), m_width(width), m_values(std::move(values))
{
    if (m_values.size() != height * width) {
        throw Error(ErrorKind::DimensionMismatch,
                    "context map expects " + std::to_string(height * width) + " values, got "
                        + std::to_string(m_values.size()));
    }
}

void ContextMap::clamp()
{
    clampValues(m_values);
}

} // namespace salut

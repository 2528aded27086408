#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace salut::nn {

/// Dense tensor of arbitrary rank, row-major.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> shape, float fill = 0.0f);
    Tensor(std::vector<std::uint32_t> shape, std::vector<float> values);

    std::size_t rank() const noexcept { return dims.size(); }
    static std::size_t elementCount(std::span<const std::uint32_t> shape) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Channel-major feature map (C x H x W).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f);
    Tensor3(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> values);

    std::size_t channels() const noexcept { return m_channels; }
    std::size_t height() const noexcept { return m_height; }
    std::size_t width() const noexcept { return m_width; }
    std::size_t plane() const noexcept { return m_height * m_width; }

    float& at(std::size_t c, std::size_t y, std::size_t x) { return m_values[(c * m_height + y) * m_width + x]; }
    float at(std::size_t c, std::size_t y, std::size_t x) const { return m_values[(c * m_height + y) * m_width + x]; }

    std::span<float> values() noexcept { return m_values; }
    std::span<const float> values() const noexcept { return m_values; }
    std::span<float> channel(std::size_t c) { return std::span<float>(m_values).subspan(c * plane(), plane()); }
    std::span<const float> channel(std::size_t c) const
    {
        return std::span<const float>(m_values).subspan(c * plane(), plane());
    }

    Tensor toTensor() const;
    static Tensor3 fromTensor(const Tensor& t);

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    std::size_t m_channels = 0;
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<float> m_values;
};

/// Named tensors in insertion order. Names are unique.
class WeightArchive {
public:
    void add(std::string name, Tensor tensor);
    /// Inserts or overwrites.
    void set(const std::string& name, Tensor tensor);

    bool contains(const std::string& name) const { return m_index.contains(name); }
    const Tensor& get(const std::string& name) const;
    Tensor& get(const std::string& name);
    /// get() plus a shape check; throws MissingParameter / DimensionMismatch.
    const Tensor& require(const std::string& name, std::span<const std::uint32_t> shape) const;

    std::size_t size() const noexcept { return m_entries.size(); }
    const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return m_entries; }

    /// Copies every entry of other under prefix + name.
    void merge(const WeightArchive& other, const std::string& prefix = "");

    friend bool operator==(const WeightArchive& a, const WeightArchive& b) { return a.m_entries == b.m_entries; }

private:
    std::vector<std::pair<std::string, Tensor>> m_entries;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Zero-padded cross-correlation. kernel is [out, in, kh, kw].
Tensor3 conv2d(const Tensor3& x, const Tensor& kernel, std::span<const float> bias, int stride, int padding);

Tensor3 instance_norm(const Tensor3& x, std::span<const float> gain, std::span<const float> bias,
                      float eps = 1e-5f);

void relu_inplace(Tensor3& x);
void sigmoid_inplace(Tensor3& x);

/// x + IN(conv(ReLU(IN(conv(x))))) with 3x3 same-padding convolutions.
/// Reads <prefix>conv1.weight/bias, norm1.weight/bias, conv2.*, norm2.*.
Tensor3 residual_block(const Tensor3& x, const WeightArchive& params, const std::string& prefix);

std::vector<float> max_pool_global(const Tensor3& x);

/// Max-subtracted softmax in double precision.
std::vector<double> softmax(std::span<const double> v);

/// Row-stochastic attention matrix [query positions x key positions].
struct Attention {
    std::size_t queries = 0;
    std::size_t keys = 0;
    std::vector<double> weights;
};

/// Reads <prefix>{q,k,v}.weight [d, C] and .bias [d].
Attention attention_weights(const Tensor3& qFeat, const Tensor3& kvFeat, const WeightArchive& proj,
                            const std::string& prefix);

/// softmax(QK^T / sqrt(d)) V, reshaped to qFeat's spatial grid with d channels.
Tensor3 cross_attention(const Tensor3& qFeat, const Tensor3& kvFeat, const WeightArchive& proj,
                        const std::string& prefix);

/// Half-pixel-centre bilinear resize (align_corners = false).
Tensor3 resize_bilinear(const Tensor3& x, std::size_t height, std::size_t width);
Tensor3 upsample_bilinear(const Tensor3& x, int factor);

/// Affine layers <prefix>fc1, fc2, ... with ReLU between; the last layer is linear.
std::vector<float> mlp_forward(std::span<const float> v, const WeightArchive& layers, const std::string& prefix);

// Seeded parameter helpers. Kernels are He-normal; biases and norm shifts zero,
// norm gains one.
void init_conv(WeightArchive& archive, const std::string& name, std::uint32_t out, std::uint32_t in,
               std::uint32_t kernel, std::uint64_t seed);
void init_norm(WeightArchive& archive, const std::string& name, std::uint32_t channels);
void init_linear(WeightArchive& archive, const std::string& name, std::uint32_t out, std::uint32_t in,
                 std::uint64_t seed);
void init_residual_block(WeightArchive& archive, const std::string& prefix, std::uint32_t channels,
                         std::uint64_t seed);

} // namespace salut::nn

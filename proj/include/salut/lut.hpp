#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace salut {

inline constexpr std::size_t kMaxLutSize = 128;
inline constexpr std::size_t kMaxContextBins = 64;

using Rgb = std::array<double, 3>;

/// 3D color lattice: 3 output channels over D^3 nodes.
///
/// Entry order is channel slowest, then red, green, blue fastest. The domain
/// fields only exist for `.cube` interchange; the lattice always covers the
/// unit cube after input remapping.
class Lut3D {
public:
    Lut3D() = default;
    explicit Lut3D(std::size_t size);
    Lut3D(std::size_t size, std::vector<double> entries);

    std::size_t size() const noexcept { return m_size; }
    std::size_t nodeCount() const noexcept { return m_size * m_size * m_size; }

    std::size_t index(std::size_t c, std::size_t r, std::size_t g, std::size_t b) const noexcept
    {
        return ((c * m_size + r) * m_size + g) * m_size + b;
    }
    double& entry(std::size_t c, std::size_t r, std::size_t g, std::size_t b) { return m_entries[index(c, r, g, b)]; }
    double entry(std::size_t c, std::size_t r, std::size_t g, std::size_t b) const { return m_entries[index(c, r, g, b)]; }

    std::span<double> entries() noexcept { return m_entries; }
    std::span<const double> entries() const noexcept { return m_entries; }

    std::string title;
    std::array<double, 3> domainMin{0.0, 0.0, 0.0};
    std::array<double, 3> domainMax{1.0, 1.0, 1.0};

    friend bool operator==(const Lut3D&, const Lut3D&) = default;

private:
    std::size_t m_size = 0;
    std::vector<double> m_entries;
};

/// 4D lattice: 3 output channels x C context bins x D^3 color nodes.
///
/// Storage order is (channel, context, r, g, b) with b fastest; the binary
/// file format uses the same order. Entries are kept in double so fitting can
/// run on them directly; file export rounds to binary32.
class Lut4D {
public:
    Lut4D() = default;
    Lut4D(std::size_t size, std::size_t bins);
    Lut4D(std::size_t size, std::size_t bins, std::vector<double> entries);

    std::size_t size() const noexcept { return m_size; }
    std::size_t bins() const noexcept { return m_bins; }
    std::size_t nodeCount() const noexcept { return m_size * m_size * m_size; }
    /// Entries per output channel (C * D^3).
    std::size_t channelStride() const noexcept { return m_bins * nodeCount(); }

    std::size_t index(std::size_t c, std::size_t k, std::size_t r, std::size_t g, std::size_t b) const noexcept
    {
        return (((c * m_bins + k) * m_size + r) * m_size + g) * m_size + b;
    }
    double& entry(std::size_t c, std::size_t k, std::size_t r, std::size_t g, std::size_t b)
    {
        return m_entries[index(c, k, r, g, b)];
    }
    double entry(std::size_t c, std::size_t k, std::size_t r, std::size_t g, std::size_t b) const
    {
        return m_entries[index(c, k, r, g, b)];
    }

    std::span<double> entries() noexcept { return m_entries; }
    std::span<const double> entries() const noexcept { return m_entries; }

    bool sameShape(const Lut4D& other) const noexcept
    {
        return m_size == other.m_size && m_bins == other.m_bins;
    }

    /// The 3D transform stored in context bin k.
    Lut3D slice(std::size_t k) const;

    void clampEntries();
    /// Largest distance of any entry outside [0,1]; 0 when all are in range.
    double outOfRange() const noexcept;

    friend bool operator==(const Lut4D&, const Lut4D&) = default;

private:
    std::size_t m_size = 0;
    std::size_t m_bins = 0;
    std::vector<double> m_entries;
};

/// N residual bases sharing (D, C) plus the identity they are added to.
class BasisLutBank {
public:
    BasisLutBank() = default;
    BasisLutBank(std::size_t size, std::size_t bins, std::vector<Lut4D> bases);

    std::size_t count() const noexcept { return m_bases.size(); }
    std::size_t size() const noexcept { return m_identity.size(); }
    std::size_t bins() const noexcept { return m_identity.bins(); }

    const Lut4D& basis(std::size_t i) const { return m_bases.at(i); }
    std::span<const Lut4D> bases() const noexcept { return m_bases; }
    const Lut4D& identity() const noexcept { return m_identity; }

private:
    std::vector<Lut4D> m_bases;
    Lut4D m_identity;
};

/// Per-basis blend weights. Non-negative; simplex when produced by softmax.
struct StyleWeights {
    std::vector<double> alpha;
};

Lut4D make_identity_lut4d(std::size_t size, std::size_t bins);
Lut3D make_identity_lut3d(std::size_t size);

Lut3D to_lut3d(const Lut4D& lut);
/// A single-bin 4D LUT carrying the 3D entries (domain fields are dropped).
Lut4D to_lut4d(const Lut3D& lut);

/// Seeded bank of smooth residual bases. Each (channel, bin) block of a basis
/// is scale * (affine function of (r,g,b) + a sinusoid along the channel's own
/// axis) with standard-normal coefficients.
BasisLutBank random_basis_bank(std::size_t size, std::size_t bins, std::size_t count, std::uint64_t seed,
                               double scale);

/// identity + sum(alpha_i * basis_i), optionally clipped to [0,1].
Lut4D fuse_luts(const BasisLutBank& bank, const StyleWeights& weights, bool clamp);

/// Same blend with unconstrained coefficients; used by fitting.
Lut4D fuse_residuals(const BasisLutBank& bank, std::span<const double> coefficients, bool clamp);

/// The 16 lattice corners touched by one quadrilinear lookup.
///
/// offsets are relative to the start of a channel block (add c * channelStride
/// for output channel c). Weights are non-negative and sum to one.
struct QuadCorners {
    std::array<std::size_t, 16> offsets{};
    std::array<double, 16> weights{};
};

QuadCorners quad_corners(std::size_t size, std::size_t bins, double gamma, double r, double g, double b);

/// Quadrilinear interpolation. All four coordinates are clamped to [0,1].
Rgb quad_interp(const Lut4D& lut, double gamma, double r, double g, double b);
Rgb quad_interp(std::span<const double> entries, std::size_t size, std::size_t bins,
                double gamma, double r, double g, double b);

/// Trilinear interpolation in the LUT's domain (inputs clamped to it).
Rgb tri_interp(const Lut3D& lut, double r, double g, double b);

} // namespace salut

#include "salut/lut.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace salut {

namespace {

void checkShape(std::size_t size, std::size_t bins)
{
    if (size < 2 || size > kMaxLutSize) {
        throw Error(ErrorKind::InvalidDimension,
                    "LUT size must be in [2, " + std::to_string(kMaxLutSize) + "], got " + std::to_string(size));
    }
    if (bins < 1 || bins > kMaxContextBins) {
        throw Error(ErrorKind::InvalidDimension,
                    "context bin count must be in [1, " + std::to_string(kMaxContextBins) + "], got "
                        + std::to_string(bins));
    }
}

struct AxisCoord {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

// Clamps v to [0,1] (NaN maps to 0) and locates it on an n-node axis.
AxisCoord locate(double v, std::size_t n)
{
    if (!(v > 0.0)) {
        v = 0.0;
    } else if (v > 1.0) {
        v = 1.0;
    }
    if (n == 1) {
        return {0, 0, 0.0};
    }
    const double x = v * static_cast<double>(n - 1);
    const std::size_t lo = std::min(static_cast<std::size_t>(x), n - 2);
    return {lo, lo + 1, x - static_cast<double>(lo)};
}

} // namespace

Lut3D::Lut3D(std::size_t size)
    : m_size(size)
{
    checkShape(size, 1);
    m_entries.assign(3 * nodeCount(), 0.0);
}

Lut3D::Lut3D(std::size_t size, std::vector<double> entries)
    : m_size(size), m_entries(std::move(entries))
{
    checkShape(size, 1);
    if (m_entries.size() != 3 * nodeCount()) {
        throw Error(ErrorKind::DimensionMismatch, "3D LUT of size " + std::to_string(size) + " needs "
                                                      + std::to_string(3 * nodeCount()) + " entries");
    }
}

Lut4D::Lut4D(std::size_t size, std::size_t bins)
    : m_size(size), m_bins(bins)
{
    checkShape(size, bins);
    m_entries.assign(3 * channelStride(), 0.0);
}

Lut4D::Lut4D(std::size_t size, std::size_t bins, std::vector<double> entries)
    : m_size(size), m_bins(bins), m_entries(std::move(entries))
{
    checkShape(size, bins);
    if (m_entries.size() != 3 * channelStride()) {
        throw Error(ErrorKind::DimensionMismatch, "4D LUT of size " + std::to_string(size) + "x"
                                                      + std::to_string(bins) + " needs "
                                                      + std::to_string(3 * channelStride()) + " entries");
    }
}

Lut3D Lut4D::slice(std::size_t k) const
{
    if (k >= m_bins) {
        throw Error(ErrorKind::InvalidDimension, "context bin " + std::to_string(k) + " out of range");
    }
    Lut3D out(m_size);
    const std::size_t n = nodeCount();
    for (std::size_t c = 0; c < 3; ++c) {
        std::copy_n(m_entries.begin() + static_cast<std::ptrdiff_t>(index(c, k, 0, 0, 0)), n,
                    out.entries().begin() + static_cast<std::ptrdiff_t>(c * n));
    }
    return out;
}

void Lut4D::clampEntries()
{
    for (double& v : m_entries) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

double Lut4D::outOfRange() const noexcept
{
    double worst = 0.0;
    for (double v : m_entries) {
        worst = std::max({worst, -v, v - 1.0});
    }
    return worst;
}

BasisLutBank::BasisLutBank(std::size_t size, std::size_t bins, std::vector<Lut4D> bases)
    : m_bases(std::move(bases)), m_identity(make_identity_lut4d(size, bins))
{
    for (std::size_t i = 0; i < m_bases.size(); ++i) {
        if (!m_bases[i].sameShape(m_identity)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "basis " + std::to_string(i) + " has shape " + std::to_string(m_bases[i].size()) + "x"
                            + std::to_string(m_bases[i].bins()) + ", bank expects " + std::to_string(size)
                            + "x" + std::to_string(bins));
        }
    }
}

Lut4D make_identity_lut4d(std::size_t size, std::size_t bins)
{
    Lut4D lut(size, bins);
    const double step = 1.0 / static_cast<double>(size - 1);
    for (std::size_t k = 0; k < bins; ++k) {
        for (std::size_t r = 0; r < size; ++r) {
            for (std::size_t g = 0; g < size; ++g) {
                for (std::size_t b = 0; b < size; ++b) {
                    lut.entry(0, k, r, g, b) = static_cast<double>(r) * step;
                    lut.entry(1, k, r, g, b) = static_cast<double>(g) * step;
                    lut.entry(2, k, r, g, b) = static_cast<double>(b) * step;
                }
            }
        }
    }
    return lut;
}

Lut3D make_identity_lut3d(std::size_t size)
{
    return make_identity_lut4d(size, 1).slice(0);
}

Lut3D to_lut3d(const Lut4D& lut)
{
    if (lut.bins() != 1) {
        throw Error(ErrorKind::DimensionMismatch, "only single-bin 4D LUTs convert to 3D");
    }
    return lut.slice(0);
}

Lut4D to_lut4d(const Lut3D& lut)
{
    return Lut4D(lut.size(), 1, std::vector<double>(lut.entries().begin(), lut.entries().end()));
}

BasisLutBank random_basis_bank(std::size_t size, std::size_t bins, std::size_t count, std::uint64_t seed,
                               double scale)
{
    checkShape(size, bins);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double step = 1.0 / static_cast<double>(size - 1);
    std::vector<Lut4D> bases;
    bases.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        Lut4D basis(size, bins);
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t k = 0; k < bins; ++k) {
                const double mr = normal(rng);
                const double mg = normal(rng);
                const double mb = normal(rng);
                const double offset = normal(rng);
                const double wave = normal(rng);
                const double phase = normal(rng);
                for (std::size_t r = 0; r < size; ++r) {
                    for (std::size_t g = 0; g < size; ++g) {
                        for (std::size_t b = 0; b < size; ++b) {
                            const std::array<double, 3> x{r * step, g * step, b * step};
                            const double v = mr * (x[0] - 0.5) + mg * (x[1] - 0.5) + mb * (x[2] - 0.5) + offset
                                             + wave * std::sin(2.0 * std::numbers::pi * x[c] + phase) / 8.0;
                            basis.entry(c, k, r, g, b) = scale * v;
                        }
                    }
                }
            }
        }
        bases.push_back(std::move(basis));
    }
    return BasisLutBank(size, bins, std::move(bases));
}

Lut4D fuse_luts(const BasisLutBank& bank, const StyleWeights& weights, bool clamp)
{
    for (double a : weights.alpha) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw Error(ErrorKind::Numeric, "style weights must be finite and non-negative");
        }
    }
    return fuse_residuals(bank, weights.alpha, clamp);
}

Lut4D fuse_residuals(const BasisLutBank& bank, std::span<const double> coefficients, bool clamp)
{
    if (coefficients.size() != bank.count()) {
        throw Error(ErrorKind::DimensionMismatch, "got " + std::to_string(coefficients.size())
                                                      + " weights for a bank of " + std::to_string(bank.count()));
    }
    Lut4D fused = bank.identity();
    std::span<double> out = fused.entries();
    for (std::size_t i = 0; i < bank.count(); ++i) {
        const double a = coefficients[i];
        if (a == 0.0) {
            continue;
        }
        std::span<const double> basis = bank.basis(i).entries();
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += a * basis[j];
        }
    }
    if (clamp) {
        fused.clampEntries();
    }
    return fused;
}

QuadCorners quad_corners(std::size_t size, std::size_t bins, double gamma, double r, double g, double b)
{
    const AxisCoord ck = locate(gamma, bins);
    const AxisCoord cr = locate(r, size);
    const AxisCoord cg = locate(g, size);
    const AxisCoord cb = locate(b, size);

    const std::array<std::size_t, 2> ks{ck.lo, ck.hi};
    const std::array<std::size_t, 2> rs{cr.lo, cr.hi};
    const std::array<std::size_t, 2> gs{cg.lo, cg.hi};
    const std::array<std::size_t, 2> bs{cb.lo, cb.hi};
    const std::array<double, 2> wk{1.0 - ck.frac, ck.frac};
    const std::array<double, 2> wr{1.0 - cr.frac, cr.frac};
    const std::array<double, 2> wg{1.0 - cg.frac, cg.frac};
    const std::array<double, 2> wb{1.0 - cb.frac, cb.frac};

    QuadCorners q;
    std::size_t n = 0;
    for (int dk = 0; dk < 2; ++dk) {
        for (int dr = 0; dr < 2; ++dr) {
            for (int dg = 0; dg < 2; ++dg) {
                for (int db = 0; db < 2; ++db) {
                    q.offsets[n] = ((ks[dk] * size + rs[dr]) * size + gs[dg]) * size + bs[db];
                    q.weights[n] = wk[dk] * wr[dr] * wg[dg] * wb[db];
                    ++n;
                }
            }
        }
    }
    return q;
}

Rgb quad_interp(std::span<const double> entries, std::size_t size, std::size_t bins,
                double gamma, double r, double g, double b)
{
    const QuadCorners q = quad_corners(size, bins, gamma, r, g, b);
    const std::size_t stride = bins * size * size * size;
    Rgb out{0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < 3; ++c) {
        const double* block = entries.data() + c * stride;
        double acc = 0.0;
        for (std::size_t n = 0; n < 16; ++n) {
            acc += q.weights[n] * block[q.offsets[n]];
        }
        out[c] = acc;
    }
    return out;
}

Rgb quad_interp(const Lut4D& lut, double gamma, double r, double g, double b)
{
    return quad_interp(lut.entries(), lut.size(), lut.bins(), gamma, r, g, b);
}

Rgb tri_interp(const Lut3D& lut, double r, double g, double b)
{
    const Rgb in{r, g, b};
    Rgb unit{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double span = lut.domainMax[c] - lut.domainMin[c];
        unit[c] = span > 0.0 ? (in[c] - lut.domainMin[c]) / span : 0.0;
    }
    return quad_interp(lut.entries(), lut.size(), 1, 0.0, unit[0], unit[1], unit[2]);
}

} // namespace salut

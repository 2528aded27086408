#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Nothing here calls into the library's interpolation or loss code.

#include "salut/image.hpp"
#include "salut/lut.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oracle {

// Lattice coordinate of v in [0,1] over n nodes (n == 1 collapses to 0).
inline double latticeCoord(double v, std::size_t n)
{
    if (!(v > 0.0)) {
        v = 0.0;
    }
    v = std::min(v, 1.0);
    return n > 1 ? v * static_cast<double>(n - 1) : 0.0;
}

// Tent weight of node j for coordinate u.
inline double hat(double u, std::size_t j)
{
    return std::max(0.0, 1.0 - std::abs(u - static_cast<double>(j)));
}

// Sum over every lattice node of the product of tent weights.
inline salut::Rgb quad(const salut::Lut4D& lut, double gamma, double r, double g, double b)
{
    const std::size_t d = lut.size();
    const std::size_t bins = lut.bins();
    const double ur = latticeCoord(r, d), ug = latticeCoord(g, d), ub = latticeCoord(b, d);
    const double uk = latticeCoord(gamma, bins);
    salut::Rgb out{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < bins; ++k) {
        const double wk = hat(uk, k);
        if (wk == 0.0) {
            continue;
        }
        for (std::size_t ir = 0; ir < d; ++ir) {
            const double wr = hat(ur, ir);
            if (wr == 0.0) {
                continue;
            }
            for (std::size_t ig = 0; ig < d; ++ig) {
                const double wg = hat(ug, ig);
                if (wg == 0.0) {
                    continue;
                }
                for (std::size_t ib = 0; ib < d; ++ib) {
                    const double w = wk * wr * wg * hat(ub, ib);
                    for (std::size_t c = 0; c < 3; ++c) {
                        out[c] += w * lut.entry(c, k, ir, ig, ib);
                    }
                }
            }
        }
    }
    return out;
}

inline salut::Rgb tri(const salut::Lut3D& lut, double r, double g, double b)
{
    const std::size_t d = lut.size();
    std::array<double, 3> u{r, g, b};
    for (std::size_t c = 0; c < 3; ++c) {
        const double lo = lut.domainMin[c];
        const double hi = lut.domainMax[c];
        u[c] = latticeCoord((u[c] - lo) / (hi - lo), d);
    }
    salut::Rgb out{0.0, 0.0, 0.0};
    for (std::size_t ir = 0; ir < d; ++ir) {
        for (std::size_t ig = 0; ig < d; ++ig) {
            for (std::size_t ib = 0; ib < d; ++ib) {
                const double w = hat(u[0], ir) * hat(u[1], ig) * hat(u[2], ib);
                if (w == 0.0) {
                    continue;
                }
                for (std::size_t c = 0; c < 3; ++c) {
                    out[c] += w * lut.entry(c, ir, ig, ib);
                }
            }
        }
    }
    return out;
}

inline salut::Lut4D randomLut(std::size_t size, std::size_t bins, std::mt19937_64& rng, double lo = 0.0,
                              double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    salut::Lut4D lut(size, bins);
    for (double& e : lut.entries()) {
        e = u(rng);
    }
    return lut;
}

inline salut::ImageBuffer randomImage(std::size_t h, std::size_t w, std::mt19937_64& rng)
{
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    salut::ImageBuffer img(h, w);
    for (float& v : img.values()) {
        v = u(rng);
    }
    return img;
}

inline salut::ContextMap randomContext(std::size_t h, std::size_t w, std::mt19937_64& rng)
{
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    salut::ContextMap ctx(h, w);
    for (float& v : ctx.values()) {
        v = u(rng);
    }
    return ctx;
}

inline double maxAbsDiff(std::span<const float> a, std::span<const float> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return m;
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        m_path = std::filesystem::temp_directory_path()
                 / ("salut-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return m_path; }
    std::string operator/(const std::string& name) const { return (m_path / name).string(); }

private:
    std::filesystem::path m_path;
};

} // namespace oracle

#pragma once

#include "salut/image.hpp"

#include <array>
#include <cstddef>
#include <span>

namespace salut::metrics {

/// 10*log10(1/MSE) for peak 1. Identical images give +infinity.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean SSIM over all fully contained windows of Rec.709 luma.
/// Gaussian window 11x11 (sigma 1.5), shrunk to min(H, W) for small images.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr std::size_t kHistBins = 256;

/// Pearson correlation of per-channel 256-bin normalized histograms, averaged
/// over R, G, B. A channel whose histogram is flat in either image counts as
/// 1 when both histograms are equal and 0 otherwise.
double hist_corr(const ImageBuffer& a, const ImageBuffer& b);

struct Lab {
    double l;
    double a;
    double b;
};

/// sRGB (D65) to CIELAB with reference white (0.95047, 1.0, 1.08883).
Lab srgb_to_lab(double r, double g, double b);

inline constexpr std::size_t kLabLBins = 100;  // over [0, 100]
inline constexpr std::size_t kLabABBins = 128; // over [-128, 128]

/// Average pairwise Bhattacharyya distance -ln(sum sqrt(p*q)) of the L*, a*
/// and b* histograms over all unordered pairs. Disjoint histograms give
/// +infinity. Needs at least two images.
std::array<double, 3> lab_bhattacharyya(std::span<const ImageBuffer> images);

} // namespace salut::metrics

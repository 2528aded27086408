#include "salut/metrics.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace salut::metrics {

namespace {

void requireSameShape(const ImageBuffer& a, const ImageBuffer& b)
{
    if (!a.sameShape(b)) {
        throw Error(ErrorKind::DimensionMismatch, "metric inputs must have the same size");
    }
    if (a.empty()) {
        throw Error(ErrorKind::InvalidDimension, "metric inputs must not be empty");
    }
}

std::vector<double> luma(const ImageBuffer& img)
{
    std::vector<double> out(img.pixelCount());
    std::span<const float> v = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.2126 * v[3 * i] + 0.7152 * v[3 * i + 1] + 0.0722 * v[3 * i + 2];
    }
    return out;
}

std::vector<double> gaussianWindow(std::size_t n, double sigma)
{
    std::vector<double> k(n);
    const double centre = (static_cast<double>(n) - 1.0) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - centre;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

// Separable "valid" filtering: output is (h-n+1) x (w-n+1).
std::vector<double> filterValid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                const std::vector<double>& k)
{
    const std::size_t n = k.size();
    const std::size_t ow = w - n + 1;
    const std::size_t oh = h - n + 1;
    std::vector<double> rows(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += k[j] * src[y * w + x + j];
            }
            rows[y * ow + x] = s;
        }
    }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += k[j] * rows[(y + j) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    return out;
}

std::array<double, kHistBins> channelHistogram(const ImageBuffer& img, std::size_t c)
{
    std::array<double, kHistBins> h{};
    std::span<const float> v = img.values();
    const std::size_t n = img.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::clamp(static_cast<double>(v[3 * i + c]), 0.0, 1.0);
        const auto bin = std::min<std::size_t>(kHistBins - 1, static_cast<std::size_t>(x * kHistBins));
        h[bin] += 1.0;
    }
    for (double& x : h) {
        x /= static_cast<double>(n);
    }
    return h;
}

double srgbToLinear(double v)
{
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double labF(double t)
{
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

std::size_t binOf(double v, double lo, double hi, std::size_t bins)
{
    const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
    if (!(pos > 0.0)) {
        return 0;
    }
    return std::min(bins - 1, static_cast<std::size_t>(pos));
}

struct LabHistogram {
    std::vector<double> l = std::vector<double>(kLabLBins, 0.0);
    std::vector<double> a = std::vector<double>(kLabABBins, 0.0);
    std::vector<double> b = std::vector<double>(kLabABBins, 0.0);
    double total = 0.0;
};

LabHistogram labHistogram(const ImageBuffer& img)
{
    LabHistogram h;
    std::span<const float> v = img.values();
    const std::size_t n = img.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        const Lab lab = srgb_to_lab(std::clamp(static_cast<double>(v[3 * i]), 0.0, 1.0),
                                    std::clamp(static_cast<double>(v[3 * i + 1]), 0.0, 1.0),
                                    std::clamp(static_cast<double>(v[3 * i + 2]), 0.0, 1.0));
        h.l[binOf(lab.l, 0.0, 100.0, kLabLBins)] += 1.0;
        h.a[binOf(lab.a, -128.0, 128.0, kLabABBins)] += 1.0;
        h.b[binOf(lab.b, -128.0, 128.0, kLabABBins)] += 1.0;
    }
    h.total = static_cast<double>(n);
    return h;
}

// Works on raw counts so identical histograms give a coefficient of exactly 1.
double bhattacharyya(const std::vector<double>& p, double np, const std::vector<double>& q, double nq)
{
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::sqrt(p[i] * q[i]);
    }
    const double bc = std::min(1.0, s / std::sqrt(np * nq));
    if (bc <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::max(0.0, -std::log(bc));
}

} // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b)
{
    requireSameShape(a, b);
    std::span<const float> x = a.values();
    std::span<const float> y = b.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        sum += d * d;
    }
    if (sum == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(static_cast<double>(x.size()) / sum);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b)
{
    requireSameShape(a, b);
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    const std::size_t n = std::min<std::size_t>({11, h, w});
    const std::vector<double> k = gaussianWindow(n, 1.5);

    const std::vector<double> x = luma(a);
    const std::vector<double> y = luma(b);
    std::vector<double> xx(x.size());
    std::vector<double> yy(x.size());
    std::vector<double> xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const std::vector<double> mx = filterValid(x, h, w, k);
    const std::vector<double> my = filterValid(y, h, w, k);
    const std::vector<double> sxx = filterValid(xx, h, w, k);
    const std::vector<double> syy = filterValid(yy, h, w, k);
    const std::vector<double> sxy = filterValid(xy, h, w, k);

    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
        total += num / den;
    }
    return total / static_cast<double>(mx.size());
}

double hist_corr(const ImageBuffer& a, const ImageBuffer& b)
{
    if (a.empty() || b.empty()) {
        throw Error(ErrorKind::InvalidDimension, "metric inputs must not be empty");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto p = channelHistogram(a, c);
        const auto q = channelHistogram(b, c);
        double mp = 0.0;
        double mq = 0.0;
        for (std::size_t i = 0; i < kHistBins; ++i) {
            mp += p[i];
            mq += q[i];
        }
        mp /= kHistBins;
        mq /= kHistBins;
        double cov = 0.0;
        double vp = 0.0;
        double vq = 0.0;
        for (std::size_t i = 0; i < kHistBins; ++i) {
            cov += (p[i] - mp) * (q[i] - mq);
            vp += (p[i] - mp) * (p[i] - mp);
            vq += (q[i] - mq) * (q[i] - mq);
        }
        if (vp == 0.0 || vq == 0.0) {
            total += p == q ? 1.0 : 0.0;
        } else {
            total += std::clamp(cov / std::sqrt(vp * vq), -1.0, 1.0);
        }
    }
    return total / 3.0;
}

Lab srgb_to_lab(double r, double g, double b)
{
    const double lr = srgbToLinear(r);
    const double lg = srgbToLinear(g);
    const double lb = srgbToLinear(b);
    const double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb;
    const double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
    const double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb;
    const double fx = labF(x / 0.95047);
    const double fy = labF(y / 1.0);
    const double fz = labF(z / 1.08883);
    return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<double, 3> lab_bhattacharyya(std::span<const ImageBuffer> images)
{
    if (images.size() < 2) {
        throw Error(ErrorKind::InvalidDimension, "the Bhattacharyya diversity measure needs at least two images");
    }
    std::vector<LabHistogram> hists;
    hists.reserve(images.size());
    for (const ImageBuffer& img : images) {
        if (img.empty()) {
            throw Error(ErrorKind::InvalidDimension, "metric inputs must not be empty");
        }
        hists.push_back(labHistogram(img));
    }
    std::array<double, 3> sum{0.0, 0.0, 0.0};
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < hists.size(); ++i) {
        for (std::size_t j = i + 1; j < hists.size(); ++j) {
            sum[0] += bhattacharyya(hists[i].l, hists[i].total, hists[j].l, hists[j].total);
            sum[1] += bhattacharyya(hists[i].a, hists[i].total, hists[j].a, hists[j].total);
            sum[2] += bhattacharyya(hists[i].b, hists[i].total, hists[j].b, hists[j].total);
            ++pairs;
        }
    }
    for (double& s : sum) {
        s /= static_cast<double>(pairs);
    }
    return sum;
}

} // namespace salut::metrics

#pragma once

#include "salut/image.hpp"
#include "salut/lut.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace salut::fit {

enum class Mode { Alpha, LutEntries };

struct FitConfig {
    Mode mode = Mode::LutEntries;
    double lambdaRec = 1.0;
    double lambdaTv = 1e-4;
    double lambdaMn = 10.0;
    std::size_t steps = 1000;
    double learningRate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adamEps = 1e-8;
    std::uint64_t seed = 0;
    /// Pixels sampled per step (seeded); 0 uses every pixel every step.
    std::size_t batchPixels = 0;

    void validate() const;
};

/// One supervised example: content plus its context map, and the target.
struct FitPair {
    ImageBuffer content;
    ContextMap context;
    ImageBuffer target;
};

struct LossBreakdown {
    double rec = 0.0;
    double tv = 0.0;
    double mn = 0.0;
    double total = 0.0;
};

/// Mean squared difference over lattice-adjacent entries along r, g and b
/// (the context axis is left alone), over all channels and bins.
double loss_tv(const Lut4D& lut);

/// (1/3) * sum over channels c of ReLU(E[i] - E[i + e_c])^2 over the lattice,
/// where e_c steps along c's own color axis. Zero iff every output channel is
/// non-decreasing along its own axis.
double loss_mn(const Lut4D& lut);

/// Mean squared error over pixels and channels.
double loss_rec(const ImageBuffer& pred, const ImageBuffer& target);

/// Fitting objective over a fixed set of pairs.
///
/// Parameters are the raw LUT entries (LutEntries) or the unconstrained blend
/// coefficients of a basis bank (Alpha, LUT = identity + sum a_i B_i). The
/// fused LUT is never clamped here. The reconstruction term is linear in LUT
/// entries per pixel, so its gradient scatters each residual onto the 16
/// interpolation corners with their weights. Summation order is fixed.
class FitProblem {
public:
    /// LutEntries mode.
    FitProblem(std::span<const FitPair> pairs, const FitConfig& cfg, std::size_t size, std::size_t bins);
    /// Alpha mode.
    FitProblem(std::span<const FitPair> pairs, const FitConfig& cfg, const BasisLutBank& bank);

    Mode mode() const noexcept { return m_cfg.mode; }
    std::size_t parameterCount() const noexcept;
    std::size_t pixelCount() const noexcept { return m_targets.size() / 3; }

    /// Total loss; fills grad (same length as params) when it is non-empty.
    /// pixels restricts the reconstruction term to a subset (empty = all).
    LossBreakdown evaluate(std::span<const double> params, std::span<double> grad,
                           std::span<const std::uint32_t> pixels = {}) const;

    /// The unclamped LUT the parameters describe.
    Lut4D lut(std::span<const double> params) const;

private:
    void prepare(std::span<const FitPair> pairs);

    FitConfig m_cfg;
    std::size_t m_size = 0;
    std::size_t m_bins = 0;
    const BasisLutBank* m_bank = nullptr;
    std::vector<QuadCorners> m_corners;
    std::vector<double> m_targets;
};

/// Gradient of lambda_rec*L_rec + lambda_tv*L_TV + lambda_mn*L_MN.
std::vector<double> grad_total(const FitProblem& problem, std::span<const double> params);

struct TraceRow {
    std::size_t step = 0;
    LossBreakdown loss;
};

struct FitResult {
    std::vector<double> params;
    Lut4D lut; // unclamped
    std::vector<TraceRow> trace;
    double outOfRange = 0.0;
};

/// Adam on the problem's parameters for cfg.steps steps. The trace holds the
/// loss before every update plus one final row. Throws ErrorKind::Numeric on
/// a non-finite loss.
FitResult fit(const FitProblem& problem, std::vector<double> init, const FitConfig& cfg);

FitResult fit_lut(std::span<const FitPair> pairs, const FitConfig& cfg, const Lut4D& init);
FitResult fit_alpha(std::span<const FitPair> pairs, const FitConfig& cfg, const BasisLutBank& bank,
                    std::vector<double> initAlpha = {});

std::string trace_csv(std::span<const TraceRow> trace);

struct GradCheckEntry {
    std::size_t coordinate = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relError = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double maxRelError = 0.0;
    bool passed = false;
};

/// Compares analytic gradients with central differences on randomly chosen
/// coordinates. Relative error is |a - n| / max(|a|, |n|, 1e-7).
/// corruption is added to every analytic component (a test hook).
GradCheckReport gradient_check(const FitProblem& problem, std::span<const double> params, std::size_t coordinates,
                               std::uint64_t seed, double step = 1e-3, double tolerance = 1e-4,
                               double corruption = 0.0);

struct GradCheckSuite {
    GradCheckReport lutEntries;
    GradCheckReport alpha;
    bool passed() const noexcept { return lutEntries.passed && alpha.passed; }
};

/// The standard finite-difference suite: D=5, C=2, 8 random pixels with
/// random targets, all three loss terms weighted 1, in both modes (the alpha
/// mode uses a seeded bank of 128 bases). Central differences use h=1e-3.
GradCheckSuite run_gradcheck_suite(std::uint64_t seed, std::size_t coordinates = 100, double corruption = 0.0);

} // namespace salut::fit

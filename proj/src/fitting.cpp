#include "salut/fitting.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace salut::fit {

namespace {

// Strides of the r, g, b axes inside one (channel, bin) block.
struct Lattice {
    std::size_t size;
    std::size_t bins;
    std::size_t nodes;
    std::array<std::size_t, 3> stride;

    Lattice(std::size_t d, std::size_t c) : size(d), bins(c), nodes(d * d * d), stride{d * d, d, 1} {}
    std::size_t blocks() const { return 3 * bins; }
};

std::size_t tvPairCount(const Lattice& l)
{
    return l.blocks() * 3 * (l.size - 1) * l.size * l.size;
}

// Visits (i, i + e_axis) for every lattice-adjacent pair along one axis in a
// block starting at base, in index order of i.
template <class F>
void forEachPair(const Lattice& l, std::size_t base, std::size_t axis, F&& f)
{
    const std::size_t d = l.size;
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t g = 0; g < d; ++g) {
            for (std::size_t b = 0; b < d; ++b) {
                const std::array<std::size_t, 3> idx{r, g, b};
                if (idx[axis] + 1 >= d) {
                    continue;
                }
                const std::size_t i = base + r * l.stride[0] + g * l.stride[1] + b;
                f(i, i + l.stride[axis]);
            }
        }
    }
}

double tvValue(std::span<const double> e, const Lattice& l, std::span<double> grad, double scale)
{
    if (l.size < 2) {
        return 0.0;
    }
    const double norm = 1.0 / static_cast<double>(tvPairCount(l));
    double sum = 0.0;
    for (std::size_t blk = 0; blk < l.blocks(); ++blk) {
        for (std::size_t axis = 0; axis < 3; ++axis) {
            forEachPair(l, blk * l.nodes, axis, [&](std::size_t i, std::size_t j) {
                const double diff = e[j] - e[i];
                sum += diff * diff;
                if (!grad.empty()) {
                    const double gv = 2.0 * diff * norm * scale;
                    grad[j] += gv;
                    grad[i] -= gv;
                }
            });
        }
    }
    return sum * norm;
}

double mnValue(std::span<const double> e, const Lattice& l, std::span<double> grad, double scale)
{
    if (l.size < 2) {
        return 0.0;
    }
    constexpr double third = 1.0 / 3.0;
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < l.bins; ++k) {
            forEachPair(l, (c * l.bins + k) * l.nodes, c, [&](std::size_t i, std::size_t j) {
                const double drop = e[i] - e[j];
                if (drop > 0.0) {
                    sum += drop * drop;
                    if (!grad.empty()) {
                        const double gv = 2.0 * drop * third * scale;
                        grad[i] += gv;
                        grad[j] -= gv;
                    }
                }
            });
        }
    }
    return sum * third;
}

void requireNonNegative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::Usage, std::string(name) + " must be a finite value >= 0");
    }
}

} // namespace

void FitConfig::validate() const
{
    requireNonNegative(lambdaRec, "lambda_rec");
    requireNonNegative(lambdaTv, "lambda_tv");
    requireNonNegative(lambdaMn, "lambda_mn");
    if (steps < 1) {
        throw Error(ErrorKind::Usage, "steps must be >= 1");
    }
    if (!(learningRate > 0.0) || !std::isfinite(learningRate)) {
        throw Error(ErrorKind::Usage, "learning_rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw Error(ErrorKind::Usage, "adam betas must lie in [0,1)");
    }
    if (!(adamEps > 0.0)) {
        throw Error(ErrorKind::Usage, "adam eps must be positive");
    }
}

double loss_tv(const Lut4D& lut)
{
    return tvValue(lut.entries(), Lattice(lut.size(), lut.bins()), {}, 0.0);
}

double loss_mn(const Lut4D& lut)
{
    return mnValue(lut.entries(), Lattice(lut.size(), lut.bins()), {}, 0.0);
}

double loss_rec(const ImageBuffer& pred, const ImageBuffer& target)
{
    if (!pred.sameShape(target)) {
        throw Error(ErrorKind::DimensionMismatch, "prediction and target sizes differ");
    }
    std::span<const float> a = pred.values();
    std::span<const float> b = target.values();
    if (a.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

FitProblem::FitProblem(std::span<const FitPair> pairs, const FitConfig& cfg, std::size_t size, std::size_t bins)
    : m_cfg(cfg), m_size(size), m_bins(bins)
{
    m_cfg.mode = Mode::LutEntries;
    m_cfg.validate();
    (void)Lut4D(size, bins); // validates D and C
    prepare(pairs);
}

FitProblem::FitProblem(std::span<const FitPair> pairs, const FitConfig& cfg, const BasisLutBank& bank)
    : m_cfg(cfg), m_size(bank.size()), m_bins(bank.bins()), m_bank(&bank)
{
    m_cfg.mode = Mode::Alpha;
    m_cfg.validate();
    if (bank.count() == 0) {
        throw Error(ErrorKind::InvalidDimension, "alpha fitting needs a bank with at least one basis");
    }
    prepare(pairs);
}

void FitProblem::prepare(std::span<const FitPair> pairs)
{
    if (pairs.empty()) {
        throw Error(ErrorKind::InvalidDimension, "fitting needs at least one pair");
    }
    for (const FitPair& p : pairs) {
        if (!p.content.sameShape(p.target)) {
            throw Error(ErrorKind::DimensionMismatch, "content and target sizes differ");
        }
        if (!p.context.matches(p.content)) {
            throw Error(ErrorKind::DimensionMismatch, "context map size differs from content");
        }
        const std::size_t n = p.content.pixelCount();
        std::span<const float> src = p.content.values();
        std::span<const float> tgt = p.target.values();
        std::span<const float> ctx = p.context.values();
        for (std::size_t i = 0; i < n; ++i) {
            m_corners.push_back(quad_corners(m_size, m_bins, ctx[i], src[3 * i], src[3 * i + 1], src[3 * i + 2]));
            for (std::size_t c = 0; c < 3; ++c) {
                m_targets.push_back(tgt[3 * i + c]);
            }
        }
    }
    if (m_corners.size() > 0xFFFFFFFFu) {
        throw Error(ErrorKind::InvalidDimension, "too many training pixels");
    }
}

std::size_t FitProblem::parameterCount() const noexcept
{
    if (m_cfg.mode == Mode::Alpha) {
        return m_bank->count();
    }
    return 3 * m_bins * m_size * m_size * m_size;
}

Lut4D FitProblem::lut(std::span<const double> params) const
{
    if (params.size() != parameterCount()) {
        throw Error(ErrorKind::DimensionMismatch, "parameter vector length does not match the fitting mode");
    }
    if (m_cfg.mode == Mode::Alpha) {
        return fuse_residuals(*m_bank, params, false);
    }
    return Lut4D(m_size, m_bins, std::vector<double>(params.begin(), params.end()));
}

LossBreakdown FitProblem::evaluate(std::span<const double> params, std::span<double> grad,
                                   std::span<const std::uint32_t> pixels) const
{
    const Lut4D current = lut(params);
    std::span<const double> e = current.entries();
    const bool wantGrad = !grad.empty();
    if (wantGrad && grad.size() != params.size()) {
        throw Error(ErrorKind::DimensionMismatch, "gradient buffer length does not match parameters");
    }

    // Gradient with respect to the LUT entries; chained to alpha afterwards.
    std::vector<double> entryGrad;
    std::span<double> gE;
    if (wantGrad) {
        if (m_cfg.mode == Mode::LutEntries) {
            std::ranges::fill(grad, 0.0);
            gE = grad;
        } else {
            entryGrad.assign(e.size(), 0.0);
            gE = entryGrad;
        }
    }

    const std::size_t stride = current.channelStride();
    const std::size_t count = pixels.empty() ? m_corners.size() : pixels.size();
    const double recScale = m_cfg.lambdaRec * 2.0 / static_cast<double>(3 * count);
    double recSum = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t p = pixels.empty() ? n : pixels[n];
        const QuadCorners& q = m_corners[p];
        for (std::size_t c = 0; c < 3; ++c) {
            const double* block = e.data() + c * stride;
            double pred = 0.0;
            for (std::size_t j = 0; j < 16; ++j) {
                pred += q.weights[j] * block[q.offsets[j]];
            }
            const double resid = pred - m_targets[3 * p + c];
            recSum += resid * resid;
            if (wantGrad) {
                double* gb = gE.data() + c * stride;
                const double s = recScale * resid;
                for (std::size_t j = 0; j < 16; ++j) {
                    gb[q.offsets[j]] += s * q.weights[j];
                }
            }
        }
    }

    LossBreakdown out;
    out.rec = recSum / static_cast<double>(3 * count);
    const Lattice lat(m_size, m_bins);
    out.tv = tvValue(e, lat, gE, m_cfg.lambdaTv);
    out.mn = mnValue(e, lat, gE, m_cfg.lambdaMn);
    out.total = m_cfg.lambdaRec * out.rec + m_cfg.lambdaTv * out.tv + m_cfg.lambdaMn * out.mn;

    if (wantGrad && m_cfg.mode == Mode::Alpha) {
        for (std::size_t i = 0; i < m_bank->count(); ++i) {
            std::span<const double> basis = m_bank->basis(i).entries();
            double dot = 0.0;
            for (std::size_t j = 0; j < basis.size(); ++j) {
                dot += entryGrad[j] * basis[j];
            }
            grad[i] = dot;
        }
    }
    return out;
}

std::vector<double> grad_total(const FitProblem& problem, std::span<const double> params)
{
    std::vector<double> grad(params.size(), 0.0);
    problem.evaluate(params, grad);
    return grad;
}

FitResult fit(const FitProblem& problem, std::vector<double> init, const FitConfig& cfg)
{
    cfg.validate();
    if (init.size() != problem.parameterCount()) {
        throw Error(ErrorKind::DimensionMismatch, "initial parameters do not match the fitting mode");
    }
    FitResult result;
    std::vector<double>& x = init;
    std::vector<double> grad(x.size(), 0.0);
    std::vector<double> m(x.size(), 0.0);
    std::vector<double> v(x.size(), 0.0);

    std::mt19937_64 rng(cfg.seed);
    const std::size_t total = problem.pixelCount();
    const bool minibatch = cfg.batchPixels > 0 && cfg.batchPixels < total;
    std::vector<std::uint32_t> batch(minibatch ? cfg.batchPixels : 0);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(total - 1));

    double b1t = 1.0;
    double b2t = 1.0;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::uint32_t& idx : batch) {
            idx = pick(rng);
        }
        const LossBreakdown loss = problem.evaluate(x, grad, batch);
        if (!std::isfinite(loss.total)) {
            throw Error(ErrorKind::Numeric, "non-finite loss at step " + std::to_string(step)
                                                + " (try a smaller learning rate)");
        }
        result.trace.push_back({step, loss});

        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        const double c1 = 1.0 - b1t;
        const double c2 = 1.0 - b2t;
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            x[i] -= cfg.learningRate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adamEps);
        }
    }
    const LossBreakdown last = problem.evaluate(x, {});
    if (!std::isfinite(last.total)) {
        throw Error(ErrorKind::Numeric, "non-finite loss after the final step");
    }
    result.trace.push_back({cfg.steps, last});

    result.lut = problem.lut(x);
    result.outOfRange = result.lut.outOfRange();
    result.params = std::move(x);
    return result;
}

FitResult fit_lut(std::span<const FitPair> pairs, const FitConfig& cfg, const Lut4D& init)
{
    const FitProblem problem(pairs, cfg, init.size(), init.bins());
    return fit(problem, std::vector<double>(init.entries().begin(), init.entries().end()), cfg);
}

FitResult fit_alpha(std::span<const FitPair> pairs, const FitConfig& cfg, const BasisLutBank& bank,
                    std::vector<double> initAlpha)
{
    const FitProblem problem(pairs, cfg, bank);
    if (initAlpha.empty()) {
        initAlpha.assign(bank.count(), 0.0);
    }
    return fit(problem, std::move(initAlpha), cfg);
}

std::string trace_csv(std::span<const TraceRow> trace)
{
    std::string out = "step,L_rec,L_TV,L_MN,total\n";
    char buf[160];
    for (const TraceRow& row : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", row.step, row.loss.rec, row.loss.tv,
                      row.loss.mn, row.loss.total);
        out += buf;
    }
    return out;
}

GradCheckReport gradient_check(const FitProblem& problem, std::span<const double> params, std::size_t coordinates,
                               std::uint64_t seed, double step, double tolerance, double corruption)
{
    if (params.size() != problem.parameterCount()) {
        throw Error(ErrorKind::DimensionMismatch, "parameter vector length does not match the fitting mode");
    }
    std::vector<double> analytic = grad_total(problem, params);
    for (double& g : analytic) {
        g += corruption;
    }

    // Distinct coordinates when possible, otherwise every coordinate.
    std::vector<std::size_t> coords(params.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        coords[i] = i;
    }
    std::mt19937_64 rng(seed);
    std::ranges::shuffle(coords, rng);
    coords.resize(std::min(coordinates, coords.size()));

    GradCheckReport report;
    std::vector<double> x(params.begin(), params.end());
    for (std::size_t idx : coords) {
        const double saved = x[idx];
        x[idx] = saved + step;
        const double up = problem.evaluate(x, {}).total;
        x[idx] = saved - step;
        const double down = problem.evaluate(x, {}).total;
        x[idx] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[idx];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
        const double rel = std::abs(a - numeric) / denom;
        report.entries.push_back({idx, a, numeric, rel});
        report.maxRelError = std::max(report.maxRelError, rel);
    }
    report.passed = report.maxRelError < tolerance;
    return report;
}

GradCheckSuite run_gradcheck_suite(std::uint64_t seed, std::size_t coordinates, double corruption)
{
    constexpr std::size_t size = 5;
    constexpr std::size_t bins = 2;
    constexpr std::size_t pixels = 8;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    std::normal_distribution<double> normal(0.0, 1.0);

    FitPair pair{ImageBuffer(1, pixels), ContextMap(1, pixels), ImageBuffer(1, pixels)};
    for (float& v : pair.content.values()) {
        v = unit(rng);
    }
    for (float& v : pair.context.values()) {
        v = unit(rng);
    }
    for (float& v : pair.target.values()) {
        v = unit(rng);
    }
    const std::vector<FitPair> pairs{pair};

    FitConfig cfg;
    cfg.lambdaRec = 1.0;
    cfg.lambdaTv = 1.0;
    cfg.lambdaMn = 1.0;

    GradCheckSuite suite;
    {
        const FitProblem problem(pairs, cfg, size, bins);
        Lut4D start = make_identity_lut4d(size, bins);
        for (double& e : start.entries()) {
            e += 0.1 * normal(rng);
        }
        suite.lutEntries = gradient_check(problem, start.entries(), coordinates, seed + 1, 1e-3, 1e-4, corruption);
    }
    {
        const BasisLutBank bank = random_basis_bank(size, bins, 128, seed + 2, 0.1);
        cfg.mode = Mode::Alpha;
        const FitProblem problem(pairs, cfg, bank);
        std::vector<double> alpha(bank.count());
        for (double& a : alpha) {
            a = 0.1 * normal(rng);
        }
        suite.alpha = gradient_check(problem, alpha, coordinates, seed + 3, 1e-3, 1e-4, corruption);
    }
    return suite;
}

} // namespace salut::fit

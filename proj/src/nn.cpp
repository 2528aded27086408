#include "salut/nn.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace salut::nn {

namespace {

std::string shapeString(std::span<const std::uint32_t> shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += (i ? "," : "") + std::to_string(shape[i]);
    }
    return s + "]";
}

std::uint64_t nameSeed(std::uint64_t seed, const std::string& name)
{
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char ch : name) {
        h = (h ^ ch) * 1099511628211ull;
    }
    return h ^ (seed * 0x9E3779B97F4A7C15ull);
}

void fillNormal(std::vector<float>& values, float stddev, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, stddev);
    for (float& v : values) {
        v = dist(rng);
    }
}

const Tensor& vectorParam(const WeightArchive& params, const std::string& name, std::size_t length)
{
    const std::uint32_t shape[] = {static_cast<std::uint32_t>(length)};
    return params.require(name, shape);
}

} // namespace

Tensor::Tensor(std::vector<std::uint32_t> shape, float fill)
    : dims(std::move(shape)), data(elementCount(dims), fill)
{
}

Tensor::Tensor(std::vector<std::uint32_t> shape, std::vector<float> values)
    : dims(std::move(shape)), data(std::move(values))
{
    if (data.size() != elementCount(dims)) {
        throw Error(ErrorKind::DimensionMismatch, "tensor of shape " + shapeString(dims) + " cannot hold "
                                                      + std::to_string(data.size()) + " values");
    }
}

std::size_t Tensor::elementCount(std::span<const std::uint32_t> shape) noexcept
{
    std::size_t n = 1;
    for (std::uint32_t d : shape) {
        n *= d;
    }
    return n;
}

Tensor3::Tensor3(std::size_t channels, std::size_t height, std::size_t width, float fill)
    : m_channels(channels), m_height(height), m_width(width), m_values(channels * height * width, fill)
{
}

Tensor3::Tensor3(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> values)
    : m_channels(channels), m_height(height), m_width(width), m_values(std::move(values))
{
    if (m_values.size() != channels * height * width) {
        throw Error(ErrorKind::DimensionMismatch, "feature map size mismatch");
    }
}

Tensor Tensor3::toTensor() const
{
    return Tensor({static_cast<std::uint32_t>(m_channels), static_cast<std::uint32_t>(m_height),
                   static_cast<std::uint32_t>(m_width)},
                  m_values);
}

Tensor3 Tensor3::fromTensor(const Tensor& t)
{
    if (t.rank() != 3 || t.dims[0] == 0 || t.dims[1] == 0 || t.dims[2] == 0) {
        throw Error(ErrorKind::DimensionMismatch, "expected a non-empty rank-3 tensor, got " + shapeString(t.dims));
    }
    return Tensor3(t.dims[0], t.dims[1], t.dims[2], t.data);
}

void WeightArchive::add(std::string name, Tensor tensor)
{
    if (m_index.contains(name)) {
        throw Error(ErrorKind::Format, "duplicate tensor name '" + name + "'");
    }
    m_index.emplace(name, m_entries.size());
    m_entries.emplace_back(std::move(name), std::move(tensor));
}

void WeightArchive::set(const std::string& name, Tensor tensor)
{
    if (auto it = m_index.find(name); it != m_index.end()) {
        m_entries[it->second].second = std::move(tensor);
    } else {
        add(name, std::move(tensor));
    }
}

const Tensor& WeightArchive::get(const std::string& name) const
{
    auto it = m_index.find(name);
    if (it == m_index.end()) {
        throw Error(ErrorKind::MissingParameter, "missing parameter '" + name + "'");
    }
    return m_entries[it->second].second;
}

Tensor& WeightArchive::get(const std::string& name)
{
    return const_cast<Tensor&>(std::as_const(*this).get(name));
}

const Tensor& WeightArchive::require(const std::string& name, std::span<const std::uint32_t> shape) const
{
    const Tensor& t = get(name);
    if (!std::equal(t.dims.begin(), t.dims.end(), shape.begin(), shape.end())) {
        throw Error(ErrorKind::DimensionMismatch,
                    "parameter '" + name + "' has shape " + shapeString(t.dims) + ", expected " + shapeString(shape));
    }
    return t;
}

void WeightArchive::merge(const WeightArchive& other, const std::string& prefix)
{
    for (const auto& [name, tensor] : other.entries()) {
        add(prefix + name, tensor);
    }
}

Tensor3 conv2d(const Tensor3& x, const Tensor& kernel, std::span<const float> bias, int stride, int padding)
{
    if (kernel.rank() != 4) {
        throw Error(ErrorKind::DimensionMismatch, "conv kernel must be rank 4, got " + shapeString(kernel.dims));
    }
    const std::size_t outC = kernel.dims[0];
    const std::size_t inC = kernel.dims[1];
    const int kh = static_cast<int>(kernel.dims[2]);
    const int kw = static_cast<int>(kernel.dims[3]);
    if (inC != x.channels()) {
        throw Error(ErrorKind::DimensionMismatch, "conv kernel expects " + std::to_string(inC)
                                                      + " input channels, got " + std::to_string(x.channels()));
    }
    if (bias.size() != outC) {
        throw Error(ErrorKind::DimensionMismatch, "conv bias length " + std::to_string(bias.size())
                                                      + " != " + std::to_string(outC));
    }
    if (stride < 1 || padding < 0) {
        throw Error(ErrorKind::InvalidDimension, "conv stride must be >= 1 and padding >= 0");
    }
    const int h = static_cast<int>(x.height());
    const int w = static_cast<int>(x.width());
    const int outH = (h + 2 * padding - kh) / stride + 1;
    const int outW = (w + 2 * padding - kw) / stride + 1;
    if (h + 2 * padding < kh || w + 2 * padding < kw || outH < 1 || outW < 1) {
        throw Error(ErrorKind::DimensionMismatch, "input too small for convolution kernel");
    }

    Tensor3 out(outC, static_cast<std::size_t>(outH), static_cast<std::size_t>(outW));
    for (std::size_t oc = 0; oc < outC; ++oc) {
        std::span<float> dst = out.channel(oc);
        std::fill(dst.begin(), dst.end(), bias[oc]);
        for (std::size_t ic = 0; ic < inC; ++ic) {
            std::span<const float> src = x.channel(ic);
            const float* k = kernel.data.data() + ((oc * inC + ic) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const float wv = k[ky * kw + kx];
                    if (wv == 0.0f) {
                        continue;
                    }
                    // ox range with 0 <= ox*stride - padding + kx < w
                    const int oxLo = std::max(0, (padding - kx + stride - 1) / stride);
                    const int last = w - 1 + padding - kx;
                    const int oxHi = last < 0 ? 0 : std::min(outW, last / stride + 1);
                    for (int oy = 0; oy < outH; ++oy) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) {
                            continue;
                        }
                        const float* srow = src.data() + static_cast<std::size_t>(iy) * w;
                        float* drow = dst.data() + static_cast<std::size_t>(oy) * outW;
                        if (stride == 1) {
                            const int shift = kx - padding;
                            for (int ox = oxLo; ox < oxHi; ++ox) {
                                drow[ox] += wv * srow[ox + shift];
                            }
                        } else {
                            for (int ox = oxLo; ox < oxHi; ++ox) {
                                drow[ox] += wv * srow[ox * stride - padding + kx];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor3 instance_norm(const Tensor3& x, std::span<const float> gain, std::span<const float> bias, float eps)
{
    if (gain.size() != x.channels() || bias.size() != x.channels()) {
        throw Error(ErrorKind::DimensionMismatch, "instance norm parameters do not match channel count");
    }
    Tensor3 out(x.channels(), x.height(), x.width());
    const double n = static_cast<double>(x.plane());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        std::span<const float> src = x.channel(c);
        // Statistics around the first sample keep constant channels exact.
        const double shift = src[0];
        double sum = 0.0;
        double sq = 0.0;
        for (float v : src) {
            const double d = v - shift;
            sum += d;
            sq += d * d;
        }
        const double meanShifted = sum / n;
        const double var = std::max(0.0, sq / n - meanShifted * meanShifted);
        const double mean = shift + meanShifted;
        const double scale = static_cast<double>(gain[c]) / std::sqrt(var + eps);
        std::span<float> dst = out.channel(c);
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = static_cast<float>((src[i] - mean) * scale + bias[c]);
        }
    }
    return out;
}

void relu_inplace(Tensor3& x)
{
    for (float& v : x.values()) {
        v = std::max(v, 0.0f);
    }
}

void sigmoid_inplace(Tensor3& x)
{
    for (float& v : x.values()) {
        v = 1.0f / (1.0f + std::exp(-v));
    }
}

Tensor3 residual_block(const Tensor3& x, const WeightArchive& params, const std::string& prefix)
{
    const auto c = static_cast<std::uint32_t>(x.channels());
    const std::uint32_t kshape[] = {c, c, 3, 3};
    auto step = [&](const Tensor3& in, const char* conv, const char* norm) {
        const Tensor& k = params.require(prefix + conv + ".weight", kshape);
        const Tensor& b = vectorParam(params, prefix + conv + ".bias", c);
        const Tensor& g = vectorParam(params, prefix + norm + ".weight", c);
        const Tensor& s = vectorParam(params, prefix + norm + ".bias", c);
        return instance_norm(conv2d(in, k, b.data, 1, 1), g.data, s.data);
    };
    Tensor3 h = step(x, "conv1", "norm1");
    relu_inplace(h);
    h = step(h, "conv2", "norm2");
    std::span<float> hv = h.values();
    std::span<const float> xv = x.values();
    for (std::size_t i = 0; i < hv.size(); ++i) {
        hv[i] += xv[i];
    }
    return h;
}

std::vector<float> max_pool_global(const Tensor3& x)
{
    std::vector<float> out(x.channels(), -std::numeric_limits<float>::infinity());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (float v : x.channel(c)) {
            out[c] = std::max(out[c], v);
        }
    }
    return out;
}

std::vector<double> softmax(std::span<const double> v)
{
    std::vector<double> out(v.size());
    if (v.empty()) {
        return out;
    }
    const double peak = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - peak);
        total += out[i];
    }
    for (double& o : out) {
        o /= total;
    }
    return out;
}

namespace {

// Projects every spatial position of x: result is [positions x d], row-major.
std::vector<float> project(const Tensor3& x, const WeightArchive& proj, const std::string& name, std::size_t& d)
{
    const Tensor& w = proj.get(name + ".weight");
    if (w.rank() != 2 || w.dims[1] != x.channels()) {
        throw Error(ErrorKind::DimensionMismatch, "projection '" + name + "' has shape " + shapeString(w.dims)
                                                      + " for " + std::to_string(x.channels()) + " channels");
    }
    d = w.dims[0];
    const Tensor& b = vectorParam(proj, name + ".bias", d);
    const std::size_t n = x.plane();
    const std::size_t cin = x.channels();
    std::vector<float> out(n * d);
    for (std::size_t o = 0; o < d; ++o) {
        const float* wrow = w.data.data() + o * cin;
        for (std::size_t p = 0; p < n; ++p) {
            out[p * d + o] = b.data[o];
        }
        for (std::size_t c = 0; c < cin; ++c) {
            const float wv = wrow[c];
            std::span<const float> src = x.channel(c);
            for (std::size_t p = 0; p < n; ++p) {
                out[p * d + o] += wv * src[p];
            }
        }
    }
    return out;
}

struct Projected {
    std::vector<float> q;
    std::vector<float> k;
    std::vector<float> v;
    std::size_t d = 0;
};

Projected projectAll(const Tensor3& qFeat, const Tensor3& kvFeat, const WeightArchive& proj,
                     const std::string& prefix)
{
    Projected p;
    std::size_t dq = 0, dk = 0, dv = 0;
    p.q = project(qFeat, proj, prefix + "q", dq);
    p.k = project(kvFeat, proj, prefix + "k", dk);
    p.v = project(kvFeat, proj, prefix + "v", dv);
    if (dq != dk || dq != dv || dq == 0) {
        throw Error(ErrorKind::DimensionMismatch, "attention projections disagree on the common dimension");
    }
    p.d = dq;
    return p;
}

void attentionRow(const Projected& p, std::size_t i, std::size_t keys, std::vector<double>& row)
{
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.d));
    const float* qi = p.q.data() + i * p.d;
    for (std::size_t j = 0; j < keys; ++j) {
        const float* kj = p.k.data() + j * p.d;
        float dot = 0.0f;
        for (std::size_t c = 0; c < p.d; ++c) {
            dot += qi[c] * kj[c];
        }
        row[j] = dot * scale;
    }
    row = softmax(row);
}

} // namespace

Attention attention_weights(const Tensor3& qFeat, const Tensor3& kvFeat, const WeightArchive& proj,
                            const std::string& prefix)
{
    const Projected p = projectAll(qFeat, kvFeat, proj, prefix);
    Attention a;
    a.queries = qFeat.plane();
    a.keys = kvFeat.plane();
    a.weights.resize(a.queries * a.keys);
    std::vector<double> row(a.keys);
    for (std::size_t i = 0; i < a.queries; ++i) {
        attentionRow(p, i, a.keys, row);
        std::copy(row.begin(), row.end(), a.weights.begin() + static_cast<std::ptrdiff_t>(i * a.keys));
    }
    return a;
}

Tensor3 cross_attention(const Tensor3& qFeat, const Tensor3& kvFeat, const WeightArchive& proj,
                        const std::string& prefix)
{
    const Projected p = projectAll(qFeat, kvFeat, proj, prefix);
    const std::size_t queries = qFeat.plane();
    const std::size_t keys = kvFeat.plane();
    Tensor3 out(p.d, qFeat.height(), qFeat.width());
    std::vector<double> row(keys);
    std::vector<float> acc(p.d);
    for (std::size_t i = 0; i < queries; ++i) {
        attentionRow(p, i, keys, row);
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (std::size_t j = 0; j < keys; ++j) {
            const float a = static_cast<float>(row[j]);
            const float* vj = p.v.data() + j * p.d;
            for (std::size_t c = 0; c < p.d; ++c) {
                acc[c] += a * vj[c];
            }
        }
        for (std::size_t c = 0; c < p.d; ++c) {
            out.values()[c * queries + i] = acc[c];
        }
    }
    return out;
}

Tensor3 resize_bilinear(const Tensor3& x, std::size_t height, std::size_t width)
{
    if (height == 0 || width == 0 || x.plane() == 0) {
        throw Error(ErrorKind::InvalidDimension, "bilinear resize needs non-empty input and output");
    }
    struct Tap {
        std::size_t i0, i1;
        float l;
    };
    auto taps = [](std::size_t in, std::size_t out) {
        std::vector<Tap> t(out);
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t o = 0; o < out; ++o) {
            const double src = std::max(0.0, (static_cast<double>(o) + 0.5) * scale - 0.5);
            const std::size_t i0 = std::min(static_cast<std::size_t>(src), in - 1);
            const std::size_t i1 = std::min(i0 + 1, in - 1);
            t[o] = {i0, i1, static_cast<float>(src - static_cast<double>(i0))};
        }
        return t;
    };
    const std::vector<Tap> ty = taps(x.height(), height);
    const std::vector<Tap> tx = taps(x.width(), width);
    Tensor3 out(x.channels(), height, width);
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t oy = 0; oy < height; ++oy) {
            const Tap& a = ty[oy];
            for (std::size_t ox = 0; ox < width; ++ox) {
                const Tap& b = tx[ox];
                const float top = (1.0f - b.l) * x.at(c, a.i0, b.i0) + b.l * x.at(c, a.i0, b.i1);
                const float bot = (1.0f - b.l) * x.at(c, a.i1, b.i0) + b.l * x.at(c, a.i1, b.i1);
                out.at(c, oy, ox) = (1.0f - a.l) * top + a.l * bot;
            }
        }
    }
    return out;
}

Tensor3 upsample_bilinear(const Tensor3& x, int factor)
{
    if (factor < 1) {
        throw Error(ErrorKind::InvalidDimension, "upsample factor must be >= 1");
    }
    if (factor == 1) {
        return x;
    }
    return resize_bilinear(x, x.height() * static_cast<std::size_t>(factor),
                           x.width() * static_cast<std::size_t>(factor));
}

std::vector<float> mlp_forward(std::span<const float> v, const WeightArchive& layers, const std::string& prefix)
{
    std::vector<float> cur(v.begin(), v.end());
    std::size_t layer = 1;
    if (!layers.contains(prefix + "fc1.weight")) {
        throw Error(ErrorKind::MissingParameter, "missing parameter '" + prefix + "fc1.weight'");
    }
    while (layers.contains(prefix + "fc" + std::to_string(layer) + ".weight")) {
        const std::string name = prefix + "fc" + std::to_string(layer);
        const Tensor& w = layers.get(name + ".weight");
        if (w.rank() != 2 || w.dims[1] != cur.size()) {
            throw Error(ErrorKind::DimensionMismatch, "layer '" + name + "' has shape " + shapeString(w.dims)
                                                          + " for input length " + std::to_string(cur.size()));
        }
        const std::size_t outN = w.dims[0];
        const Tensor& b = vectorParam(layers, name + ".bias", outN);
        std::vector<float> next(outN);
        for (std::size_t o = 0; o < outN; ++o) {
            const float* row = w.data.data() + o * cur.size();
            double acc = b.data[o];
            for (std::size_t i = 0; i < cur.size(); ++i) {
                acc += static_cast<double>(row[i]) * cur[i];
            }
            next[o] = static_cast<float>(acc);
        }
        ++layer;
        const bool last = !layers.contains(prefix + "fc" + std::to_string(layer) + ".weight");
        if (!last) {
            for (float& n : next) {
                n = std::max(n, 0.0f);
            }
        }
        cur = std::move(next);
    }
    return cur;
}

void init_conv(WeightArchive& archive, const std::string& name, std::uint32_t out, std::uint32_t in,
               std::uint32_t kernel, std::uint64_t seed)
{
    Tensor w({out, in, kernel, kernel});
    fillNormal(w.data, std::sqrt(2.0f / static_cast<float>(in * kernel * kernel)), nameSeed(seed, name));
    archive.set(name + ".weight", std::move(w));
    archive.set(name + ".bias", Tensor({out}));
}

void init_norm(WeightArchive& archive, const std::string& name, std::uint32_t channels)
{
    archive.set(name + ".weight", Tensor({channels}, 1.0f));
    archive.set(name + ".bias", Tensor({channels}));
}

void init_linear(WeightArchive& archive, const std::string& name, std::uint32_t out, std::uint32_t in,
                 std::uint64_t seed)
{
    Tensor w({out, in});
    fillNormal(w.data, std::sqrt(2.0f / static_cast<float>(in)), nameSeed(seed, name));
    archive.set(name + ".weight", std::move(w));
    archive.set(name + ".bias", Tensor({out}));
}

void init_residual_block(WeightArchive& archive, const std::string& prefix, std::uint32_t channels,
                         std::uint64_t seed)
{
    init_conv(archive, prefix + "conv1", channels, channels, 3, seed);
    init_norm(archive, prefix + "norm1", channels);
    init_conv(archive, prefix + "conv2", channels, channels, 3, seed);
    init_norm(archive, prefix + "norm2", channels);
}

} // namespace salut::nn

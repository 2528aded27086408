#include "salut/context.hpp"

#include "salut/error.hpp"
#include "salut/style.hpp"

#include <algorithm>
#include <cmath>

namespace salut {

namespace {

// Mirror index without repeating the edge sample; bounces for any offset.
std::size_t reflect(std::ptrdiff_t i, std::size_t n)
{
    if (n == 1) {
        return 0;
    }
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) {
        m += period;
    }
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);
}

nn::Tensor3 reflectPad(const nn::Tensor3& x, std::size_t height, std::size_t width)
{
    if (height == x.height() && width == x.width()) {
        return x;
    }
    nn::Tensor3 out(x.channels(), height, width);
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t y = 0; y < height; ++y) {
            const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(y), x.height());
            for (std::size_t xx = 0; xx < width; ++xx) {
                out.at(c, y, xx) = x.at(c, sy, reflect(static_cast<std::ptrdiff_t>(xx), x.width()));
            }
        }
    }
    return out;
}

nn::Tensor3 convLayer(const nn::Tensor3& x, const nn::WeightArchive& p, const std::string& name, int stride,
                      int padding)
{
    return nn::conv2d(x, p.get(name + ".weight"), p.get(name + ".bias").data, stride, padding);
}

nn::Tensor3 normLayer(const nn::Tensor3& x, const nn::WeightArchive& p, const std::string& name)
{
    return nn::instance_norm(x, p.get(name + ".weight").data, p.get(name + ".bias").data);
}

void initEncoder(nn::WeightArchive& p, const std::string& prefix, const ContextGeneratorShape& s, std::uint64_t seed)
{
    nn::init_conv(p, prefix + "conv1", s.encoderWidth1, 3, 3, seed);
    nn::init_norm(p, prefix + "norm1", s.encoderWidth1);
    nn::init_conv(p, prefix + "conv2", s.encoderWidth2, s.encoderWidth1, 3, seed);
    nn::init_norm(p, prefix + "norm2", s.encoderWidth2);
    for (std::uint32_t i = 0; i < s.residualBlocks; ++i) {
        nn::init_residual_block(p, prefix + "res" + std::to_string(i) + ".", s.encoderWidth2, seed);
    }
}

} // namespace

nn::WeightArchive make_context_params(const ContextGeneratorShape& shape, std::uint64_t seed, bool zeroFinal)
{
    nn::WeightArchive p;
    initEncoder(p, "content_enc.", shape, seed);
    initEncoder(p, "style_enc.", shape, seed + 1);
    nn::init_linear(p, "attn.q", shape.attentionDim, shape.encoderWidth2, seed);
    nn::init_linear(p, "attn.k", shape.attentionDim, shape.encoderWidth2, seed);
    nn::init_linear(p, "attn.v", shape.attentionDim, shape.encoderWidth2, seed);
    nn::init_conv(p, "fuse", shape.encoderWidth2, shape.attentionDim + shape.encoderWidth2, 3, seed);
    nn::init_conv(p, "out", 1, shape.encoderWidth2, 1, seed);
    if (zeroFinal) {
        std::ranges::fill(p.get("out.weight").data, 0.0f);
    }
    return p;
}

nn::Tensor3 encode_features(const nn::Tensor3& image, const nn::WeightArchive& params, const std::string& prefix)
{
    nn::Tensor3 h = normLayer(convLayer(image, params, prefix + "conv1", 2, 1), params, prefix + "norm1");
    nn::relu_inplace(h);
    h = normLayer(convLayer(h, params, prefix + "conv2", 2, 1), params, prefix + "norm2");
    nn::relu_inplace(h);
    for (std::size_t i = 0; params.contains(prefix + "res" + std::to_string(i) + ".conv1.weight"); ++i) {
        h = nn::residual_block(h, params, prefix + "res" + std::to_string(i) + ".");
    }
    return h;
}

ContextMap generate_context(const ImageBuffer& content, const ImageBuffer& style, const nn::WeightArchive& params)
{
    if (content.empty() || style.empty()) {
        throw Error(ErrorKind::InvalidDimension, "context generation needs non-empty content and style images");
    }
    const std::size_t h = content.height();
    const std::size_t w = content.width();
    const std::size_t ph = (h + 3) / 4 * 4;
    const std::size_t pw = (w + 3) / 4 * 4;

    const nn::Tensor3 contentFeat = encode_features(reflectPad(image_to_tensor(content), ph, pw), params, "content_enc.");

    nn::Tensor3 styleImg = image_to_tensor(style);
    const std::size_t longSide = std::max(style.height(), style.width());
    if (longSide > kContextStyleMaxSide) {
        const double s = static_cast<double>(kContextStyleMaxSide) / static_cast<double>(longSide);
        styleImg = nn::resize_bilinear(
            styleImg, std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(style.height() * s))),
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(style.width() * s))));
    }
    const nn::Tensor3 styleFeat = encode_features(styleImg, params, "style_enc.");

    const nn::Tensor3 attended = nn::cross_attention(contentFeat, styleFeat, params, "attn.");

    nn::Tensor3 joined(attended.channels() + contentFeat.channels(), contentFeat.height(), contentFeat.width());
    std::ranges::copy(attended.values(), joined.values().begin());
    std::ranges::copy(contentFeat.values(),
                      joined.values().begin() + static_cast<std::ptrdiff_t>(attended.values().size()));

    nn::Tensor3 fused = convLayer(joined, params, "fuse", 1, 1);
    nn::relu_inplace(fused);
    nn::Tensor3 up = nn::upsample_bilinear(fused, 4);
    nn::Tensor3 logits = convLayer(up, params, "out", 1, 0);
    if (logits.channels() != 1) {
        throw Error(ErrorKind::DimensionMismatch, "context output conv must produce one channel");
    }
    nn::sigmoid_inplace(logits);

    ContextMap ctx(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            ctx.at(y, x) = logits.at(0, y, x);
        }
    }
    return ctx;
}

ContextMap luminance_context(const ImageBuffer& content, int radius)
{
    if (radius < 0) {
        throw Error(ErrorKind::InvalidDimension, "blur radius must be >= 0");
    }
    const std::size_t h = content.height();
    const std::size_t w = content.width();
    // Summed-area table of luma, (h+1) x (w+1).
    std::vector<double> sat((h + 1) * (w + 1), 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        double row = 0.0;
        for (std::size_t x = 0; x < w; ++x) {
            row += 0.2126 * content.at(y, x, 0) + 0.7152 * content.at(y, x, 1) + 0.0722 * content.at(y, x, 2);
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    const auto r = static_cast<std::ptrdiff_t>(radius);
    ContextMap ctx(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t y0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(y) - r));
        const std::size_t y1 = std::min(h, y + static_cast<std::size_t>(radius) + 1);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t x0 =
                static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(x) - r));
            const std::size_t x1 = std::min(w, x + static_cast<std::size_t>(radius) + 1);
            const double sum = sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0]
                               + sat[y0 * (w + 1) + x0];
            const double mean = sum / static_cast<double>((y1 - y0) * (x1 - x0));
            ctx.at(y, x) = static_cast<float>(std::clamp(mean, 0.0, 1.0));
        }
    }
    return ctx;
}

} // namespace salut

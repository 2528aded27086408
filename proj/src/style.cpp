#include "salut/style.hpp"

#include "salut/error.hpp"
#include "salut/io.hpp"

#include <algorithm>
#include <cmath>

namespace salut {

namespace {

constexpr std::size_t kMinBuiltinSide = 16;

std::string levelName(std::size_t d)
{
    return "level" + std::to_string(d);
}

nn::WeightArchive builtinEncoder(const FeatureProvider& provider)
{
    nn::WeightArchive enc;
    std::uint32_t in = 3;
    for (std::size_t d = 0; d < 4; ++d) {
        nn::init_conv(enc, "enc" + std::to_string(d), provider.channels[d], in, 3, provider.seed);
        in = provider.channels[d];
    }
    return enc;
}

} // namespace

nn::Tensor3 image_to_tensor(const ImageBuffer& image)
{
    nn::Tensor3 t(3, image.height(), image.width());
    std::span<const float> src = image.values();
    const std::size_t n = image.pixelCount();
    for (std::size_t c = 0; c < 3; ++c) {
        std::span<float> dst = t.channel(c);
        for (std::size_t i = 0; i < n; ++i) {
            dst[i] = src[3 * i + c];
        }
    }
    return t;
}

FeaturePyramid extract_features(const ImageBuffer& style, const FeatureProvider& provider)
{
    if (provider.mode == FeatureProvider::Mode::File) {
        return pyramid_from_archive(io::read_weights(provider.path));
    }
    if (style.empty()) {
        throw Error(ErrorKind::InvalidDimension, "style image is empty");
    }

    nn::Tensor3 x = image_to_tensor(style);
    const std::size_t longSide = std::max(x.height(), x.width());
    if (provider.maxSide > 0 && longSide > provider.maxSide) {
        const double s = static_cast<double>(provider.maxSide) / static_cast<double>(longSide);
        x = nn::resize_bilinear(x, std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(x.height() * s))),
                                std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(x.width() * s))));
    }
    if (std::min(x.height(), x.width()) < kMinBuiltinSide) {
        throw Error(ErrorKind::InvalidDimension,
                    "style image is too small for a 4-level pyramid (short side must be >= 16 after resizing)");
    }

    const nn::WeightArchive enc = builtinEncoder(provider);
    FeaturePyramid pyr;
    for (std::size_t d = 0; d < 4; ++d) {
        const std::string name = "enc" + std::to_string(d);
        x = nn::conv2d(x, enc.get(name + ".weight"), enc.get(name + ".bias").data, 2, 1);
        nn::relu_inplace(x);
        pyr.levels[d] = x;
    }
    return pyr;
}

nn::WeightArchive pyramid_to_archive(const FeaturePyramid& pyramid)
{
    nn::WeightArchive a;
    for (std::size_t d = 0; d < 4; ++d) {
        a.add(levelName(d), pyramid.levels[d].toTensor());
    }
    return a;
}

FeaturePyramid pyramid_from_archive(const nn::WeightArchive& archive)
{
    FeaturePyramid pyr;
    for (std::size_t d = 0; d < 4; ++d) {
        pyr.levels[d] = nn::Tensor3::fromTensor(archive.get(levelName(d)));
        if (d > 0 && pyr.levels[d].plane() >= pyr.levels[d - 1].plane()) {
            throw Error(ErrorKind::DimensionMismatch, "pyramid levels must shrink from level0 to level3");
        }
    }
    return pyr;
}

nn::WeightArchive make_weight_generator_params(const WeightGeneratorShape& shape, std::uint64_t seed,
                                               bool zeroFinal)
{
    nn::WeightArchive p;
    for (std::size_t d = 0; d < 4; ++d) {
        nn::init_conv(p, "reduce" + std::to_string(d), shape.reduceChannels, shape.levelChannels[d], 3, seed);
    }
    nn::init_linear(p, "mlp.fc1", shape.hidden, 4 * shape.reduceChannels, seed);
    nn::init_linear(p, "mlp.fc2", shape.basisCount, shape.hidden, seed);
    if (zeroFinal) {
        std::ranges::fill(p.get("mlp.fc2.weight").data, 0.0f);
    }
    return p;
}

std::vector<float> style_descriptor(const FeaturePyramid& pyramid, const nn::WeightArchive& params)
{
    std::vector<float> out;
    for (std::size_t d = 0; d < 4; ++d) {
        const std::string name = "reduce" + std::to_string(d);
        const nn::Tensor3 reduced =
            nn::conv2d(pyramid.levels[d], params.get(name + ".weight"), params.get(name + ".bias").data, 1, 1);
        const std::vector<float> pooled = nn::max_pool_global(reduced);
        out.insert(out.end(), pooled.begin(), pooled.end());
    }
    return out;
}

StyleWeights generate_weights(const FeaturePyramid& pyramid, const nn::WeightArchive& params)
{
    const std::vector<float> logits = nn::mlp_forward(style_descriptor(pyramid, params), params, "mlp.");
    const std::vector<double> wide(logits.begin(), logits.end());
    return StyleWeights{nn::softmax(wide)};
}

Lut4D style_to_lut(const ImageBuffer& style, const FeatureProvider& provider, const nn::WeightArchive& params,
                   const BasisLutBank& bank)
{
    const StyleWeights w = generate_weights(extract_features(style, provider), params);
    return fuse_luts(bank, w, true);
}

} // namespace salut

#pragma once

#include "salut/image.hpp"
#include "salut/lut.hpp"
#include "salut/nn.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace salut {

/// Four style feature maps, finest first.
struct FeaturePyramid {
    std::array<nn::Tensor3, 4> levels;
};

/// Where style features come from: a seeded stand-in encoder, or feature maps
/// exported from an external network (archive with tensors level0..level3).
struct FeatureProvider {
    enum class Mode { Builtin, File };

    Mode mode = Mode::Builtin;
    std::uint64_t seed = 7;
    std::array<std::uint32_t, 4> channels{16, 32, 64, 128};
    /// Builtin mode downsizes the style so its long side is at most this.
    std::size_t maxSide = 256;
    std::string path;
};

/// Layer sizes of the weight generator.
struct WeightGeneratorShape {
    std::array<std::uint32_t, 4> levelChannels{16, 32, 64, 128};
    std::uint32_t reduceChannels = 64;
    std::uint32_t hidden = 256;
    std::uint32_t basisCount = 64;
};

nn::Tensor3 image_to_tensor(const ImageBuffer& image);

FeaturePyramid extract_features(const ImageBuffer& style, const FeatureProvider& provider);

nn::WeightArchive pyramid_to_archive(const FeaturePyramid& pyramid);
FeaturePyramid pyramid_from_archive(const nn::WeightArchive& archive);

/// Seeded parameters for generate_weights: reduce{0..3}.{weight,bias} and
/// mlp.fc1/fc2. With zeroFinal the last layer is all zeros (uniform alpha).
nn::WeightArchive make_weight_generator_params(const WeightGeneratorShape& shape, std::uint64_t seed,
                                               bool zeroFinal = false);

/// Concat over levels of the global max of a 3x3 reduction conv.
std::vector<float> style_descriptor(const FeaturePyramid& pyramid, const nn::WeightArchive& params);

/// softmax(MLP(descriptor)); the result sums to one.
StyleWeights generate_weights(const FeaturePyramid& pyramid, const nn::WeightArchive& params);

/// extract_features -> generate_weights -> fuse_luts with clamping.
Lut4D style_to_lut(const ImageBuffer& style, const FeatureProvider& provider, const nn::WeightArchive& params,
                   const BasisLutBank& bank);

} // namespace salut

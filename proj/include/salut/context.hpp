#pragma once

#include "salut/image.hpp"
#include "salut/nn.hpp"

#include <cstdint>

namespace salut {

struct ContextGeneratorShape {
    std::uint32_t encoderWidth1 = 32;
    std::uint32_t encoderWidth2 = 64;
    std::uint32_t residualBlocks = 2;
    std::uint32_t attentionDim = 64;
};

/// Style images are downsized to this long side before encoding.
inline constexpr std::size_t kContextStyleMaxSide = 256;

/// Seeded parameters for generate_context. Tensor names:
///   {content,style}_enc.conv1/norm1/conv2/norm2, {content,style}_enc.res<i>.*,
///   attn.{q,k,v}, fuse (3x3, 2*d -> d), out (1x1, d -> 1).
/// With zeroFinal the output conv is all zeros, which yields a flat 0.5 map.
nn::WeightArchive make_context_params(const ContextGeneratorShape& shape, std::uint64_t seed,
                                      bool zeroFinal = false);

/// Two stride-2 conv/IN/ReLU stages followed by the residual blocks found
/// under prefix (res0, res1, ...). Output is 1/4 of the input resolution.
nn::Tensor3 encode_features(const nn::Tensor3& image, const nn::WeightArchive& params, const std::string& prefix);

/// Cross-attention context map with the content image's resolution.
///
/// Content features are queries, style features keys and values. Content is
/// reflect-padded to a multiple of 4 and the map is cropped back, so any
/// content size is accepted. Values lie in (0,1) (sigmoid output).
ContextMap generate_context(const ImageBuffer& content, const ImageBuffer& style, const nn::WeightArchive& params);

/// Rec.709 luma, box-blurred over a (2r+1)^2 window clipped at the borders.
ContextMap luminance_context(const ImageBuffer& content, int radius);

} // namespace salut

#include "oracles.hpp"

#include "salut/context.hpp"
#include "salut/error.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace salut;

namespace {

ContextGeneratorShape smallShape()
{
    ContextGeneratorShape s;
    s.encoderWidth1 = 8;
    s.encoderWidth2 = 12;
    s.residualBlocks = 1;
    s.attentionDim = 8;
    return s;
}

} // namespace

TEST(Context, AnyContentSizeKeepsResolutionAndRange)
{
    std::mt19937_64 rng(1);
    const nn::WeightArchive params = make_context_params(smallShape(), 5);
    const ImageBuffer style = oracle::randomImage(20, 24, rng);
    const std::array<std::pair<std::size_t, std::size_t>, 6> sizes{
        {{1, 1}, {5, 7}, {13, 6}, {17, 23}, {30, 2}, {16, 16}}};
    for (const auto& [h, w] : sizes) {
        const ContextMap ctx = generate_context(oracle::randomImage(h, w, rng), style, params);
        ASSERT_EQ(ctx.height(), h);
        ASSERT_EQ(ctx.width(), w);
        for (float v : ctx.values()) {
            EXPECT_GE(v, 0.0f);
            EXPECT_LE(v, 1.0f);
        }
    }
}

TEST(Context, ZeroFinalGivesHalf)
{
    std::mt19937_64 rng(2);
    const nn::WeightArchive params = make_context_params(smallShape(), 5, true);
    const ContextMap ctx = generate_context(oracle::randomImage(11, 9, rng), oracle::randomImage(8, 8, rng), params);
    for (float v : ctx.values()) {
        EXPECT_NEAR(v, 0.5f, 1e-6f);
    }
}

TEST(Context, DependsOnStyle)
{
    std::mt19937_64 rng(3);
    const nn::WeightArchive params = make_context_params(smallShape(), 8);
    const ImageBuffer content = oracle::randomImage(16, 16, rng);
    const ContextMap a = generate_context(content, oracle::randomImage(16, 16, rng), params);
    const ContextMap b = generate_context(content, ImageBuffer(16, 16, std::vector<float>(16 * 16 * 3, 0.9f)), params);
    EXPECT_GT(oracle::maxAbsDiff(a.values(), b.values()), 1e-6);
}

TEST(Context, DeterministicPerSeed)
{
    std::mt19937_64 rng(4);
    const ImageBuffer content = oracle::randomImage(9, 10, rng);
    const ImageBuffer style = oracle::randomImage(12, 12, rng);
    const ContextMap a = generate_context(content, style, make_context_params(smallShape(), 1));
    const ContextMap b = generate_context(content, style, make_context_params(smallShape(), 1));
    EXPECT_EQ(a, b);
}

TEST(Context, EmptyInputsRejected)
{
    const nn::WeightArchive params = make_context_params(smallShape(), 1);
    EXPECT_THROW(generate_context(ImageBuffer{}, ImageBuffer(4, 4), params), Error);
    EXPECT_THROW(generate_context(ImageBuffer(4, 4), ImageBuffer{}, params), Error);
}

TEST(LuminanceContext, BoxBlurOracle)
{
    std::mt19937_64 rng(5);
    const ImageBuffer img = oracle::randomImage(7, 9, rng);
    for (int radius : {0, 1, 3, 20}) {
        const ContextMap ctx = luminance_context(img, radius);
        for (int y = 0; y < 7; ++y) {
            for (int x = 0; x < 9; ++x) {
                double sum = 0.0;
                int n = 0;
                for (int yy = y - radius; yy <= y + radius; ++yy) {
                    for (int xx = x - radius; xx <= x + radius; ++xx) {
                        if (yy < 0 || xx < 0 || yy >= 7 || xx >= 9) {
                            continue;
                        }
                        const auto uy = static_cast<std::size_t>(yy), ux = static_cast<std::size_t>(xx);
                        sum += 0.2126 * img.at(uy, ux, 0) + 0.7152 * img.at(uy, ux, 1) + 0.0722 * img.at(uy, ux, 2);
                        ++n;
                    }
                }
                EXPECT_NEAR(ctx.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)), sum / n, 1e-6);
            }
        }
    }
    EXPECT_THROW(luminance_context(img, -1), Error);
}

TEST(LuminanceContext, WhiteIsOne)
{
    const ImageBuffer white(5, 6, std::vector<float>(90, 1.0f));
    const ContextMap ctx = luminance_context(white, 2);
    for (float v : ctx.values()) {
        EXPECT_NEAR(v, 1.0f, 1e-6f);
    }
}

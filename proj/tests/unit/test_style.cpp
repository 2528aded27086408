#include "oracles.hpp"

#include "salut/error.hpp"
#include "salut/io.hpp"
#include "salut/style.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace salut;

namespace {

WeightGeneratorShape smallShape(std::uint32_t basis)
{
    WeightGeneratorShape s;
    s.reduceChannels = 8;
    s.hidden = 16;
    s.basisCount = basis;
    return s;
}

} // namespace

TEST(Features, BuiltinPyramidShapes)
{
    std::mt19937_64 rng(1);
    const ImageBuffer style = oracle::randomImage(40, 64, rng);
    const FeaturePyramid p = extract_features(style, FeatureProvider{});
    const std::array<std::size_t, 4> h{20, 10, 5, 3};
    const std::array<std::size_t, 4> w{32, 16, 8, 4};
    const std::array<std::size_t, 4> c{16, 32, 64, 128};
    for (std::size_t d = 0; d < 4; ++d) {
        EXPECT_EQ(p.levels[d].channels(), c[d]);
        EXPECT_EQ(p.levels[d].height(), h[d]);
        EXPECT_EQ(p.levels[d].width(), w[d]);
    }
}

TEST(Features, LargeStyleIsDownsized)
{
    std::mt19937_64 rng(2);
    const ImageBuffer style = oracle::randomImage(300, 600, rng);
    const FeaturePyramid p = extract_features(style, FeatureProvider{});
    EXPECT_EQ(p.levels[0].width(), 128u);
    EXPECT_EQ(p.levels[0].height(), 64u);
}

TEST(Features, TinyStyleIsRejected)
{
    std::mt19937_64 rng(3);
    EXPECT_THROW(extract_features(oracle::randomImage(8, 100, rng), FeatureProvider{}), Error);
    EXPECT_THROW(extract_features(ImageBuffer{}, FeatureProvider{}), Error);
}

TEST(Features, ArchiveRoundTripThroughFile)
{
    std::mt19937_64 rng(4);
    const FeaturePyramid p = extract_features(oracle::randomImage(32, 32, rng), FeatureProvider{});
    oracle::TempDir dir("style");
    io::write_weights(dir / "feat.salw", pyramid_to_archive(p));
    FeatureProvider fp;
    fp.mode = FeatureProvider::Mode::File;
    fp.path = dir / "feat.salw";
    const FeaturePyramid q = extract_features(ImageBuffer{}, fp);
    for (std::size_t d = 0; d < 4; ++d) {
        EXPECT_EQ(p.levels[d], q.levels[d]);
    }
}

TEST(Features, NonShrinkingPyramidRejected)
{
    nn::WeightArchive a;
    for (int d = 0; d < 4; ++d) {
        a.add("level" + std::to_string(d), nn::Tensor({2, 4, 4}));
    }
    EXPECT_THROW(pyramid_from_archive(a), Error);
}

TEST(WeightGenerator, OutputIsOnSimplex)
{
    std::mt19937_64 rng(5);
    const nn::WeightArchive params = make_weight_generator_params(smallShape(12), 9);
    for (int trial = 0; trial < 4; ++trial) {
        const FeaturePyramid p = extract_features(oracle::randomImage(48, 40, rng), FeatureProvider{});
        const StyleWeights w = generate_weights(p, params);
        ASSERT_EQ(w.alpha.size(), 12u);
        for (double a : w.alpha) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, 1.0);
        }
        EXPECT_NEAR(std::accumulate(w.alpha.begin(), w.alpha.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(WeightGenerator, ZeroFinalLayerGivesUniformWeights)
{
    std::mt19937_64 rng(6);
    const nn::WeightArchive params = make_weight_generator_params(smallShape(10), 1, true);
    const FeaturePyramid p = extract_features(oracle::randomImage(32, 32, rng), FeatureProvider{});
    for (double a : generate_weights(p, params).alpha) {
        EXPECT_NEAR(a, 0.1, 1e-12);
    }
}

TEST(WeightGenerator, DeterministicAndStyleSensitive)
{
    std::mt19937_64 rng(7);
    const nn::WeightArchive params = make_weight_generator_params(smallShape(6), 3);
    const ImageBuffer s1 = oracle::randomImage(32, 48, rng);
    ImageBuffer s2(32, 48);
    for (std::size_t i = 0; i < s2.values().size(); ++i) {
        s2.values()[i] = (i % 3 == 0) ? 0.9f : 0.1f;
    }
    const FeatureProvider fp;
    const StyleWeights a = generate_weights(extract_features(s1, fp), params);
    const StyleWeights b = generate_weights(extract_features(s1, fp), params);
    const StyleWeights c = generate_weights(extract_features(s2, fp), params);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_NE(a.alpha, c.alpha);
}

TEST(StyleToLut, FusesWithGeneratedWeights)
{
    std::mt19937_64 rng(8);
    const BasisLutBank bank = random_basis_bank(5, 2, 6, 11, 0.2);
    const nn::WeightArchive params = make_weight_generator_params(smallShape(6), 2);
    const ImageBuffer style = oracle::randomImage(32, 32, rng);
    const Lut4D lut = style_to_lut(style, FeatureProvider{}, params, bank);
    const StyleWeights w = generate_weights(extract_features(style, FeatureProvider{}), params);
    EXPECT_EQ(lut, fuse_luts(bank, w, true));
    EXPECT_EQ(lut.outOfRange(), 0.0);

    const nn::WeightArchive wrong = make_weight_generator_params(smallShape(5), 2);
    EXPECT_THROW(style_to_lut(style, FeatureProvider{}, wrong, bank), Error);
}

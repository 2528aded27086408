#include "oracles.hpp"

#include "salut/error.hpp"
#include "salut/lut.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace salut;

TEST(Lut4D, ShapeLimits)
{
    EXPECT_THROW(Lut4D(1, 2), Error);
    EXPECT_THROW(Lut4D(129, 1), Error);
    EXPECT_THROW(Lut4D(5, 0), Error);
    EXPECT_THROW(Lut4D(5, 65), Error);
    EXPECT_NO_THROW(Lut4D(2, 1));
    EXPECT_THROW(Lut4D(3, 1, std::vector<double>(5)), Error);
}

TEST(Lut4D, IndexOrderIsChannelContextRgb)
{
    const Lut4D lut(4, 3);
    EXPECT_EQ(lut.index(0, 0, 0, 0, 1), 1u);
    EXPECT_EQ(lut.index(0, 0, 0, 1, 0), 4u);
    EXPECT_EQ(lut.index(0, 0, 1, 0, 0), 16u);
    EXPECT_EQ(lut.index(0, 1, 0, 0, 0), 64u);
    EXPECT_EQ(lut.index(1, 0, 0, 0, 0), 192u);
    EXPECT_EQ(lut.channelStride(), 192u);
}

TEST(Lut4D, IdentityEntries)
{
    const Lut4D id = make_identity_lut4d(5, 2);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_DOUBLE_EQ(id.entry(0, k, 3, 1, 2), 0.75);
        EXPECT_DOUBLE_EQ(id.entry(1, k, 3, 1, 2), 0.25);
        EXPECT_DOUBLE_EQ(id.entry(2, k, 3, 1, 2), 0.5);
    }
}

TEST(QuadInterp, MatchesTentOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.1, 1.1);
    for (std::size_t bins : {1u, 2u, 3u}) {
        const Lut4D lut = oracle::randomLut(5, bins, rng);
        for (int i = 0; i < 300; ++i) {
            const double g = u(rng), r = u(rng), gg = u(rng), b = u(rng);
            const Rgb got = quad_interp(lut, g, r, gg, b);
            const Rgb want = oracle::quad(lut, g, r, gg, b);
            for (int c = 0; c < 3; ++c) {
                ASSERT_NEAR(got[c], want[c], 1e-12);
            }
        }
    }
}

TEST(QuadInterp, ExactAtNodesAndUpperEdge)
{
    std::mt19937_64 rng(3);
    const Lut4D lut = oracle::randomLut(5, 2, rng);
    const Rgb top = quad_interp(lut, 1.0, 1.0, 1.0, 1.0);
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_DOUBLE_EQ(top[c], lut.entry(c, 1, 4, 4, 4));
    }
    const Rgb node = quad_interp(lut, 0.0, 0.25, 0.5, 0.75);
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_DOUBLE_EQ(node[c], lut.entry(c, 0, 1, 2, 3));
    }
}

TEST(QuadInterp, NanCoordinateActsAsZero)
{
    std::mt19937_64 rng(5);
    const Lut4D lut = oracle::randomLut(3, 2, rng);
    const Rgb a = quad_interp(lut, std::nan(""), 0.3, 0.4, 0.5);
    const Rgb b = quad_interp(lut, 0.0, 0.3, 0.4, 0.5);
    EXPECT_EQ(a, b);
}

TEST(QuadCorners, WeightsFormPartitionOfUnity)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const QuadCorners q = quad_corners(7, 3, u(rng), u(rng), u(rng), u(rng));
        double sum = 0.0;
        for (double w : q.weights) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(TriInterp, MatchesTentOracleWithDomain)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Lut3D lut(6);
    for (double& e : lut.entries()) {
        e = u(rng);
    }
    for (int i = 0; i < 200; ++i) {
        const double r = u(rng), g = u(rng), b = u(rng);
        const Rgb got = tri_interp(lut, r, g, b);
        const Rgb want = oracle::tri(lut, r, g, b);
        for (int c = 0; c < 3; ++c) {
            ASSERT_NEAR(got[c], want[c], 1e-12);
        }
    }
    lut.domainMin = {0.1, 0.0, -0.5};
    lut.domainMax = {0.9, 2.0, 1.5};
    for (int i = 0; i < 200; ++i) {
        const double r = u(rng), g = 2.0 * u(rng), b = 2.0 * u(rng) - 0.5;
        const Rgb got = tri_interp(lut, r, g, b);
        const Rgb want = oracle::tri(lut, r, g, b);
        for (int c = 0; c < 3; ++c) {
            ASSERT_NEAR(got[c], want[c], 1e-12);
        }
    }
}

TEST(Conversions, SliceAndBack)
{
    std::mt19937_64 rng(1);
    const Lut4D lut = oracle::randomLut(4, 3, rng);
    const Lut3D s = lut.slice(2);
    EXPECT_EQ(s.entry(1, 2, 3, 0), lut.entry(1, 2, 2, 3, 0));
    const Lut4D one = to_lut4d(s);
    EXPECT_EQ(one.bins(), 1u);
    EXPECT_EQ(to_lut3d(one).entries().size(), s.entries().size());
    EXPECT_THROW(to_lut3d(lut), Error);
}

TEST(Fusion, ZeroWeightsGiveIdentityExactly)
{
    const BasisLutBank bank = random_basis_bank(5, 2, 6, 3, 0.2);
    EXPECT_EQ(fuse_luts(bank, StyleWeights{std::vector<double>(6, 0.0)}, false), bank.identity());
    EXPECT_EQ(fuse_luts(bank, StyleWeights{std::vector<double>(6, 0.0)}, true), bank.identity());
}

TEST(Fusion, MatchesEntrywiseLoopOracle)
{
    const BasisLutBank bank = random_basis_bank(5, 2, 8, 17, 0.5);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> alpha(8);
    for (double& a : alpha) {
        a = u(rng);
    }
    const Lut4D fused = fuse_luts(bank, StyleWeights{alpha}, false);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t r = 0; r < 5; ++r) {
                for (std::size_t g = 0; g < 5; ++g) {
                    for (std::size_t b = 0; b < 5; ++b) {
                        double want = (c == 0 ? r : c == 1 ? g : b) / 4.0;
                        for (std::size_t i = 0; i < 8; ++i) {
                            want += alpha[i] * bank.basis(i).entry(c, k, r, g, b);
                        }
                        ASSERT_NEAR(fused.entry(c, k, r, g, b), want, 1e-12);
                    }
                }
            }
        }
    }
    const Lut4D clamped = fuse_luts(bank, StyleWeights{alpha}, true);
    EXPECT_EQ(clamped.outOfRange(), 0.0);
    EXPECT_GT(fused.outOfRange(), 0.0);
}

TEST(Fusion, Linearity)
{
    const BasisLutBank bank = random_basis_bank(3, 2, 4, 8, 0.3);
    const std::vector<double> a{0.1, 0.2, 0.3, 0.4};
    const std::vector<double> b{0.5, 0.0, 0.25, 0.1};
    std::vector<double> sum(4);
    for (int i = 0; i < 4; ++i) {
        sum[i] = a[i] + b[i];
    }
    const Lut4D fa = fuse_residuals(bank, a, false);
    const Lut4D fb = fuse_residuals(bank, b, false);
    const Lut4D fs = fuse_residuals(bank, sum, false);
    const auto id = bank.identity().entries();
    for (std::size_t j = 0; j < id.size(); ++j) {
        ASSERT_NEAR(fs.entries()[j] - id[j], (fa.entries()[j] - id[j]) + (fb.entries()[j] - id[j]), 1e-12);
    }
}

TEST(Fusion, Errors)
{
    const BasisLutBank bank = random_basis_bank(3, 1, 2, 1, 0.1);
    EXPECT_THROW(fuse_luts(bank, StyleWeights{{0.5}}, true), Error);
    EXPECT_THROW(fuse_luts(bank, StyleWeights{{0.5, -0.1}}, true), Error);
    EXPECT_THROW(fuse_luts(bank, StyleWeights{{0.5, std::nan("")}}, true), Error);
    EXPECT_THROW(BasisLutBank(3, 1, {Lut4D(4, 1)}), Error);
}

TEST(RandomBank, DeterministicPerSeed)
{
    const BasisLutBank a = random_basis_bank(4, 2, 3, 99, 0.1);
    const BasisLutBank b = random_basis_bank(4, 2, 3, 99, 0.1);
    const BasisLutBank c = random_basis_bank(4, 2, 3, 100, 0.1);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.basis(i), b.basis(i));
    }
    EXPECT_NE(a.basis(0), c.basis(0));
}

#include "oracles.hpp"

#include "salut/error.hpp"
#include "salut/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

using namespace salut;
using namespace salut::io;

namespace {

Bytes bytesOf(std::string_view s)
{
    Bytes b(s.size());
    std::memcpy(b.data(), s.data(), s.size());
    return b;
}

FormatErrorKind formatKindOf(const std::function<void()>& f)
{
    try {
        f();
    } catch (const FormatError& e) {
        return e.formatKind();
    }
    ADD_FAILURE() << "expected a FormatError";
    return FormatErrorKind::Unsupported;
}

std::uint32_t u32At(const Bytes& b, std::size_t off)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<std::uint32_t>(b[off + static_cast<std::size_t>(i)]);
    }
    return v;
}

} // namespace

TEST(Ppm, ParsesWhitePixel)
{
    const ImageBuffer img = parse_ppm(bytesOf(std::string_view("P6\n1 1\n255\n\xff\xff\xff", 14)));
    ASSERT_EQ(img.height(), 1u);
    ASSERT_EQ(img.width(), 1u);
    for (float v : img.values()) {
        EXPECT_EQ(v, 1.0f);
    }
}

TEST(Ppm, CommentsAndSixteenBit)
{
    const std::string_view text("P6 # c\n2 1\n# more\n65535\n\x80\x00\x00\x00\xff\xff\x00\x00\x00\x00\x00\x01", 36);
    const ImageBuffer img = parse_ppm(bytesOf(text));
    EXPECT_FLOAT_EQ(img.at(0, 0, 0), 32768.0f / 65535.0f);
    EXPECT_FLOAT_EQ(img.at(0, 0, 2), 1.0f);
    EXPECT_FLOAT_EQ(img.at(0, 1, 2), 1.0f / 65535.0f);
}

TEST(Ppm, MalformedHeaderReportsOffset)
{
    try {
        parse_ppm(bytesOf("P6\n1 x\n255\n"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset(), 5u);
        EXPECT_EQ(e.formatKind(), FormatErrorKind::Malformed);
    }
    EXPECT_EQ(formatKindOf([] { parse_ppm(bytesOf("P5\n1 1\n255\n\x01")); }), FormatErrorKind::BadMagic);
    EXPECT_EQ(formatKindOf([] { parse_ppm(bytesOf("P6\n2 2\n255\n\x01\x02")); }), FormatErrorKind::Truncated);
    EXPECT_EQ(formatKindOf([] { parse_ppm(bytesOf("P6\n1 1\n0\n\x01\x02\x03")); }), FormatErrorKind::Malformed);
}

TEST(Ppm, RoundTripWithinQuantization)
{
    std::mt19937_64 rng(1);
    const ImageBuffer img = oracle::randomImage(13, 17, rng);
    const ImageBuffer back = parse_ppm(encode_ppm(img));
    EXPECT_LE(oracle::maxAbsDiff(img.values(), back.values()), 0.5 / 255.0 + 1e-7);
    oracle::TempDir dir("io");
    write_ppm(dir / "a.ppm", img);
    EXPECT_EQ(read_ppm(dir / "a.ppm"), back);
    try {
        read_ppm(dir / "missing.ppm");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Ctx, HalfWritesMidSampleAndRoundTrips)
{
    const Bytes b = encode_ctx(ContextMap(3, 2, 0.5f));
    const std::string head = "P5\n2 3\n65535\n";
    ASSERT_EQ(b.size(), head.size() + 12);
    const unsigned sample = (static_cast<unsigned>(b[head.size()]) << 8) | static_cast<unsigned>(b[head.size() + 1]);
    EXPECT_NEAR(static_cast<double>(sample), 32768.0, 1.0);

    std::mt19937_64 rng(2);
    const ContextMap ctx = oracle::randomContext(7, 5, rng);
    const ContextMap back = parse_ctx(encode_ctx(ctx));
    EXPECT_EQ(back.height(), 7u);
    EXPECT_EQ(back.width(), 5u);
    EXPECT_LE(oracle::maxAbsDiff(ctx.values(), back.values()), 1.0 / 65535.0);
}

TEST(Cube, SizeTwoIdentity)
{
    const std::string text = "TITLE \"id\"\n# comment\nLUT_3D_SIZE 2\n"
                             "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n";
    const Lut3D lut = parse_cube(text);
    EXPECT_EQ(lut.title, "id");
    EXPECT_TRUE(std::ranges::equal(lut.entries(), make_identity_lut3d(2).entries()));
}

TEST(Cube, RedIndexVariesFastest)
{
    const std::string text = "LUT_3D_SIZE 2\n0 0 0\n0.25 0.5 0.75\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n";
    const Lut3D lut = parse_cube(text);
    EXPECT_DOUBLE_EQ(lut.entry(0, 1, 0, 0), 0.25);
    EXPECT_DOUBLE_EQ(lut.entry(1, 1, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(lut.entry(2, 1, 0, 0), 0.75);

    // The writer emits the same order as the oracle's identity walk.
    const std::string out = encode_cube(make_identity_lut3d(3));
    std::istringstream in(out);
    std::string line;
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        std::array<double, 3> v{};
        if (std::sscanf(line.c_str(), "%lf %lf %lf", &v[0], &v[1], &v[2]) == 3) {
            rows.push_back(v);
        }
    }
    ASSERT_EQ(rows.size(), 27u);
    for (std::size_t b = 0, n = 0; b < 3; ++b) {
        for (std::size_t g = 0; g < 3; ++g) {
            for (std::size_t r = 0; r < 3; ++r, ++n) {
                EXPECT_DOUBLE_EQ(rows[n][0], r / 2.0);
                EXPECT_DOUBLE_EQ(rows[n][1], g / 2.0);
                EXPECT_DOUBLE_EQ(rows[n][2], b / 2.0);
            }
        }
    }
}

TEST(Cube, RoundTripAndDomain)
{
    std::mt19937_64 rng(3);
    Lut3D lut(5);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (double& e : lut.entries()) {
        e = u(rng);
    }
    lut.domainMin = {0.0, -0.1, 0.0};
    lut.domainMax = {1.0, 1.0, 2.0};
    const Lut3D back = parse_cube(encode_cube(lut));
    for (std::size_t i = 0; i < lut.entries().size(); ++i) {
        EXPECT_NEAR(back.entries()[i], lut.entries()[i], 1e-6);
    }
    EXPECT_EQ(back.domainMin, lut.domainMin);
    EXPECT_EQ(back.domainMax, lut.domainMax);
    oracle::TempDir dir("cube");
    write_cube(dir / "a.cube", lut);
    EXPECT_EQ(read_cube(dir / "a.cube"), back);
}

TEST(Cube, Errors)
{
    EXPECT_THROW(parse_cube("0 0 0\n"), FormatError);
    EXPECT_THROW(parse_cube("LUT_3D_SIZE 2\n0 0 0\n"), FormatError);
    EXPECT_THROW(parse_cube("LUT_3D_SIZE 2\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 nan\n"),
                 FormatError);
    EXPECT_THROW(parse_cube(""), FormatError);
}

TEST(ReferenceData, IdentityCubeMatchesOracle)
{
    const Lut3D lut = read_cube(std::string(SALUT_DATA_DIR) + "/identity_17.cube");
    ASSERT_EQ(lut.size(), 17u);
    for (std::size_t r = 0; r < 17; r += 4) {
        for (std::size_t g = 0; g < 17; g += 3) {
            for (std::size_t b = 0; b < 17; b += 5) {
                EXPECT_NEAR(lut.entry(0, r, g, b), r / 16.0, 1e-6);
                EXPECT_NEAR(lut.entry(1, r, g, b), g / 16.0, 1e-6);
                EXPECT_NEAR(lut.entry(2, r, g, b), b / 16.0, 1e-6);
            }
        }
    }
}

TEST(Lut4dFile, HeaderPayloadAndRoundTrip)
{
    const Bytes b = encode_lut4d(make_identity_lut4d(17, 2));
    EXPECT_EQ(std::memcmp(b.data(), "SALUT4D\0", 8), 0);
    EXPECT_EQ(u32At(b, 8), 1u);
    EXPECT_EQ(u32At(b, 12), 17u);
    EXPECT_EQ(u32At(b, 16), 2u);
    EXPECT_EQ(u32At(b, 20), 3u);
    EXPECT_EQ(b.size() - 24, 117912u);

    std::mt19937_64 rng(4);
    Lut4D lut = oracle::randomLut(6, 3, rng);
    for (double& e : lut.entries()) {
        e = static_cast<float>(e);
    }
    const Lut4D back = parse_lut4d(encode_lut4d(lut));
    EXPECT_EQ(back, lut);
    EXPECT_EQ(encode_lut4d(back), encode_lut4d(lut));
}

TEST(Lut4dFile, DistinctErrors)
{
    const Bytes good = encode_lut4d(make_identity_lut4d(3, 2));
    Bytes magic = good;
    magic[0] = std::byte{'X'};
    EXPECT_EQ(formatKindOf([&] { parse_lut4d(magic); }), FormatErrorKind::BadMagic);
    const Bytes cut(good.begin(), good.end() - 5);
    EXPECT_EQ(formatKindOf([&] { parse_lut4d(cut); }), FormatErrorKind::Truncated);
    Bytes version = good;
    version[8] = std::byte{2};
    EXPECT_EQ(formatKindOf([&] { parse_lut4d(version); }), FormatErrorKind::BadVersion);
    Bytes size = good;
    size[12] = std::byte{1};
    EXPECT_EQ(formatKindOf([&] { parse_lut4d(size); }), FormatErrorKind::BadSize);
    Bytes extra = good;
    extra.push_back(std::byte{0});
    EXPECT_THROW(parse_lut4d(extra), FormatError);
}

TEST(WeightsFile, RoundTripEmptyAndDuplicates)
{
    nn::WeightArchive a;
    a.add("conv.weight", nn::Tensor({2, 1, 3, 3}, std::vector<float>(18, 0.25f)));
    a.add("scalar", nn::Tensor({}, std::vector<float>{-1.5f}));
    a.add("ünïcode", nn::Tensor({3}, std::vector<float>{1, 2, 3}));
    const Bytes b = encode_weights(a);
    EXPECT_EQ(std::memcmp(b.data(), "SALUTWT\0", 8), 0);
    EXPECT_EQ(parse_weights(b), a);
    EXPECT_EQ(encode_weights(parse_weights(b)), b);

    const nn::WeightArchive empty = parse_weights(encode_weights(nn::WeightArchive{}));
    EXPECT_EQ(empty.size(), 0u);

    // Duplicate the single-tensor body by hand and bump the count.
    nn::WeightArchive one;
    one.add("x", nn::Tensor({1}, std::vector<float>{2.0f}));
    Bytes dup = encode_weights(one);
    const Bytes body(dup.begin() + 16, dup.end());
    dup.insert(dup.end(), body.begin(), body.end());
    dup[12] = std::byte{2};
    EXPECT_EQ(formatKindOf([&] { parse_weights(dup); }), FormatErrorKind::DuplicateName);
}

TEST(BankFile, RoundTrip)
{
    const BasisLutBank bank = random_basis_bank(4, 2, 3, 5, 0.1);
    oracle::TempDir dir("bank");
    write_bank(dir / "b.salw", bank);
    const BasisLutBank back = read_bank(dir / "b.salw");
    ASSERT_EQ(back.count(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < bank.basis(i).entries().size(); ++j) {
            EXPECT_EQ(back.basis(i).entries()[j], static_cast<float>(bank.basis(i).entries()[j]));
        }
    }
    nn::WeightArchive wrong;
    wrong.add("bases", nn::Tensor({2, 3, 2, 4, 4}));
    EXPECT_THROW(bank_from_archive(wrong), Error);
}

// Random corruptions of valid files: parsers either succeed or throw a
// library error, never anything else.
TEST(Fuzz, ParsersFailCleanly)
{
    std::mt19937_64 rng(99);
    nn::WeightArchive arch;
    arch.add("a", nn::Tensor({2, 3}, std::vector<float>(6, 0.5f)));
    arch.add("b", nn::Tensor({4}, std::vector<float>(4, 1.0f)));
    std::vector<std::pair<Bytes, std::function<void(const Bytes&)>>> seeds;
    seeds.emplace_back(encode_ppm(oracle::randomImage(3, 4, rng)), [](const Bytes& b) { parse_ppm(b); });
    seeds.emplace_back(encode_ctx(oracle::randomContext(3, 4, rng)), [](const Bytes& b) { parse_ctx(b); });
    seeds.emplace_back(encode_lut4d(oracle::randomLut(3, 2, rng)), [](const Bytes& b) { parse_lut4d(b); });
    seeds.emplace_back(encode_weights(arch), [](const Bytes& b) { parse_weights(b); });
    seeds.emplace_back(bytesOf(encode_cube(make_identity_lut3d(2))), [](const Bytes& b) {
        parse_cube(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
    });

    std::uniform_int_distribution<int> byte(0, 255);
    std::size_t failures = 0;
    for (int i = 0; i < 10000; ++i) {
        auto& [seed, parse] = seeds[static_cast<std::size_t>(i) % seeds.size()];
        Bytes b = seed;
        const int op = static_cast<int>(rng() % 4);
        const std::size_t pos = b.empty() ? 0 : rng() % b.size();
        if (op == 0) {
            b[pos] = static_cast<std::byte>(byte(rng));
        } else if (op == 1) {
            b.resize(pos);
        } else if (op == 2) {
            for (int k = 0; k < 4 && pos + static_cast<std::size_t>(k) < b.size(); ++k) {
                b[pos + static_cast<std::size_t>(k)] = std::byte{0xff};
            }
        } else {
            b.insert(b.begin() + static_cast<std::ptrdiff_t>(pos), static_cast<std::byte>(byte(rng)));
        }
        try {
            parse(b);
        } catch (const Error&) {
            ++failures;
        } catch (const std::exception& e) {
            FAIL() << "case " << i << " threw a non-library exception: " << e.what();
        }
    }
    EXPECT_GT(failures, 1000u);
}

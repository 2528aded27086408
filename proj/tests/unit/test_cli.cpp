#include "oracles.hpp"

#include "salut/cli.hpp"
#include "salut/io.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

using namespace salut;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    oracle::TempDir dir{"cli"};
    std::mt19937_64 rng{42};

    std::string path(const std::string& name) const { return dir / name; }

    std::string writeImage(const std::string& name, std::size_t h, std::size_t w)
    {
        io::write_ppm(path(name), oracle::randomImage(h, w, rng));
        return path(name);
    }
};

} // namespace

TEST_F(CliTest, UsageErrorsExitOne)
{
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"nonsense"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"apply", "--lut", "x"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, MissingOrCorruptFilesExitTwo)
{
    const std::string img = writeImage("c.ppm", 4, 4);
    EXPECT_EQ(run({"apply", "--lut", path("none.lut4d"), "--content", img, "-o", path("o.ppm")}).code,
              cli::kExitData);
    std::ofstream(path("bad.lut4d")) << "not a lut";
    const CliResult r = run({"apply", "--lut", path("bad.lut4d"), "--content", img, "--context", "auto:luminance", "-o",
                       path("o.ppm")});
    EXPECT_EQ(r.code, cli::kExitData);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, FuseZerosIsIdentityAndStyleAlphaExclusive)
{
    ASSERT_EQ(run({"init-bank", "--size", "5", "--bins", "2", "--count", "4", "--seed", "3", "-o", path("b.salw")})
                  .code,
              0);
    const CliResult r = run({"fuse", "--bank", path("b.salw"), "--alpha", "zeros", "-o", path("z.lut4d")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("alpha: n=4"), std::string::npos);
    EXPECT_EQ(io::read_lut4d(path("z.lut4d")), make_identity_lut4d(5, 2));

    const std::string style = writeImage("s.ppm", 32, 32);
    EXPECT_EQ(run({"fuse", "--bank", path("b.salw"), "-o", path("x.lut4d")}).code, cli::kExitUsage);
    EXPECT_EQ(run({"fuse", "--bank", path("b.salw"), "--alpha", "zeros", "--style", style, "-o", path("x.lut4d")})
                  .code,
              cli::kExitUsage);
    const CliResult s = run({"fuse", "--bank", path("b.salw"), "--style", style, "-o", path("s.lut4d")});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_NE(s.out.find("sum=1"), std::string::npos);

    std::ofstream(path("a.txt")) << "0.1 0.2\n0.3\n";
    EXPECT_EQ(run({"fuse", "--bank", path("b.salw"), "--alpha", path("a.txt"), "-o", path("x.lut4d")}).code,
              cli::kExitData);
}

TEST_F(CliTest, ContextFallbackAndNeuralZeroFinal)
{
    io::write_ppm(path("white.ppm"), ImageBuffer(9, 7, std::vector<float>(9 * 7 * 3, 1.0f)));
    ASSERT_EQ(run({"context", "--content", path("white.ppm"), "--fallback", "luminance", "-o", path("l.pgm")}).code,
              0);
    const ContextMap lum = io::read_ctx(path("l.pgm"));
    for (float v : lum.values()) {
        EXPECT_EQ(v, 1.0f);
    }

    std::ofstream(path("small.cfg")) << "cg_width1 = 8\ncg_width2 = 8\ncg_residual_blocks = 1\ncg_attention_dim = 8\n";
    ASSERT_EQ(run({"init-weights", "--kind", "cg", "--zero-final", "--config", path("small.cfg"), "-o",
                   path("cg.salw")})
                  .code,
              0);
    const std::string content = writeImage("c.ppm", 10, 13);
    const std::string style = writeImage("s.ppm", 12, 12);
    const CliResult r = run({"context", "--content", content, "--style", style, "--cg-weights", path("cg.salw"), "-o",
                       path("n.pgm")});
    ASSERT_EQ(r.code, 0) << r.err;
    const ContextMap ctx = io::read_ctx(path("n.pgm"));
    EXPECT_EQ(ctx.height(), 10u);
    EXPECT_EQ(ctx.width(), 13u);
    for (float v : ctx.values()) {
        EXPECT_NEAR(v, 0.5f, 1.0f / 65535.0f);
    }
    EXPECT_EQ(run({"context", "--content", content, "-o", path("x.pgm")}).code, cli::kExitUsage);
}

TEST_F(CliTest, ApplyThreadsCubeAndContextRules)
{
    const std::string content = writeImage("c.ppm", 21, 17);
    ASSERT_EQ(run({"init-bank", "--size", "5", "--bins", "2", "--count", "3", "-o", path("b.salw")}).code, 0);
    ASSERT_EQ(run({"fuse", "--bank", path("b.salw"), "--alpha", "uniform", "-o", path("u.lut4d")}).code, 0);

    EXPECT_EQ(run({"apply", "--lut", path("u.lut4d"), "--content", content, "-o", path("o.ppm")}).code,
              cli::kExitUsage);
    ASSERT_EQ(run({"apply", "--lut", path("u.lut4d"), "--content", content, "--context", "auto:luminance:2",
                   "--threads", "1", "-o", path("o1.ppm")})
                  .code,
              0);
    ASSERT_EQ(run({"apply", "--lut", path("u.lut4d"), "--content", content, "--context", "auto:luminance:2",
                   "--threads", "8", "-o", path("o8.ppm")})
                  .code,
              0);
    EXPECT_EQ(io::read_file(path("o1.ppm")), io::read_file(path("o8.ppm")));

    ASSERT_EQ(run({"make-identity", "--size", "9", "-o", path("id.cube")}).code, 0);
    ASSERT_EQ(run({"make-identity", "--size", "9", "--bins", "1", "-o", path("id.lut4d")}).code, 0);
    ASSERT_EQ(run({"apply", "--lut", path("id.cube"), "--content", content, "-o", path("a.ppm")}).code, 0);
    ASSERT_EQ(run({"apply", "--lut", path("id.lut4d"), "--content", content, "-o", path("b.ppm")}).code, 0);
    EXPECT_EQ(io::read_file(path("a.ppm")), io::read_file(path("b.ppm")));
    EXPECT_EQ(io::read_file(path("a.ppm")), io::read_file(content));
}

TEST_F(CliTest, MetricsSelfComparisonJson)
{
    const std::string img = writeImage("a.ppm", 16, 16);
    const CliResult r = run({"metrics", "--test", img, "--ref", img, "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["schema"], "salut-metrics/1");
    EXPECT_EQ(doc["pairs"][0]["psnr"], "inf");
    EXPECT_DOUBLE_EQ(doc["pairs"][0]["ssim"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(doc["aggregate"]["h_corr"].get<double>(), 1.0);
    EXPECT_EQ(doc["h_corr_against"], "reference");

    std::filesystem::create_directories(path("set"));
    io::write_ppm(path("set") + "/1.ppm", oracle::randomImage(8, 8, rng));
    io::write_ppm(path("set") + "/2.ppm", oracle::randomImage(8, 8, rng));
    const CliResult s = run({"metrics", "--set", path("set"), "-o", path("m.json")});
    ASSERT_EQ(s.code, 0) << s.err;
    std::ifstream in(path("m.json"));
    const auto d2 = nlohmann::json::parse(in);
    EXPECT_EQ(d2["lab_bhattacharyya"]["images"], 2);
    EXPECT_EQ(d2["lab_bhattacharyya"]["bins"]["L"]["count"], 100);
    EXPECT_EQ(run({"metrics"}).code, cli::kExitUsage);
}

TEST_F(CliTest, FitWritesOutputsAndFlagsDivergence)
{
    std::filesystem::create_directories(path("pairs"));
    const ImageBuffer content = oracle::randomImage(8, 8, rng);
    io::write_ppm(path("pairs") + "/p_content.ppm", content);
    io::write_ppm(path("pairs") + "/p_target.ppm", content);
    const CliResult r = run({"fit", "--pairs", path("pairs"), "--steps", "5", "-o", path("f.lut4d")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("no context map"), std::string::npos);
    EXPECT_NE(r.out.find("out-of-range"), std::string::npos);
    std::ifstream trace(path("f.lut4d") + ".trace.csv");
    std::string header;
    std::getline(trace, header);
    EXPECT_EQ(header, "step,L_rec,L_TV,L_MN,total");
    EXPECT_EQ(io::read_lut4d(path("f.lut4d")).size(), 17u);

    const CliResult nan = run({"fit", "--pairs", path("pairs"), "--steps", "3", "--lr", "1e300", "--lambda-mn", "0",
                         "-o", path("n.lut4d")});
    EXPECT_EQ(nan.code, cli::kExitNumeric) << nan.out << nan.err;

    EXPECT_EQ(run({"fit", "--pairs", path("pairs"), "--mode", "alpha", "-o", path("a.lut4d")}).code, cli::kExitUsage);
}

TEST_F(CliTest, GradcheckPassAndCorrupt)
{
    EXPECT_EQ(run({"gradcheck", "--seed", "2", "--coords", "20"}).code, 0);
    EXPECT_EQ(run({"gradcheck", "--seed", "2", "--coords", "20", "--corrupt", "0.5"}).code, cli::kExitNumeric);
}

TEST_F(CliTest, BenchJsonSmall)
{
    std::ofstream(path("b.cfg")) << "lut_size = 5\nbasis_count = 4\n";
    const CliResult r = run({"bench", "--width", "64", "--height", "32", "--iters", "2", "--lut-iters", "1", "--threads", "2",
                       "--config", path("b.cfg"), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["schema"], "salut-bench/1");
    EXPECT_EQ(doc["threads"], 2);
    EXPECT_GT(doc["fps"].get<double>(), 0.0);
    EXPECT_TRUE(doc["machine"].contains("kernel"));
}

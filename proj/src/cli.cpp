#include "salut/cli.hpp"

#include "salut/apply.hpp"
#include "salut/config.hpp"
#include "salut/context.hpp"
#include "salut/error.hpp"
#include "salut/fitting.hpp"
#include "salut/io.hpp"
#include "salut/metrics.hpp"
#include "salut/style.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace salut::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Error usage(const std::string& what)
{
    return Error(ErrorKind::Usage, what);
}

// JSON has no infinity; non-finite values become strings.
Json number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

bool hasExtension(const fs::path& p, std::string_view ext)
{
    std::string e = p.extension().string();
    std::ranges::transform(e, e.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return e == ext;
}

void writeText(const fs::path& path, const std::string& text)
{
    io::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

Config loadConfig(const std::string& path)
{
    return path.empty() ? config_preset("paper-default") : load_config(path);
}

std::vector<double> readNumbers(const fs::path& path)
{
    const io::Bytes raw = io::read_file(path);
    std::string text(reinterpret_cast<const char*>(raw.data()), raw.size());
    std::ranges::replace(text, ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        if (token.starts_with('#')) {
            std::getline(in, token);
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) {
                throw std::invalid_argument(token);
            }
        } catch (const std::exception&) {
            throw Error(ErrorKind::Format, "'" + path.string() + "' holds a non-numeric token '" + token + "'");
        }
    }
    return out;
}

std::string numbersText(std::span<const double> v)
{
    std::string out;
    for (double x : v) {
        out += fmt("%.17g", x) + "\n";
    }
    return out;
}

ContextMap resolveContext(const std::string& spec, const ImageBuffer& content)
{
    constexpr std::string_view prefix = "auto:luminance";
    if (spec.starts_with(prefix)) {
        int radius = 8;
        if (spec.size() > prefix.size()) {
            if (spec[prefix.size()] != ':') {
                throw usage("context must be a file or auto:luminance[:radius]");
            }
            radius = std::stoi(spec.substr(prefix.size() + 1));
        }
        return luminance_context(content, radius);
    }
    ContextMap ctx = io::read_ctx(spec);
    if (!ctx.matches(content)) {
        throw Error(ErrorKind::DimensionMismatch, "context map size differs from the content image");
    }
    return ctx;
}

struct Summary {
    double min = 0.0;
    double max = 0.0;
    double sum = 0.0;
    std::size_t argmax = 0;
};

Summary summarize(std::span<const double> v)
{
    Summary s;
    if (v.empty()) {
        return s;
    }
    s.min = *std::ranges::min_element(v);
    s.argmax = static_cast<std::size_t>(std::ranges::max_element(v) - v.begin());
    s.max = v[s.argmax];
    s.sum = std::accumulate(v.begin(), v.end(), 0.0);
    return s;
}

double percentile(std::vector<double> v, double q)
{
    std::ranges::sort(v);
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double seconds(std::chrono::steady_clock::duration d)
{
    return std::chrono::duration<double>(d).count();
}

std::string cpuModel()
{
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("model name")) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                return line.substr(line.find_first_not_of(' ', colon + 1));
            }
        }
    }
    return "unknown";
}

ImageBuffer syntheticImage(std::size_t h, std::size_t w, std::uint64_t seed)
{
    ImageBuffer img(h, w);
    std::mt19937 rng(static_cast<std::uint32_t>(seed));
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : img.values()) {
        v = u(rng);
    }
    return img;
}

// A smooth colorful style stand-in for timing: gradients plus a ripple.
ImageBuffer syntheticStyle(std::size_t h, std::size_t w)
{
    ImageBuffer img(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double fy = static_cast<double>(y) / static_cast<double>(h);
            const double fx = static_cast<double>(x) / static_cast<double>(w);
            img.at(y, x, 0) = static_cast<float>(0.5 + 0.5 * std::sin(6.0 * fx + 2.0 * fy));
            img.at(y, x, 1) = static_cast<float>(fy);
            img.at(y, x, 2) = static_cast<float>(0.5 + 0.4 * std::cos(9.0 * fx * fy));
        }
    }
    return img;
}

// ---------------------------------------------------------------- commands

struct FuseArgs {
    std::string bank, style, provider = "builtin", features, wgWeights, alpha, config, output;
};

int cmdFuse(const FuseArgs& a, std::ostream& out)
{
    if (a.style.empty() == a.alpha.empty()) {
        throw usage("fuse needs exactly one of --style and --alpha");
    }
    const Config cfg = loadConfig(a.config);
    const BasisLutBank bank = io::read_bank(a.bank);

    Lut4D fused;
    std::vector<double> alpha;
    if (!a.alpha.empty()) {
        if (a.alpha == "zeros") {
            alpha.assign(bank.count(), 0.0);
        } else if (a.alpha == "uniform") {
            alpha.assign(bank.count(), 1.0 / static_cast<double>(bank.count()));
        } else {
            alpha = readNumbers(a.alpha);
        }
        fused = fuse_residuals(bank, alpha, true);
    } else {
        FeatureProvider provider;
        provider.seed = cfg.seed;
        provider.channels = cfg.weightGenerator.levelChannels;
        if (a.provider == "file") {
            if (a.features.empty()) {
                throw usage("--provider file needs --features");
            }
            provider.mode = FeatureProvider::Mode::File;
            provider.path = a.features;
        } else if (a.provider != "builtin") {
            throw usage("--provider must be builtin or file");
        }
        WeightGeneratorShape shape = cfg.weightGenerator;
        shape.basisCount = static_cast<std::uint32_t>(bank.count());
        const nn::WeightArchive params =
            a.wgWeights.empty() ? make_weight_generator_params(shape, cfg.seed) : io::read_weights(a.wgWeights);
        const ImageBuffer style = io::read_ppm(a.style);
        alpha = generate_weights(extract_features(style, provider), params).alpha;
        fused = fuse_luts(bank, StyleWeights{alpha}, true);
    }
    io::write_lut4d(a.output, fused);

    const Summary s = summarize(alpha);
    out << "alpha: n=" << alpha.size() << " min=" << fmt("%.6g", s.min) << " max=" << fmt("%.6g", s.max)
        << " (basis " << s.argmax << ") sum=" << fmt("%.6g", s.sum) << "\n";
    out << "wrote " << a.output << " (D=" << fused.size() << ", C=" << fused.bins() << ")\n";
    return kExitOk;
}

struct ContextArgs {
    std::string content, style, cgWeights, fallback, config, output;
    int radius = 8;
};

int cmdContext(const ContextArgs& a, std::ostream& out)
{
    const ImageBuffer content = io::read_ppm(a.content);
    ContextMap ctx;
    if (!a.fallback.empty()) {
        if (a.fallback != "luminance") {
            throw usage("--fallback must be luminance");
        }
        ctx = luminance_context(content, a.radius);
    } else {
        if (a.style.empty()) {
            throw usage("context needs --style unless --fallback luminance is given");
        }
        const Config cfg = loadConfig(a.config);
        const nn::WeightArchive params = a.cgWeights.empty() ? make_context_params(cfg.contextGenerator, cfg.seed)
                                                             : io::read_weights(a.cgWeights);
        ctx = generate_context(content, io::read_ppm(a.style), params);
    }
    io::write_ctx(a.output, ctx);
    out << "wrote " << a.output << " (" << ctx.height() << "x" << ctx.width() << ")\n";
    return kExitOk;
}

struct ApplyArgs {
    std::string lut, content, context, output;
    std::size_t threads = 0;
};

int cmdApply(const ApplyArgs& a, std::ostream& out)
{
    const ImageBuffer content = io::read_ppm(a.content);
    ImageBuffer result;
    if (hasExtension(a.lut, ".cube")) {
        result = apply_lut3d(io::read_cube(a.lut), content, a.threads);
    } else {
        const Lut4D lut = io::read_lut4d(a.lut);
        if (a.context.empty()) {
            if (lut.bins() > 1) {
                throw usage("a 4D LUT needs --context (a .pgm map or auto:luminance)");
            }
            result = apply_lut4d(lut, content, ContextMap(content.height(), content.width()), a.threads);
        } else {
            result = apply_lut4d(lut, content, resolveContext(a.context, content), a.threads);
        }
    }
    io::write_ppm(a.output, result);
    out << "wrote " << a.output << "\n";
    return kExitOk;
}

struct FitArgs {
    std::string pairs, mode, config, bank, init, output, trace;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr, lambdaRec, lambdaTv, lambdaMn;
    int radius = 8;
};

std::vector<fit::FitPair> loadPairs(const fs::path& dir, int radius, std::ostream& out)
{
    if (!fs::is_directory(dir)) {
        throw Error(ErrorKind::Io, "pairs directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string file = entry.path().filename().string();
        constexpr std::string_view suffix = "_content.ppm";
        if (file.size() > suffix.size() && file.ends_with(suffix)) {
            names.push_back(file.substr(0, file.size() - suffix.size()));
        }
    }
    std::ranges::sort(names);
    if (names.empty()) {
        throw Error(ErrorKind::Io, "no <name>_content.ppm files in '" + dir.string() + "'");
    }
    std::vector<fit::FitPair> pairs;
    for (const std::string& name : names) {
        fit::FitPair p;
        p.content = io::read_ppm(dir / (name + "_content.ppm"));
        p.target = io::read_ppm(dir / (name + "_target.ppm"));
        const fs::path ctxPath = dir / (name + "_context.pgm");
        if (fs::exists(ctxPath)) {
            p.context = io::read_ctx(ctxPath);
        } else {
            out << "note: " << name << " has no context map; using luminance (radius " << radius << ")\n";
            p.context = luminance_context(p.content, radius);
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

int cmdFit(const FitArgs& a, std::ostream& out)
{
    Config cfg = loadConfig(a.config);
    fit::FitConfig& fc = cfg.fit;
    if (!a.mode.empty()) {
        if (a.mode == "alpha") {
            fc.mode = fit::Mode::Alpha;
        } else if (a.mode == "lut_entries") {
            fc.mode = fit::Mode::LutEntries;
        } else {
            throw usage("--mode must be alpha or lut_entries");
        }
    }
    if (a.steps) {
        fc.steps = *a.steps;
    }
    if (a.seed) {
        fc.seed = *a.seed;
    }
    if (a.lr) {
        fc.learningRate = *a.lr;
    }
    if (a.lambdaRec) {
        fc.lambdaRec = *a.lambdaRec;
    }
    if (a.lambdaTv) {
        fc.lambdaTv = *a.lambdaTv;
    }
    if (a.lambdaMn) {
        fc.lambdaMn = *a.lambdaMn;
    }
    fc.validate();

    const std::vector<fit::FitPair> pairs = loadPairs(a.pairs, a.radius, out);
    fit::FitResult result;
    std::optional<BasisLutBank> bank;
    if (fc.mode == fit::Mode::Alpha) {
        if (a.bank.empty()) {
            throw usage("--mode alpha needs --bank");
        }
        bank = io::read_bank(a.bank);
        std::vector<double> init;
        if (!a.init.empty()) {
            init = readNumbers(a.init);
        }
        result = fit::fit_alpha(pairs, fc, *bank, init);
    } else {
        const Lut4D init = a.init.empty() ? make_identity_lut4d(cfg.lutSize, cfg.contextBins) : io::read_lut4d(a.init);
        result = fit::fit_lut(pairs, fc, init);
    }

    Lut4D exported = result.lut;
    exported.clampEntries();
    io::write_lut4d(a.output, exported);
    const std::string tracePath = a.trace.empty() ? a.output + ".trace.csv" : a.trace;
    writeText(tracePath, fit::trace_csv(result.trace));
    if (fc.mode == fit::Mode::Alpha) {
        writeText(a.output + ".alpha.txt", numbersText(result.params));
    }

    const fit::LossBreakdown& first = result.trace.front().loss;
    const fit::LossBreakdown& last = result.trace.back().loss;
    out << "fit: " << pairs.size() << " pair(s), " << fc.steps << " steps, mode "
        << (fc.mode == fit::Mode::Alpha ? "alpha" : "lut_entries") << "\n";
    out << "loss: " << fmt("%.6g", first.total) << " -> " << fmt("%.6g", last.total)
        << " (rec " << fmt("%.6g", last.rec) << ", tv " << fmt("%.6g", last.tv) << ", mn " << fmt("%.6g", last.mn)
        << ")\n";
    out << "out-of-range before export clamp: " << fmt("%.6g", result.outOfRange) << "\n";
    out << "wrote " << a.output << " and " << tracePath << "\n";
    return kExitOk;
}

struct MetricsArgs {
    std::string test, ref, style, set, lpips, output;
    bool json = false;
};

std::vector<fs::path> ppmFiles(const fs::path& dir)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && hasExtension(entry.path(), ".ppm")) {
            files.push_back(entry.path());
        }
    }
    std::ranges::sort(files);
    return files;
}

int cmdMetrics(const MetricsArgs& a, std::ostream& out)
{
    if (a.test.empty() != a.ref.empty()) {
        throw usage("--test and --ref go together");
    }
    if (a.test.empty() && a.set.empty()) {
        throw usage("metrics needs --test/--ref, --set, or both");
    }
    Json doc;
    doc["schema"] = "salut-metrics/1";

    if (!a.test.empty()) {
        std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> work;
        if (fs::is_directory(a.test)) {
            for (const fs::path& t : ppmFiles(a.test)) {
                const fs::path r = fs::path(a.ref) / t.filename();
                if (!fs::exists(r)) {
                    throw Error(ErrorKind::Io, "reference '" + r.string() + "' is missing");
                }
                work.push_back({t.filename().string(), {t, r}});
            }
        } else {
            work.push_back({fs::path(a.test).filename().string(), {a.test, a.ref}});
        }
        std::optional<ImageBuffer> style;
        if (!a.style.empty()) {
            style = io::read_ppm(a.style);
        }
        Json pairs = Json::array();
        double sumPsnr = 0.0, sumSsim = 0.0, sumCorr = 0.0;
        for (const auto& [name, files] : work) {
            const ImageBuffer test = io::read_ppm(files.first);
            const ImageBuffer ref = io::read_ppm(files.second);
            const double p = metrics::psnr(test, ref);
            const double s = metrics::ssim(test, ref);
            const double h = metrics::hist_corr(test, style ? *style : ref);
            sumPsnr += p;
            sumSsim += s;
            sumCorr += h;
            pairs.push_back(Json{{"name", name}, {"psnr", number(p)}, {"ssim", number(s)}, {"h_corr", number(h)}});
        }
        const auto n = static_cast<double>(work.size());
        doc["h_corr_against"] = style ? "style" : "reference";
        doc["pairs"] = pairs;
        doc["aggregate"] = Json{{"count", work.size()},
                                {"psnr", number(sumPsnr / n)},
                                {"ssim", number(sumSsim / n)},
                                {"h_corr", number(sumCorr / n)}};
        if (!a.json && a.output.empty()) {
            for (const Json& p : pairs) {
                out << p["name"].get<std::string>() << ": psnr=" << p["psnr"].dump() << " ssim=" << p["ssim"].dump()
                    << " h_corr=" << p["h_corr"].dump() << "\n";
            }
        }
    }

    if (!a.set.empty()) {
        std::vector<ImageBuffer> images;
        for (const fs::path& f : ppmFiles(a.set)) {
            images.push_back(io::read_ppm(f));
        }
        const std::array<double, 3> d = metrics::lab_bhattacharyya(images);
        doc["lab_bhattacharyya"] =
            Json{{"L", number(d[0])},
                 {"a", number(d[1])},
                 {"b", number(d[2])},
                 {"images", images.size()},
                 {"bins", Json{{"L", Json{{"count", metrics::kLabLBins}, {"range", {0, 100}}}},
                               {"a", Json{{"count", metrics::kLabABBins}, {"range", {-128, 128}}}},
                               {"b", Json{{"count", metrics::kLabABBins}, {"range", {-128, 128}}}}}}};
        if (!a.json && a.output.empty()) {
            out << "lab_bhattacharyya: L=" << number(d[0]).dump() << " a=" << number(d[1]).dump()
                << " b=" << number(d[2]).dump() << "\n";
        }
    }

    if (!a.lpips.empty()) {
        const std::vector<double> scores = readNumbers(a.lpips);
        if (scores.empty()) {
            throw Error(ErrorKind::Format, "LPIPS score file is empty");
        }
        doc["lpips_external"] =
            Json{{"source", a.lpips},
                 {"count", scores.size()},
                 {"mean", number(std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size())}};
    }

    const std::string text = doc.dump(2) + "\n";
    if (!a.output.empty()) {
        writeText(a.output, text);
    }
    if (a.json) {
        out << text;
    }
    return kExitOk;
}

struct BenchArgs {
    std::size_t width = 3840, height = 2160, threads = 0, iters = 20, lutIters = 3;
    std::string lut, config, output;
    bool json = false;
};

int cmdBench(const BenchArgs& a, std::ostream& out)
{
    if (a.iters < 1 || a.lutIters < 1) {
        throw usage("--iters and --lut-iters must be >= 1");
    }
    if (a.width < 1 || a.height < 1) {
        throw usage("--width and --height must be >= 1");
    }
    using Clock = std::chrono::steady_clock;
    const Config cfg = loadConfig(a.config);
    const std::size_t threads = a.threads == 0 ? default_thread_count() : a.threads;

    // LUT generation: style features, weight prediction and fusion.
    const BasisLutBank bank =
        random_basis_bank(cfg.lutSize, cfg.contextBins, cfg.weightGenerator.basisCount, cfg.seed, 0.05);
    const nn::WeightArchive wg = make_weight_generator_params(cfg.weightGenerator, cfg.seed);
    FeatureProvider provider;
    provider.seed = cfg.seed;
    provider.channels = cfg.weightGenerator.levelChannels;
    const ImageBuffer style = syntheticStyle(720, 1280);
    std::vector<double> genTimes;
    Lut4D generated;
    for (std::size_t i = 0; i < a.lutIters; ++i) {
        const auto t0 = Clock::now();
        generated = style_to_lut(style, provider, wg, bank);
        genTimes.push_back(seconds(Clock::now() - t0));
    }
    const Lut4D lut = a.lut.empty() ? generated : io::read_lut4d(a.lut);

    const ImageBuffer frame = syntheticImage(a.height, a.width, cfg.seed);
    const auto c0 = Clock::now();
    const ContextMap ctx = luminance_context(frame, 8);
    const double contextTime = seconds(Clock::now() - c0);

    const PackedLut4D packed(lut);
    ImageBuffer result;
    apply_lut4d_into(packed, frame, ctx, result, threads); // warm-up
    std::vector<double> times;
    for (std::size_t i = 0; i < a.iters; ++i) {
        const auto t0 = Clock::now();
        apply_lut4d_into(packed, frame, ctx, result, threads);
        times.push_back(seconds(Clock::now() - t0));
    }
    const double mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    const double genMean = std::accumulate(genTimes.begin(), genTimes.end(), 0.0) / static_cast<double>(genTimes.size());

    Json doc;
    doc["schema"] = "salut-bench/1";
    doc["width"] = a.width;
    doc["height"] = a.height;
    doc["threads"] = threads;
    doc["iters"] = a.iters;
    doc["lut"] = Json{{"size", lut.size()},
                      {"bins", lut.bins()},
                      {"basis_count", bank.count()},
                      {"source", a.lut.empty() ? "generated" : a.lut}};
    doc["lut_generation_s"] = Json{{"mean", genMean},
                                   {"min", *std::ranges::min_element(genTimes)},
                                   {"runs", genTimes.size()},
                                   {"basis_count", bank.count()}};
    doc["apply_s"] = Json{{"mean", mean},
                          {"p50", percentile(times, 0.5)},
                          {"p95", percentile(times, 0.95)},
                          {"min", *std::ranges::min_element(times)}};
    doc["fps"] = 1.0 / mean;
    doc["luminance_context_s"] = contextTime;
    doc["machine"] = Json{{"cpu", cpuModel()},
                          {"hardware_threads", std::thread::hardware_concurrency()},
                          {"kernel", apply_kernel_name()}};

    const std::string text = doc.dump(2) + "\n";
    if (!a.output.empty()) {
        writeText(a.output, text);
    }
    if (a.json) {
        out << text;
    } else {
        out << "machine: " << cpuModel() << ", " << std::thread::hardware_concurrency() << " hardware threads, kernel "
            << apply_kernel_name() << "\n";
        out << "frame " << a.width << "x" << a.height << ", " << threads << " threads, " << a.iters << " iterations\n";
        out << "LUT generation: " << fmt("%.4f", genMean) << " s (N=" << bank.count() << ", D=" << cfg.lutSize
            << ", C=" << cfg.contextBins << ")\n";
        out << "LUT application: mean " << fmt("%.4f", mean) << " s, p50 " << fmt("%.4f", percentile(times, 0.5))
            << " s, p95 " << fmt("%.4f", percentile(times, 0.95)) << " s\n";
        out << "timing split: " << fmt("%.4f", genMean) << " + " << fmt("%.4f", mean) << " s\n";
        out << "throughput: " << fmt("%.2f", 1.0 / mean) << " FPS\n";
    }
    return kExitOk;
}

struct GradcheckArgs {
    std::uint64_t seed = 1;
    std::size_t coords = 100;
    double corrupt = 0.0;
};

int cmdGradcheck(const GradcheckArgs& a, std::ostream& out)
{
    const fit::GradCheckSuite suite = fit::run_gradcheck_suite(a.seed, a.coords, a.corrupt);
    auto line = [&out](const char* name, const fit::GradCheckReport& r) {
        out << name << ": " << r.entries.size() << " coordinates, max relative error "
            << fmt("%.3e", r.maxRelError) << (r.passed ? " PASS" : " FAIL") << "\n";
    };
    line("lut_entries", suite.lutEntries);
    line("alpha", suite.alpha);
    return suite.passed() ? kExitOk : kExitNumeric;
}

struct MakeIdentityArgs {
    std::size_t size = 17, bins = 2;
    std::string output;
};

int cmdMakeIdentity(const MakeIdentityArgs& a, std::ostream& out)
{
    if (hasExtension(a.output, ".cube")) {
        Lut3D lut = make_identity_lut3d(a.size);
        lut.title = "identity";
        io::write_cube(a.output, lut);
    } else {
        io::write_lut4d(a.output, make_identity_lut4d(a.size, a.bins));
    }
    out << "wrote " << a.output << "\n";
    return kExitOk;
}

struct InitBankArgs {
    std::optional<std::size_t> size, bins, count;
    std::optional<std::uint64_t> seed;
    double scale = 0.05;
    std::string config, output;
};

int cmdInitBank(const InitBankArgs& a, std::ostream& out)
{
    const Config cfg = loadConfig(a.config);
    const BasisLutBank bank = random_basis_bank(a.size.value_or(cfg.lutSize), a.bins.value_or(cfg.contextBins),
                                                a.count.value_or(cfg.weightGenerator.basisCount),
                                                a.seed.value_or(cfg.seed), a.scale);
    io::write_bank(a.output, bank);
    out << "wrote " << a.output << " (N=" << bank.count() << ", D=" << bank.size() << ", C=" << bank.bins() << ")\n";
    return kExitOk;
}

struct InitWeightsArgs {
    std::string kind, config, output;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> basisCount;
    bool zeroFinal = false;
};

int cmdInitWeights(const InitWeightsArgs& a, std::ostream& out)
{
    const Config cfg = loadConfig(a.config);
    const std::uint64_t seed = a.seed.value_or(cfg.seed);
    nn::WeightArchive archive;
    if (a.kind == "wg") {
        WeightGeneratorShape shape = cfg.weightGenerator;
        if (a.basisCount) {
            shape.basisCount = *a.basisCount;
        }
        archive = make_weight_generator_params(shape, seed, a.zeroFinal);
    } else if (a.kind == "cg") {
        archive = make_context_params(cfg.contextGenerator, seed, a.zeroFinal);
    } else {
        throw usage("--kind must be wg or cg");
    }
    io::write_weights(a.output, archive);
    out << "wrote " << a.output << " (" << archive.size() << " tensors)\n";
    return kExitOk;
}

} // namespace

int exit_code_for(const std::exception& e) noexcept
{
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case ErrorKind::Usage:
            return kExitUsage;
        case ErrorKind::Numeric:
            return kExitNumeric;
        default:
            return kExitData;
        }
    }
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr
        || dynamic_cast<const std::out_of_range*>(&e) != nullptr) {
        return kExitUsage;
    }
    return kExitData;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spatially adaptive 4D LUT color transformation toolkit", "salut"};
    app.require_subcommand(1);

    FuseArgs fuse;
    auto* sFuse = app.add_subcommand("fuse", "Blend a basis bank into one 4D LUT");
    sFuse->add_option("--bank", fuse.bank, "Basis bank file")->required();
    sFuse->add_option("--style", fuse.style, "Style image (.ppm); predicts the blend weights");
    sFuse->add_option("--provider", fuse.provider, "Style feature source: builtin or file");
    sFuse->add_option("--features", fuse.features, "Feature pyramid archive for --provider file");
    sFuse->add_option("--wg-weights", fuse.wgWeights, "Weight generator parameters");
    sFuse->add_option("--alpha", fuse.alpha, "Explicit weights: zeros, uniform, or a text file of numbers");
    sFuse->add_option("--config", fuse.config, "Config file");
    sFuse->add_option("-o,--output", fuse.output, "Output .lut4d")->required();

    ContextArgs context;
    auto* sContext = app.add_subcommand("context", "Produce a per-pixel context map");
    sContext->add_option("--content", context.content, "Content image (.ppm)")->required();
    sContext->add_option("--style", context.style, "Style image (.ppm)");
    sContext->add_option("--cg-weights", context.cgWeights, "Context generator parameters");
    sContext->add_option("--fallback", context.fallback, "Use a non-neural map: luminance");
    sContext->add_option("--radius", context.radius, "Blur radius for the luminance fallback");
    sContext->add_option("--config", context.config, "Config file");
    sContext->add_option("-o,--output", context.output, "Output .pgm")->required();

    ApplyArgs apply;
    auto* sApply = app.add_subcommand("apply", "Apply a 4D LUT (.lut4d) or 3D LUT (.cube) to an image");
    sApply->add_option("--lut", apply.lut, "LUT file")->required();
    sApply->add_option("--content", apply.content, "Content image (.ppm)")->required();
    sApply->add_option("--context", apply.context, "Context map (.pgm) or auto:luminance[:radius]");
    sApply->add_option("--threads", apply.threads, "Worker threads (0 = hardware)");
    sApply->add_option("-o,--output", apply.output, "Output .ppm")->required();

    FitArgs fitArgs;
    auto* sFit = app.add_subcommand("fit", "Fit LUT parameters to paired images");
    sFit->add_option("--pairs", fitArgs.pairs, "Directory of <name>_content/_target.ppm (+ _context.pgm)")
        ->required();
    sFit->add_option("--mode", fitArgs.mode, "alpha or lut_entries");
    sFit->add_option("--config", fitArgs.config, "Config file");
    sFit->add_option("--bank", fitArgs.bank, "Basis bank (alpha mode)");
    sFit->add_option("--init", fitArgs.init, "Initial .lut4d (lut_entries) or coefficient file (alpha)");
    sFit->add_option("--steps", fitArgs.steps, "Override the step count");
    sFit->add_option("--seed", fitArgs.seed, "Override the fitting seed");
    sFit->add_option("--lr", fitArgs.lr, "Override the learning rate");
    sFit->add_option("--lambda-rec", fitArgs.lambdaRec, "Override the reconstruction weight");
    sFit->add_option("--lambda-tv", fitArgs.lambdaTv, "Override the smoothness weight");
    sFit->add_option("--lambda-mn", fitArgs.lambdaMn, "Override the monotonicity weight");
    sFit->add_option("--radius", fitArgs.radius, "Luminance radius for pairs without a context map");
    sFit->add_option("--trace", fitArgs.trace, "Loss trace CSV (default: <output>.trace.csv)");
    sFit->add_option("-o,--output", fitArgs.output, "Output .lut4d")->required();

    MetricsArgs met;
    auto* sMetrics = app.add_subcommand("metrics", "Image quality and color diversity metrics");
    sMetrics->add_option("--test", met.test, "Result image or directory");
    sMetrics->add_option("--ref", met.ref, "Reference image or directory (matched by file name)");
    sMetrics->add_option("--style", met.style, "Style image; H-Corr is measured against it when given");
    sMetrics->add_option("--set", met.set, "Directory of images for the Lab Bhattacharyya diversity");
    sMetrics->add_option("--lpips", met.lpips, "Externally computed LPIPS scores (text file)");
    sMetrics->add_flag("--json", met.json, "Print the JSON document");
    sMetrics->add_option("-o,--output", met.output, "Write the JSON document to a file");

    BenchArgs bench;
    auto* sBench = app.add_subcommand("bench", "Time LUT generation and per-frame application");
    sBench->add_option("--width", bench.width, "Frame width");
    sBench->add_option("--height", bench.height, "Frame height");
    sBench->add_option("--threads", bench.threads, "Worker threads (0 = hardware)");
    sBench->add_option("--iters", bench.iters, "Timed application runs");
    sBench->add_option("--lut-iters", bench.lutIters, "Timed LUT generation runs");
    sBench->add_option("--lut", bench.lut, "Apply this .lut4d instead of the generated LUT");
    sBench->add_option("--config", bench.config, "Config file");
    sBench->add_flag("--json", bench.json, "Print JSON instead of text");
    sBench->add_option("-o,--output", bench.output, "Write the JSON report to a file");

    GradcheckArgs gc;
    auto* sGrad = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    sGrad->add_option("--seed", gc.seed, "Seed of the random problem");
    sGrad->add_option("--coords", gc.coords, "Coordinates checked per mode");
    sGrad->add_option("--corrupt", gc.corrupt, "Add this to every analytic component (self-test)");

    MakeIdentityArgs mk;
    auto* sIdentity = app.add_subcommand("make-identity", "Write an identity LUT (.lut4d or .cube)");
    sIdentity->add_option("--size", mk.size, "Lattice size D");
    sIdentity->add_option("--bins", mk.bins, "Context bins C (ignored for .cube)");
    sIdentity->add_option("-o,--output", mk.output, "Output file")->required();

    InitBankArgs ib;
    auto* sBank = app.add_subcommand("init-bank", "Write a seeded bank of smooth residual bases");
    sBank->add_option("--size", ib.size, "Lattice size D");
    sBank->add_option("--bins", ib.bins, "Context bins C");
    sBank->add_option("--count", ib.count, "Number of bases N");
    sBank->add_option("--seed", ib.seed, "Seed");
    sBank->add_option("--scale", ib.scale, "Residual amplitude");
    sBank->add_option("--config", ib.config, "Config file");
    sBank->add_option("-o,--output", ib.output, "Output file")->required();

    InitWeightsArgs iw;
    auto* sWeights = app.add_subcommand("init-weights", "Write seeded network parameters");
    sWeights->add_option("--kind", iw.kind, "wg (weight generator) or cg (context generator)")->required();
    sWeights->add_option("--seed", iw.seed, "Seed");
    sWeights->add_option("--basis-count", iw.basisCount, "Weight generator output size");
    sWeights->add_flag("--zero-final", iw.zeroFinal, "Zero the final layer");
    sWeights->add_option("--config", iw.config, "Config file");
    sWeights->add_option("-o,--output", iw.output, "Output file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sFuse->parsed()) {
            return cmdFuse(fuse, out);
        }
        if (sContext->parsed()) {
            return cmdContext(context, out);
        }
        if (sApply->parsed()) {
            return cmdApply(apply, out);
        }
        if (sFit->parsed()) {
            return cmdFit(fitArgs, out);
        }
        if (sMetrics->parsed()) {
            return cmdMetrics(met, out);
        }
        if (sBench->parsed()) {
            return cmdBench(bench, out);
        }
        if (sGrad->parsed()) {
            return cmdGradcheck(gc, out);
        }
        if (sIdentity->parsed()) {
            return cmdMakeIdentity(mk, out);
        }
        if (sBank->parsed()) {
            return cmdInitBank(ib, out);
        }
        if (sWeights->parsed()) {
            return cmdInitWeights(iw, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    err << app.help();
    return kExitUsage;
}

int run_cli(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, std::cout, std::cerr);
}

} // namespace salut::cli

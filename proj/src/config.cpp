#include "salut/config.hpp"

#include "salut/error.hpp"
#include "salut/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>

namespace salut {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parseNumber(std::string_view key, std::string_view value)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw Error(ErrorKind::Usage, "config key '" + std::string(key) + "' has invalid value '"
                                          + std::string(value) + "'");
    }
    return out;
}

using Setter = std::function<void(Config&, std::string_view key, std::string_view value)>;

template <class T>
Setter number(T Config::*field)
{
    return [field](Config& c, std::string_view k, std::string_view v) { c.*field = parseNumber<T>(k, v); };
}

template <class T>
Setter nested(std::function<T&(Config&)> get)
{
    return [get](Config& c, std::string_view k, std::string_view v) { get(c) = parseNumber<T>(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        t["lut_size"] = number(&Config::lutSize);
        t["context_bins"] = number(&Config::contextBins);
        t["seed"] = number(&Config::seed);
        t["basis_count"] = nested<std::uint32_t>([](Config& c) -> auto& { return c.weightGenerator.basisCount; });
        t["wg_reduce_channels"] =
            nested<std::uint32_t>([](Config& c) -> auto& { return c.weightGenerator.reduceChannels; });
        t["wg_hidden"] = nested<std::uint32_t>([](Config& c) -> auto& { return c.weightGenerator.hidden; });
        for (std::size_t d = 0; d < 4; ++d) {
            t["feature_channels_" + std::to_string(d)] =
                nested<std::uint32_t>([d](Config& c) -> auto& { return c.weightGenerator.levelChannels[d]; });
        }
        t["cg_width1"] = nested<std::uint32_t>([](Config& c) -> auto& { return c.contextGenerator.encoderWidth1; });
        t["cg_width2"] = nested<std::uint32_t>([](Config& c) -> auto& { return c.contextGenerator.encoderWidth2; });
        t["cg_residual_blocks"] =
            nested<std::uint32_t>([](Config& c) -> auto& { return c.contextGenerator.residualBlocks; });
        t["cg_attention_dim"] =
            nested<std::uint32_t>([](Config& c) -> auto& { return c.contextGenerator.attentionDim; });
        t["lambda_rec"] = nested<double>([](Config& c) -> auto& { return c.fit.lambdaRec; });
        t["lambda_tv"] = nested<double>([](Config& c) -> auto& { return c.fit.lambdaTv; });
        t["lambda_mn"] = nested<double>([](Config& c) -> auto& { return c.fit.lambdaMn; });
        t["steps"] = nested<std::size_t>([](Config& c) -> auto& { return c.fit.steps; });
        t["learning_rate"] = nested<double>([](Config& c) -> auto& { return c.fit.learningRate; });
        t["adam_beta1"] = nested<double>([](Config& c) -> auto& { return c.fit.beta1; });
        t["adam_beta2"] = nested<double>([](Config& c) -> auto& { return c.fit.beta2; });
        t["adam_eps"] = nested<double>([](Config& c) -> auto& { return c.fit.adamEps; });
        t["fit_seed"] = nested<std::uint64_t>([](Config& c) -> auto& { return c.fit.seed; });
        t["batch_pixels"] = nested<std::size_t>([](Config& c) -> auto& { return c.fit.batchPixels; });
        t["mode"] = [](Config& c, std::string_view k, std::string_view v) {
            if (v == "alpha") {
                c.fit.mode = fit::Mode::Alpha;
            } else if (v == "lut_entries") {
                c.fit.mode = fit::Mode::LutEntries;
            } else {
                throw Error(ErrorKind::Usage, "config key '" + std::string(k) + "' must be alpha or lut_entries");
            }
        };
        return t;
    }();
    return table;
}

} // namespace

Config config_preset(std::string_view name)
{
    if (name == "paper-default") {
        return Config{};
    }
    throw Error(ErrorKind::Usage, "unknown config preset '" + std::string(name) + "'");
}

Config parse_config(std::string_view text)
{
    Config cfg;
    bool sawKey = false;
    std::size_t lineNo = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::Usage, "config line " + std::to_string(lineNo) + " is not key=value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key == "preset") {
            if (sawKey) {
                throw Error(ErrorKind::Usage, "config 'preset' must precede every other key");
            }
            cfg = config_preset(value);
        } else {
            const auto it = setters().find(key);
            if (it == setters().end()) {
                throw Error(ErrorKind::Usage, "unknown config key '" + std::string(key) + "' on line "
                                                  + std::to_string(lineNo));
            }
            it->second(cfg, key, value);
        }
        sawKey = true;
    }
    (void)Lut4D(cfg.lutSize, cfg.contextBins);
    cfg.fit.validate();
    return cfg;
}

Config load_config(const std::filesystem::path& path)
{
    const io::Bytes raw = io::read_file(path);
    return parse_config(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

std::string config_to_text(const Config& cfg)
{
    std::string out;
    auto put = [&out](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
    auto num = [](double v) {
        char buf[64];
        for (int precision = 15; precision <= 17; ++precision) {
            std::snprintf(buf, sizeof buf, "%.*g", precision, v);
            if (std::strtod(buf, nullptr) == v) {
                break;
            }
        }
        return std::string(buf);
    };
    put("lut_size", std::to_string(cfg.lutSize));
    put("context_bins", std::to_string(cfg.contextBins));
    put("basis_count", std::to_string(cfg.weightGenerator.basisCount));
    put("seed", std::to_string(cfg.seed));
    for (std::size_t d = 0; d < 4; ++d) {
        out += "feature_channels_" + std::to_string(d) + " = " + std::to_string(cfg.weightGenerator.levelChannels[d])
               + "\n";
    }
    put("wg_reduce_channels", std::to_string(cfg.weightGenerator.reduceChannels));
    put("wg_hidden", std::to_string(cfg.weightGenerator.hidden));
    put("cg_width1", std::to_string(cfg.contextGenerator.encoderWidth1));
    put("cg_width2", std::to_string(cfg.contextGenerator.encoderWidth2));
    put("cg_residual_blocks", std::to_string(cfg.contextGenerator.residualBlocks));
    put("cg_attention_dim", std::to_string(cfg.contextGenerator.attentionDim));
    put("mode", cfg.fit.mode == fit::Mode::Alpha ? "alpha" : "lut_entries");
    put("lambda_rec", num(cfg.fit.lambdaRec));
    put("lambda_tv", num(cfg.fit.lambdaTv));
    put("lambda_mn", num(cfg.fit.lambdaMn));
    put("steps", std::to_string(cfg.fit.steps));
    put("learning_rate", num(cfg.fit.learningRate));
    put("adam_beta1", num(cfg.fit.beta1));
    put("adam_beta2", num(cfg.fit.beta2));
    put("adam_eps", num(cfg.fit.adamEps));
    put("fit_seed", std::to_string(cfg.fit.seed));
    put("batch_pixels", std::to_string(cfg.fit.batchPixels));
    return out;
}

} // namespace salut

#pragma once

#include "salut/context.hpp"
#include "salut/fitting.hpp"
#include "salut/style.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace salut {

/// Architecture sizes and training defaults, loadable from a key=value file.
/// See docs/config.md for the key list.
struct Config {
    std::size_t lutSize = 17;
    std::size_t contextBins = 2;
    WeightGeneratorShape weightGenerator;
    ContextGeneratorShape contextGenerator;
    fit::FitConfig fit;
    std::uint64_t seed = 7;
};

/// Named presets; currently only "paper-default".
Config config_preset(std::string_view name);

/// Parses key=value lines; '#' starts a comment. A "preset" key, if present,
/// must come first and seeds every other value.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

std::string config_to_text(const Config& cfg);

} // namespace salut

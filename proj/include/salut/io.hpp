#pragma once

#include "salut/image.hpp"
#include "salut/lut.hpp"
#include "salut/nn.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Readers and writers for the on-disk formats.
///
/// Every parse_* function works on an in-memory buffer and reports problems as
/// FormatError with the byte offset where parsing stopped; read_* / write_*
/// wrap them with file access (ErrorKind::Io on failure).
///
///   PPM  binary P6; reads maxval up to 65535 (16-bit samples big-endian),
///        writes maxval 255.
///   PGM  context maps as binary P5, maxval 65535, big-endian samples.
///   CUBE text 3D LUT, red index fastest, 6-decimal data rows.
///   LUT4D little-endian: "SALUT4D\0", u32 version=1, u32 D, u32 C,
///        u32 channels=3, then 3*C*D^3 binary32 values with channel slowest,
///        then context, r, g, b fastest.
///   Weights little-endian: "SALUTWT\0", u32 version=1, u32 count, then per
///        tensor u32 name length, UTF-8 name, u32 rank, u32 dims[rank],
///        binary32 data.
///   Bank  a weights archive holding one tensor "bases" of shape
///        [N, 3, C, D, D, D].
namespace salut::io {

using Bytes = std::vector<std::byte>;

inline constexpr std::uint32_t kLut4dVersion = 1;
inline constexpr std::uint32_t kWeightsVersion = 1;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> data);

ImageBuffer parse_ppm(std::span<const std::byte> data);
Bytes encode_ppm(const ImageBuffer& image);
ImageBuffer read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageBuffer& image);

ContextMap parse_ctx(std::span<const std::byte> data);
Bytes encode_ctx(const ContextMap& ctx);
ContextMap read_ctx(const std::filesystem::path& path);
void write_ctx(const std::filesystem::path& path, const ContextMap& ctx);

Lut3D parse_cube(std::string_view text);
std::string encode_cube(const Lut3D& lut);
Lut3D read_cube(const std::filesystem::path& path);
void write_cube(const std::filesystem::path& path, const Lut3D& lut);

Lut4D parse_lut4d(std::span<const std::byte> data);
Bytes encode_lut4d(const Lut4D& lut);
Lut4D read_lut4d(const std::filesystem::path& path);
void write_lut4d(const std::filesystem::path& path, const Lut4D& lut);

nn::WeightArchive parse_weights(std::span<const std::byte> data);
Bytes encode_weights(const nn::WeightArchive& archive);
nn::WeightArchive read_weights(const std::filesystem::path& path);
void write_weights(const std::filesystem::path& path, const nn::WeightArchive& archive);

nn::WeightArchive bank_to_archive(const BasisLutBank& bank);
BasisLutBank bank_from_archive(const nn::WeightArchive& archive);
BasisLutBank read_bank(const std::filesystem::path& path);
void write_bank(const std::filesystem::path& path, const BasisLutBank& bank);

} // namespace salut::io

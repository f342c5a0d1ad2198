#pragma once

#include <filesystem>
#include <iosfwd>

#include "fbmdim/fbm.hpp"

namespace fbmdim {

/// Binary path cache, little-endian throughout:
///   "MFBM" | u16 version | f64 H | u32 N | u32 r | u64 seed | u8 generator | u64 count | f64 samples[count]
inline constexpr std::uint16_t kPathCacheVersion = 1;

void write_path(std::ostream& out, const FbmPath& path);
FbmPath read_path(std::istream& in);

void save_path(const std::filesystem::path& file, const FbmPath& path);
/// Throws FormatError on bad magic, unknown version, truncation, trailing
/// bytes or a header that disagrees with the sample count.
FbmPath load_path(const std::filesystem::path& file);

} // namespace fbmdim

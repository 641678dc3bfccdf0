#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forgery {

enum class Split { train, val, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path path;
  int label = 0;  // 0 real, 1 fake
  Split split = Split::train;
  std::string source;

  bool operator==(const ManifestEntry&) const = default;
};

/// First line of every manifest file.
inline constexpr std::string_view kManifestSchema = "forgery-manifest";
inline constexpr int kManifestVersion = 1;

/// Line-delimited JSON: a header `{"schema": "forgery-manifest", "version": 1}` followed by
/// one entry per line. Relative paths resolve against the manifest's directory.
/// Throws ParseError (with line number) on malformed lines, bad labels or splits, and
/// duplicate video ids.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                                          const std::string& source);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

std::vector<ManifestEntry> filter_split(std::span<const ManifestEntry> entries, Split split);

/// Randomly down-samples the majority class (without replacement, seeded) to the minority
/// count; minority entries are kept untouched. Output preserves input order. With
/// per_source, balancing happens independently inside each source. Throws
/// std::invalid_argument when a class is missing.
std::vector<ManifestEntry> balance_downsample(std::span<const ManifestEntry> entries, std::uint64_t seed,
                                              bool per_source = false);

}  // namespace forgery

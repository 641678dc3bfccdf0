#include "forgery/data_manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "forgery/errors.hpp"
#include "forgery/rng.hpp"

namespace forgery {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  throw std::invalid_argument("unknown split");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                                          const std::string& source) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError(source + ": invalid JSON", lineno);
    }
    if (!header_seen) {
      if (!j.is_object() || j.value("schema", "") != kManifestSchema)
        throw ParseError(source + ": missing manifest header", lineno);
      if (j.value("version", 0) != kManifestVersion)
        throw ParseError(source + ": unsupported manifest version", lineno);
      header_seen = true;
      continue;
    }
    ManifestEntry e;
    try {
      e.video_id = j.at("video_id").get<std::string>();
      e.path = j.at("path").get<std::string>();
      e.label = j.at("label").get<int>();
      e.split = parse_split(j.at("split").get<std::string>());
      e.source = j.value("source", "");
    } catch (const json::exception& ex) {
      throw ParseError(source + ": " + ex.what(), lineno);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(source + ": " + ex.what(), lineno);
    }
    if (e.video_id.empty()) throw ParseError(source + ": empty video_id", lineno);
    if (e.label != 0 && e.label != 1) throw ParseError(source + ": label must be 0 or 1", lineno);
    if (!ids.insert(e.video_id).second) throw ParseError(source + ": duplicate video_id " + e.video_id, lineno);
    if (e.path.is_relative()) e.path = base_dir / e.path;
    entries.push_back(std::move(e));
  }
  if (!header_seen) throw ParseError(source + ": empty manifest", 0);
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  return parse_manifest(in, path.parent_path(), path.string());
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << json{{"schema", kManifestSchema}, {"version", kManifestVersion}}.dump() << '\n';
  const auto base = path.parent_path();
  for (const auto& e : entries) {
    std::filesystem::path p = e.path;
    // Paths under the manifest's directory are stored relative so corpora can move.
    if (p.is_absolute() && !base.empty()) {
      const auto rel = p.lexically_relative(std::filesystem::absolute(base));
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    } else if (!base.empty()) {
      const auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    json row = {{"video_id", e.video_id},
                {"path", p.generic_string()},
                {"label", e.label},
                {"split", to_string(e.split)},
                {"source", e.source}};
    out << row.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ManifestEntry> filter_split(std::span<const ManifestEntry> entries, Split split) {
  std::vector<ManifestEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [split](const ManifestEntry& e) { return e.split == split; });
  return out;
}

namespace {

// Indices (into `group`) kept after balancing one group.
std::vector<std::size_t> balance_group(std::span<const ManifestEntry> entries, const std::vector<std::size_t>& group,
                                       Rng& rng) {
  std::vector<std::size_t> real, fake;
  for (std::size_t i : group) (entries[i].label == 1 ? fake : real).push_back(i);
  if (real.empty() || fake.empty()) throw std::invalid_argument("balance_downsample needs both classes present");
  std::vector<std::size_t>& majority = real.size() > fake.size() ? real : fake;
  const std::vector<std::size_t>& minority = real.size() > fake.size() ? fake : real;
  std::vector<std::size_t> kept = minority;
  if (majority.size() == minority.size()) {
    kept.insert(kept.end(), majority.begin(), majority.end());
  } else {
    std::vector<std::size_t> pool = majority;
    std::shuffle(pool.begin(), pool.end(), rng.engine());
    kept.insert(kept.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(minority.size()));
  }
  return kept;
}

}  // namespace

std::vector<ManifestEntry> balance_downsample(std::span<const ManifestEntry> entries, std::uint64_t seed,
                                              bool per_source) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < entries.size(); ++i) groups[per_source ? entries[i].source : std::string()].push_back(i);
  if (groups.empty()) throw std::invalid_argument("balance_downsample needs both classes present");

  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (const auto& [source, group] : groups) {
    auto part = balance_group(entries, group, rng);
    kept.insert(kept.end(), part.begin(), part.end());
  }
  std::sort(kept.begin(), kept.end());
  std::vector<ManifestEntry> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(entries[i]);
  return out;
}

}  // namespace forgery

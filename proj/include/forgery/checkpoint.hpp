#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forgery/nn.hpp"

namespace forgery {

/// Versioned binary container: string metadata, a manifest of array names and shapes,
/// then the float64 payload (little-endian) in manifest order.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::map<std::string, std::string> metadata;
  nn::ParameterSet arrays;

  bool operator==(const Checkpoint&) const = default;

  /// Copies every array of `params` under `prefix`.
  void add_arrays(const nn::ParameterSet& params, const std::string& prefix);
  /// Arrays whose name starts with `prefix`, with the prefix stripped.
  nn::ParameterSet arrays_with_prefix(const std::string& prefix) const;
  /// Throws std::runtime_error naming the key when absent.
  const std::string& meta(const std::string& key) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
/// Throws ParseError on a bad magic, unsupported version, or truncated payload.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace forgery

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dynlap/mesh.hpp"

namespace dynlap {

/// Incrementally built cache key; the digest is SHA-256 of the canonical bytes.
class CacheKey {
 public:
  CacheKey& add(const std::string& s);
  CacheKey& add(double v);
  CacheKey& add(std::int64_t v);
  CacheKey& add(std::span<const double> v);
  CacheKey& add(std::span<const Point2> points);

  /// 64 hex characters.
  std::string digest() const;

 private:
  std::string bytes_;
};

/// Directory of binary payloads (vectors of doubles) keyed by CacheKey digests.
/// Writes go through a temporary file and an atomic rename, so concurrent
/// readers never see partial files.
class Cache {
 public:
  /// `dir` empty selects $DYNLAP_CACHE_DIR, then $XDG_CACHE_HOME/dynlap, then ~/.cache/dynlap.
  explicit Cache(std::filesystem::path dir = {}, bool enabled = true);

  const std::filesystem::path& dir() const { return dir_; }
  bool enabled() const { return enabled_; }

  /// Cached payload for the key, or producer() stored under it.  A corrupt
  /// entry is reported on stderr, recomputed and overwritten.
  std::vector<double> get_or_compute(const CacheKey& key,
                                     const std::function<std::vector<double>()>& producer);

  /// Entry count and total bytes.
  std::pair<std::size_t, std::uintmax_t> stats() const;
  /// Removes all entries; returns the number removed.
  std::size_t clear();

  static std::filesystem::path default_dir();

 private:
  std::filesystem::path path_for(const std::string& digest) const;
  bool read(const std::filesystem::path& p, std::vector<double>& out) const;
  void write(const std::filesystem::path& p, const std::vector<double>& data) const;

  std::filesystem::path dir_;
  bool enabled_;
};

}  // namespace dynlap

#include "dynlap/cache.hpp"

#include <openssl/sha.h>

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

namespace dynlap {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'D', 'L', 'P', 'C', 'A', 'C', 'H', '1'};
constexpr const char* kSuffix = ".bin";

std::string to_hex(const unsigned char* data, size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s(2 * n, '0');
  for (size_t i = 0; i < n; ++i) {
    s[2 * i] = digits[data[i] >> 4];
    s[2 * i + 1] = digits[data[i] & 15];
  }
  return s;
}

std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256(const void* data, size_t n) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> out{};
  SHA256(static_cast<const unsigned char*>(data), n, out.data());
  return out;
}

template <typename T>
void append_raw(std::string& bytes, const T& v) {
  bytes.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

CacheKey& CacheKey::add(const std::string& s) {
  append_raw(bytes_, static_cast<std::uint64_t>(s.size()));
  bytes_ += s;
  return *this;
}

CacheKey& CacheKey::add(double v) {
  bytes_ += 'd';
  append_raw(bytes_, v);
  return *this;
}

CacheKey& CacheKey::add(std::int64_t v) {
  bytes_ += 'i';
  append_raw(bytes_, v);
  return *this;
}

CacheKey& CacheKey::add(std::span<const double> v) {
  bytes_ += 'v';
  append_raw(bytes_, static_cast<std::uint64_t>(v.size()));
  bytes_.append(reinterpret_cast<const char*>(v.data()), v.size_bytes());
  return *this;
}

CacheKey& CacheKey::add(std::span<const Point2> points) {
  bytes_ += 'p';
  append_raw(bytes_, static_cast<std::uint64_t>(points.size()));
  for (const auto& p : points) {
    append_raw(bytes_, p.x());
    append_raw(bytes_, p.y());
  }
  return *this;
}

std::string CacheKey::digest() const {
  const auto d = sha256(bytes_.data(), bytes_.size());
  return to_hex(d.data(), d.size());
}

fs::path Cache::default_dir() {
  if (const char* env = std::getenv("DYNLAP_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "dynlap";
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "dynlap";
  return fs::temp_directory_path() / "dynlap-cache";
}

Cache::Cache(fs::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
  if (dir_.empty()) dir_ = default_dir();
}

fs::path Cache::path_for(const std::string& digest) const { return dir_ / (digest + kSuffix); }

bool Cache::read(const fs::path& p, std::vector<double>& out) const {
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  char magic[8];
  std::uint64_t count = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return false;
  if (!in.read(reinterpret_cast<char*>(&count), sizeof(count))) return false;
  const auto size = fs::file_size(p);
  if (size != 8 + sizeof(count) + count * sizeof(double) + SHA256_DIGEST_LENGTH) return false;
  out.resize(count);
  std::array<unsigned char, SHA256_DIGEST_LENGTH> stored{};
  if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double))))
    return false;
  if (!in.read(reinterpret_cast<char*>(stored.data()), stored.size())) return false;
  return sha256(out.data(), count * sizeof(double)) == stored;
}

void Cache::write(const fs::path& p, const std::vector<double>& data) const {
  fs::create_directories(dir_);
  static std::atomic<unsigned> counter{0};
  const auto tid = std::hash<std::thread::id>()(std::this_thread::get_id());
  const fs::path tmp = p.string() + ".tmp" + std::to_string(tid) + "." +
                       std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const std::uint64_t count = data.size();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    const auto digest = sha256(data.data(), count * sizeof(double));
    out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      std::cerr << "warning: could not write cache entry " << p << "\n";
      return;
    }
  }
  fs::rename(tmp, p);
}

std::vector<double> Cache::get_or_compute(const CacheKey& key,
                                          const std::function<std::vector<double>()>& producer) {
  if (!enabled_) return producer();
  const fs::path p = path_for(key.digest());
  std::error_code ec;
  if (fs::exists(p, ec)) {
    std::vector<double> out;
    if (read(p, out)) return out;
    std::cerr << "warning: corrupt cache entry " << p << "; recomputing\n";
  }
  std::vector<double> data = producer();
  try {
    write(p, data);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "warning: cache write failed: " << e.what() << "\n";
  }
  return data;
}

std::pair<std::size_t, std::uintmax_t> Cache::stats() const {
  std::size_t n = 0;
  std::uintmax_t bytes = 0;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return {0, 0};
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.is_regular_file() && e.path().extension() == kSuffix) {
      ++n;
      bytes += e.file_size();
    }
  }
  return {n, bytes};
}

std::size_t Cache::clear() {
  std::size_t n = 0;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return 0;
  std::vector<fs::path> victims;
  for (const auto& e : fs::directory_iterator(dir_)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() &&
        (e.path().extension() == kSuffix || name.find(".bin.tmp") != std::string::npos))
      victims.push_back(e.path());
  }
  for (const auto& p : victims)
    if (fs::remove(p, ec)) ++n;
  return n;
}

}  // namespace dynlap

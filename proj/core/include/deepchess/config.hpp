#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "deepchess/training.hpp"

namespace deepchess {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` settings. Blank lines and text after '#' are ignored; later keys override earlier ones.
class Config {
 public:
  static Config parse(std::istream& in, std::string_view source = "config");
  static Config load(const std::filesystem::path& path);

  /// Adds or overrides a value, as from a command-line `key=value` pair.
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Keys never read through a getter, to flag typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Reads `<prefix>initial_lr`, `lr_decay`, `epochs`, `pairs_per_epoch`, `minibatch` and `seed` over `base`.
nn::TrainConfig read_train_config(const Config& cfg, const std::string& prefix, nn::TrainConfig base);

}  // namespace deepchess

#include "deepchess/config.hpp"

#include <charconv>
#include <fstream>

namespace deepchess {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

}  // namespace

Config Config::parse(std::istream& in, std::string_view source) {
  Config cfg;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(std::string_view(body).substr(0, eq));
    if (key.empty())
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_)
    if (!used_.contains(key)) out.push_back(key);
  return out;
}

nn::TrainConfig read_train_config(const Config& cfg, const std::string& prefix, nn::TrainConfig base) {
  base.initial_lr = cfg.get_double(prefix + "initial_lr", base.initial_lr);
  base.lr_decay_per_epoch = cfg.get_double(prefix + "lr_decay", base.lr_decay_per_epoch);
  base.epochs = cfg.get_uint(prefix + "epochs", base.epochs);
  base.pairs_per_epoch = cfg.get_uint(prefix + "pairs_per_epoch", base.pairs_per_epoch);
  base.minibatch = cfg.get_uint(prefix + "minibatch", base.minibatch);
  base.seed = cfg.get_uint(prefix + "seed", base.seed);
  base.validate();
  return base;
}

}  // namespace deepchess

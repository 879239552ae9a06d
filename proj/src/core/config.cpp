#include "tollcast/core/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

namespace tollcast {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("config key '{}': bad number '{}'", key, text));
  }
  return value;
}

DayMask parse_days(const std::string& text) {
  if (text == "weekdays") return kWeekdays;
  if (text == "all") return kAllDays;
  throw std::invalid_argument(fmt::format("tolling.days must be weekdays or all, got '{}'", text));
}

TollingWindow parse_window(Direction dir, const std::string& text, DayMask days) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    throw std::invalid_argument(fmt::format("tolling window '{}' must be HH:MM-HH:MM", text));
  }
  return TollingWindow{dir, ClockTime::parse(trim(text.substr(0, dash))),
                       ClockTime::parse(trim(text.substr(dash + 1))), days};
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(fmt::format("config line {}: expected key = value", lineno));
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw std::invalid_argument(fmt::format("config line {}: empty key", lineno));
    cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse(in);
}

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto v = raw(key);
  return v ? parse_number<std::int64_t>(key, *v) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = raw(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = raw(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::invalid_argument(fmt::format("config key '{}': bad boolean '{}'", key, *v));
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void StudyConfig::validate() const {
  validate_windows(windows);
  if (std::none_of(windows.begin(), windows.end(),
                   [&](const TollingWindow& w) { return w.direction == direction(); })) {
    throw std::invalid_argument(
        fmt::format("no tolling window for study direction {}", to_string(direction())));
  }
  if (impute_max_gap < 0) throw std::invalid_argument("impute_max_gap must be >= 0");
  if (forest.n_trees < 1) throw std::invalid_argument("rf.n_trees must be >= 1");
  if (forest.min_leaf_size < 1) throw std::invalid_argument("rf.min_leaf must be >= 1");
  if (forest.max_depth < 0) throw std::invalid_argument("rf.max_depth must be >= 0");
  for (int w : mlp.hidden) {
    if (w < 1) throw std::invalid_argument("mlp.hidden widths must be >= 1");
  }
  for (int w : lstm.dense) {
    if (w < 1) throw std::invalid_argument("lstm.dense widths must be >= 1");
  }
  if (lstm.lookback < 1) throw std::invalid_argument("lstm.lookback must be >= 1");
  if (lstm.hidden < 1) throw std::invalid_argument("lstm.hidden must be >= 1");
  if (mlp.batch_size < 2 || lstm.batch_size < 1) {
    throw std::invalid_argument("batch sizes too small (mlp needs >= 2 for batch norm)");
  }
}

StudyConfig study_config_from(const KeyValueConfig& kv, RouteSet routes) {
  const Date start = Date::parse(kv.get_string("start_date", "2019-01-01"));
  const int days = static_cast<int>(kv.get_int("days", 90));

  StudyConfig cfg{TimeGrid::for_days(start, days), std::move(routes)};

  const DayMask mask = parse_days(kv.get_string("tolling.days", "weekdays"));
  cfg.windows = {parse_window(Direction::EB, kv.get_string("tolling.eb", "05:30-09:30"), mask),
                 parse_window(Direction::WB, kv.get_string("tolling.wb", "15:00-19:00"), mask)};
  if (kv.has("direction") && parse_direction(*kv.raw("direction")) != cfg.direction()) {
    throw std::invalid_argument("config direction differs from the toll route's direction");
  }
  cfg.target_kind = parse_target_kind(kv.get_string("target", "toll"));
  cfg.toll_entry = kv.get_string("toll_entry", "");
  cfg.toll_exit = kv.get_string("toll_exit", "");
  cfg.volume_station = kv.get_string("volume_station", "");
  cfg.calendar_features = kv.get_bool("calendar_features", true);
  cfg.impute_max_gap = static_cast<int>(kv.get_int("impute_max_gap", 2));
  cfg.seed = kv.get_u64("seed", cfg.seed);

  auto& f = cfg.forest;
  f.n_trees = static_cast<int>(kv.get_int("rf.n_trees", f.n_trees));
  f.max_depth = static_cast<int>(kv.get_int("rf.max_depth", f.max_depth));
  f.min_leaf_size = static_cast<int>(kv.get_int("rf.min_leaf", f.min_leaf_size));
  f.features_per_split = static_cast<int>(kv.get_int("rf.mtry", f.features_per_split));
  f.threads = static_cast<int>(kv.get_int("rf.threads", f.threads));

  auto read_adam = [&](const std::string& prefix, AdamSettings& a) {
    a.learning_rate = kv.get_double(prefix + ".lr", a.learning_rate);
    a.beta1 = kv.get_double(prefix + ".beta1", a.beta1);
    a.beta2 = kv.get_double(prefix + ".beta2", a.beta2);
    a.epsilon = kv.get_double(prefix + ".eps", a.epsilon);
  };

  auto& m = cfg.mlp;
  auto hidden = kv.get_int_list("mlp.hidden", {m.hidden.begin(), m.hidden.end()});
  if (hidden.size() != 4) throw std::invalid_argument("mlp.hidden needs exactly 4 widths");
  std::copy(hidden.begin(), hidden.end(), m.hidden.begin());
  m.l2 = kv.get_double("mlp.lambda", m.l2);
  m.batch_size = static_cast<int>(kv.get_int("mlp.batch", m.batch_size));
  m.max_epochs = static_cast<int>(kv.get_int("mlp.epochs", m.max_epochs));
  m.patience = static_cast<int>(kv.get_int("mlp.patience", m.patience));
  read_adam("mlp", m.adam);

  auto& l = cfg.lstm;
  l.lookback = static_cast<int>(kv.get_int("lstm.lookback", l.lookback));
  l.hidden = static_cast<int>(kv.get_int("lstm.hidden", l.hidden));
  auto dense = kv.get_int_list("lstm.dense", {l.dense.begin(), l.dense.end()});
  if (dense.size() != 3) throw std::invalid_argument("lstm.dense needs exactly 3 widths");
  std::copy(dense.begin(), dense.end(), l.dense.begin());
  l.l2 = kv.get_double("lstm.lambda", l.l2);
  l.batch_size = static_cast<int>(kv.get_int("lstm.batch", l.batch_size));
  l.max_epochs = static_cast<int>(kv.get_int("lstm.epochs", l.max_epochs));
  l.patience = static_cast<int>(kv.get_int("lstm.patience", l.patience));
  read_adam("lstm", l.adam);

  cfg.validate();
  return cfg;
}

}  // namespace tollcast

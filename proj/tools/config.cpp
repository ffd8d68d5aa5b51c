#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cflab/error.hpp"

namespace cflab::cli {

namespace {

const std::map<std::string, std::set<std::string>>& registry() {
  static const std::map<std::string, std::set<std::string>> r{
      {"run", {"protocol", "seed"}},
      {"oracle", {"kind", "cycles", "theta", "absorption"}},
      {"constants", {"k_prime", "k1", "k2", "c", "b_lf"}},
      {"threebox", {"epsilons"}},
      {"clf", {"wiring", "postselect_routing", "encoding_a", "encoding_b", "robustness_epsilons"}},
      {"lg", {"theta"}},
      {"pm", {"state", "samples"}},
      {"lf", {"coeffs", "correlators", "state", "alice", "bob", "epsilon", "delta"}},
      {"certify", {"target", "mode", "system_samples", "kraus", "dephasing", "v_dec", "v_0", "compose",
                   "random_starts"}},
      {"zeno", {"n_values", "loss", "absorption"}},
      {"sweep", {"protocol", "parameter", "values", "start", "stop", "step", "points"}},
  };
  return r;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& origin, int line) {
  return line > 0 ? origin + ":" + std::to_string(line) : origin;
}

}  // namespace

void Config::insert(const std::string& section, const std::string& key, Entry e) {
  const auto sec = registry().find(section);
  if (sec == registry().end()) {
    throw Error(ErrorKind::ConfigError, where(origin_, e.line) + ": unknown section [" + section + "]");
  }
  if (!sec->second.count(key)) {
    throw Error(ErrorKind::ConfigError,
                where(origin_, e.line) + ": unknown key '" + key + "' in section [" + section + "]");
  }
  auto& keys = sections_[section];
  if (keys.count(key) && e.line > 0) {
    throw Error(ErrorKind::ConfigError, where(origin_, e.line) + ": duplicate key '" + key + "' (first set on line " +
                                            std::to_string(keys[key].line) + ")");
  }
  keys[key] = std::move(e);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error(ErrorKind::ConfigError, where(origin, line) + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!registry().count(section)) {
        throw Error(ErrorKind::ConfigError, where(origin, line) + ": unknown section [" + section + "]");
      }
      cfg.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, where(origin, line) + ": expected 'key = value'");
    if (section.empty()) throw Error(ErrorKind::ConfigError, where(origin, line) + ": key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // Trailing comments need whitespace before the marker so '#' may appear
    // inside string values.
    for (const char* marker : {" #", " ;", "\t#", "\t;"}) {
      const auto pos = value.find(marker);
      if (pos != std::string::npos) value = trim(value.substr(0, pos));
    }
    if (key.empty()) throw Error(ErrorKind::ConfigError, where(origin, line) + ": empty key");
    cfg.insert(section, key, {value, line});
  }
  return cfg;
}

Config Config::from_json(const nlohmann::json& echo, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  if (!echo.is_object()) throw Error(ErrorKind::ConfigError, origin + ": config echo must be an object");
  for (const auto& [section, keys] : echo.items()) {
    if (!keys.is_object()) throw Error(ErrorKind::ConfigError, origin + ": section '" + section + "' must be an object");
    cfg.sections_[section];
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) throw Error(ErrorKind::ConfigError, origin + ": " + section + "." + key + " must be a string");
      cfg.insert(section, key, {value.get<std::string>(), 0});
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ConfigError, path + ": invalid JSON: " + e.what());
    }
    if (!doc.contains("config")) throw Error(ErrorKind::ConfigError, path + ": report has no config echo");
    return from_json(doc["config"], path);
  }
  return parse(text, path);
}

bool Config::has(const std::string& section, const std::string& key) const { return entry(section, key).has_value(); }

std::optional<Entry> Config::entry(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& message) const {
  const auto e = entry(section, key);
  throw Error(ErrorKind::ConfigError,
              where(origin_, e ? e->line : 0) + ": " + section + "." + key + ": " + message);
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const auto e = entry(section, key);
  return e ? e->value : fallback;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto e = entry(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, v)) fail(section, key, "expected a number, got '" + e->value + "'");
  return v;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const auto e = entry(section, key);
  if (!e) return fallback;
  int v = 0;
  const auto* b = e->value.data();
  const auto [ptr, ec] = std::from_chars(b, b + e->value.size(), v);
  if (ec != std::errc() || ptr != b + e->value.size()) fail(section, key, "expected an integer, got '" + e->value + "'");
  return v;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const auto e = entry(section, key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const auto* b = e->value.data();
  const auto [ptr, ec] = std::from_chars(b, b + e->value.size(), v);
  if (ec != std::errc() || ptr != b + e->value.size()) {
    fail(section, key, "expected an unsigned 64-bit integer, got '" + e->value + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto e = entry(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(section, key, "expected true or false, got '" + e->value + "'");
}

nlohmann::json Config::get_json(const std::string& section, const std::string& key) const {
  const auto e = entry(section, key);
  if (!e) fail(section, key, "missing");
  try {
    return nlohmann::json::parse(e->value);
  } catch (const nlohmann::json::parse_error&) {
    fail(section, key, "expected a JSON literal, got '" + e->value + "'");
  }
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  const auto j = get_json(section, key);
  if (!j.is_array()) fail(section, key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) fail(section, key, "expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  const auto j = get_json(section, key);
  if (!j.is_array()) fail(section, key, "expected a list of integers");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) fail(section, key, "expected a list of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  auto& keys = sections_[section];
  keys[key] = {value, 0};
}

nlohmann::json Config::echo() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [section, keys] : sections_) {
    auto& obj = out[section];
    obj = nlohmann::json::object();
    for (const auto& [key, e] : keys) obj[key] = e.value;
  }
  return out;
}

qcore::Matrix parse_matrix(const nlohmann::json& literal) {
  if (!literal.is_array() || literal.empty()) {
    throw Error(ErrorKind::ConfigError, "matrix literal must be a nonempty list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(literal.size());
  Eigen::Index cols = -1;
  qcore::Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = literal[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw Error(ErrorKind::ConfigError, "matrix row must be a list");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorKind::ConfigError, "ragged matrix literal");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& x = row[static_cast<std::size_t>(j)];
      if (x.is_number()) {
        m(i, j) = x.get<double>();
      } else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
        m(i, j) = qcore::Complex(x[0].get<double>(), x[1].get<double>());
      } else {
        throw Error(ErrorKind::ConfigError, "matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

}  // namespace cflab::cli

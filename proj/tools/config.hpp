#pragma once

// Sectioned key = value configuration with line-numbered diagnostics.
//
// Every section and key must appear in the registry below; anything else is
// rejected. A report JSON is also accepted as input: its "config" object is
// read back as the same sections.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cflab/qcore.hpp"

namespace cflab::cli {

struct Entry {
  std::string value;
  int line = 0;  // 0 when loaded from JSON
};

class Config {
 public:
  // ConfigError on I/O failure, syntax errors, unknown sections or keys.
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config from_json(const nlohmann::json& echo, const std::string& origin = "<config>");

  bool has(const std::string& section, const std::string& key) const;
  std::optional<Entry> entry(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key,
                            const std::vector<int>& fallback) const;
  nlohmann::json get_json(const std::string& section, const std::string& key) const;

  // Stores or replaces a value (used for --seed); marks it as coming from the
  // command line.
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Raw values as section -> key -> string, sorted.
  nlohmann::json echo() const;
  const std::string& origin() const noexcept { return origin_; }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const;

 private:
  void insert(const std::string& section, const std::string& key, Entry e);

  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

// A complex matrix literal: a JSON list of rows whose entries are [re, im]
// pairs or plain reals.
qcore::Matrix parse_matrix(const nlohmann::json& literal);

}  // namespace cflab::cli

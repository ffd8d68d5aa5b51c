#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cflab/epsilon.hpp"
#include "config.hpp"

namespace cflab::cli {

inline constexpr const char* kToolkitVersion = "0.3.0";
inline constexpr const char* kReportSchema = "cflab.report/1";
inline constexpr const char* kSweepSchema = "cflab.sweep-summary/1";

// Value rounded to 12 significant digits. Non-finite values become null.
nlohmann::json number(double v);
std::string format_number(double v);  // "%.12g"

// Recursively rounds every floating value in place.
void round_floats(nlohmann::json& j);

nlohmann::json to_json(const eps::EpsilonCertificate& cert);

nlohmann::json make_report(const std::string& protocol, const Config& cfg, nlohmann::json results);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string render() const;  // LF line endings, 12 significant digits
};

// Writes to `path`, or standard output when the path is empty.
void write_text(const std::string& path, const std::string& text);

}  // namespace cflab::cli

#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cflab/error.hpp"

namespace cflab::cli {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

void round_floats(nlohmann::json& j) {
  if (j.is_number_float()) {
    j = number(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& x : j) round_floats(x);
  }
}

nlohmann::json to_json(const eps::EpsilonCertificate& cert) {
  nlohmann::json prov = nlohmann::json::object();
  for (const auto& [k, v] : cert.provenance) prov[k] = v;
  return {
      {"value", number(cert.value)},
      {"metric", eps::to_string(cert.metric)},
      {"method", eps::to_string(cert.method)},
      {"bound_kind", eps::to_string(cert.bound_kind)},
      {"samples", cert.samples},
      {"skipped", cert.skipped},
      {"outcome_label", cert.outcome_label},
      {"provenance", prov},
  };
}

nlohmann::json make_report(const std::string& protocol, const Config& cfg, nlohmann::json results) {
  round_floats(results);
  return {
      {"schema", kReportSchema},
      {"toolkit", "cflab"},
      {"version", kToolkitVersion},
      {"protocol", protocol},
      {"config", cfg.echo()},
      {"results", std::move(results)},
  };
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, path + ": cannot open output file");
  out << text;
}

}  // namespace cflab::cli

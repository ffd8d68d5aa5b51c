#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "report.hpp"

namespace cflab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kValidationFailure = 3 };

const std::vector<std::string>& protocols();

// Results object of one protocol run (before rounding).
nlohmann::json run_protocol(const std::string& protocol, const Config& cfg);

struct SweepOutput {
  CsvTable table;
  nlohmann::json summary;
};

// Grid from [sweep]; ConfigError on an empty grid.
SweepOutput run_sweep(const Config& cfg, unsigned threads);

// Worker count from CFLAB_THREADS (0 or unset = hardware concurrency).
unsigned thread_budget();

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace cflab::cli

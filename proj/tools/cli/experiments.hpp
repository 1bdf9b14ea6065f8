#pragma once

#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace helistab::cli {

struct CommandResult {
  bool verified = true;              // false: an asserted invariant broke (exit 2)
  std::vector<std::string> outputs;  // files written
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failures;
};

// Executes c.command, writes CSVs plus manifest.json under c.out, and returns the
// exit status (0 ok, 2 verification failure). Throws UsageError for bad input.
int run(const ExperimentConfig& c, std::ostream& log);

// Individual commands (no manifest).
CommandResult verify_linear(const ExperimentConfig& c);
CommandResult scan_psi(const ExperimentConfig& c);
CommandResult scan_resolvent(const ExperimentConfig& c);
CommandResult decay(const ExperimentConfig& c);
CommandResult delta1(const ExperimentConfig& c);
CommandResult dns(const ExperimentConfig& c);
CommandResult lift_up(const ExperimentConfig& c);
CommandResult sweep_threshold(const ExperimentConfig& c);
CommandResult audit(const ExperimentConfig& c);
CommandResult report(const ExperimentConfig& c);

// Default worker count: HELISTAB_JOBS if set, else hardware threads minus one.
int default_jobs();

}  // namespace helistab::cli

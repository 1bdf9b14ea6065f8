#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <helistab/threshold.hpp>

namespace helistab::cli {

// Usage problems: bad flags, unknown or missing keys, unwritable output.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"verify-linear", "scan-psi", "scan-resolvent", "decay",
                                                 "delta1", "dns", "lift-up", "sweep-threshold",
                                                 "audit", "report"};
  return names;
}

struct ExperimentConfig {
  // [run]
  std::string command;
  std::string out = "results";
  int jobs = 1;
  std::uint64_t seed = 1;
  bool corrupt_operator = false;  // test hook: breaks the assembled operator
  // [grid]
  std::size_t n1 = 32, n2 = 32, ny = 32;
  int M = 64;
  // [physics]
  std::vector<double> nu = {1e-3};
  std::vector<double> delta = {2.0};
  int k1 = 1, k2 = 0;
  std::vector<double> gamma;  // resolvent scans
  double alpha = 2.0;
  double alpha0 = 0.0;
  // [init]
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double amplitude = 0;  // |V0|_X0 (dns), c (lift-up); 0 selects c0 nu^beta for dns
  double c0 = 1e-2;
  double beta = 1.75;
  // [time]
  double dt = 0;  // 0: automatic
  double T = 0;   // 0: command default
  std::size_t sample_every = 20;
  double epsilon = 0;  // 0: 0.25 of the measured pseudospectral constant
  // [classifier]
  ClassifierOptions classifier;
  int iterations = 10;
  // [audit]
  std::size_t samples = 200;
  // [report]
  std::vector<std::string> inputs;

  bool operator==(const ExperimentConfig&) const = default;
};

// INI text with sections [run], [grid], [physics], [init], [time], [classifier],
// [audit], [report]. parse(serialize(c)) == c.
std::string serialize(const ExperimentConfig& c);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Throws UsageError for out-of-range values.
void validate(const ExperimentConfig& c);

std::string format_double(double v);  // 17 significant digits
std::uint64_t config_hash(const ExperimentConfig& c);

}  // namespace helistab::cli

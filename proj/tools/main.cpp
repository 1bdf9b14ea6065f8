#include <iostream>

#include <CLI11.hpp>

#include <helistab/error.hpp>

#include "cli/config.hpp"
#include "cli/experiments.hpp"

using namespace helistab::cli;

namespace {

// Reuses the config parser so flag and file values follow identical rules.
std::vector<double> parse_list(const std::string& flag, const std::string& s) {
  const auto v = parse_config("[run]\ncommand=x\n[physics]\nnu=" + s + "\n").nu;
  if (v.empty()) throw UsageError(flag + " expects a comma-separated list");
  return v;
}

template <std::size_t N>
std::array<long, N> parse_tuple(const std::string& flag, const std::string& s) {
  std::array<long, N> out{};
  std::size_t pos = 0, i = 0;
  try {
    while (i < N) {
      std::size_t used = 0;
      out[i++] = std::stol(s.substr(pos), &used);
      pos += used;
      if (i < N) {
        if (pos >= s.size() || s[pos] != ',') throw std::invalid_argument(s);
        ++pos;
      }
    }
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw UsageError(flag + " expects " + std::to_string(N) + " comma-separated integers, got '" + s + "'");
  }
  return out;
}

std::string usage_text(const CLI::App& app) {
  std::string cmds;
  for (const auto& c : commands()) cmds += "  " + c + "\n";
  return app.help() + "\nCommands:\n" + cmds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability experiments for the planar helical flow", "helistab"};
  std::vector<std::string> positional;
  std::string nu, delta, k, grid, out, config;
  int M = 0, jobs = 0;
  std::uint64_t seed = 0;
  app.add_option("command", positional, "Command, then input files for 'report'");
  auto* o_nu = app.add_option("--nu", nu, "Viscosity (comma-separated list allowed)");
  auto* o_delta = app.add_option("--delta", delta, "Box aspect delta (list allowed)");
  auto* o_k = app.add_option("--k", k, "Horizontal wavenumber k1,k2");
  auto* o_grid = app.add_option("--grid", grid, "DNS grid n1,n2,ny");
  auto* o_M = app.add_option("--M", M, "Fourier truncation |m| <= M");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_out = app.add_option("--out", out, "Output directory");
  auto* o_jobs = app.add_option("--jobs", jobs, "Worker threads (default: HELISTAB_JOBS or cores - 1)");
  auto* o_config = app.add_option("--config", config, "INI config file; excludes every other flag");
  for (auto* o : {o_nu, o_delta, o_k, o_grid, o_M, o_seed, o_out, o_jobs}) o_config->excludes(o);

  try {
    if (argc <= 1) throw UsageError("no command given");
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      std::cout << usage_text(app);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    ExperimentConfig c;
    if (!config.empty()) {
      c = load_config(config);
      if (!positional.empty() && positional.front() != c.command)
        throw UsageError("command '" + positional.front() + "' conflicts with run.command in " + config);
      if (positional.size() > 1) throw UsageError("input files cannot be combined with --config");
    } else {
      if (positional.empty()) throw UsageError("no command given");
      c.command = positional.front();
      c.inputs.assign(positional.begin() + 1, positional.end());
      c.jobs = default_jobs();
      if (*o_nu) c.nu = parse_list("--nu", nu);
      if (*o_delta) c.delta = parse_list("--delta", delta);
      if (*o_k) {
        const auto kk = parse_tuple<2>("--k", k);
        c.k1 = int(kk[0]);
        c.k2 = int(kk[1]);
      }
      if (*o_grid) {
        const auto g = parse_tuple<3>("--grid", grid);
        if (g[0] < 4 || g[1] < 4 || g[2] < 4) throw UsageError("--grid sizes must be >= 4");
        c.n1 = std::size_t(g[0]);
        c.n2 = std::size_t(g[1]);
        c.ny = std::size_t(g[2]);
      }
      if (*o_M) c.M = M;
      if (*o_seed) {
        c.seed = seed;
        c.seeds = {seed};
      }
      if (*o_out) c.out = out;
      if (*o_jobs) c.jobs = jobs;
      if (c.command != "report" && !c.inputs.empty())
        throw UsageError("unexpected argument '" + c.inputs.front() + "'");
    }
    return run(c, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "helistab: " << e.what() << "\n\n" << usage_text(app);
    return 1;
  } catch (const helistab::PreconditionError& e) {
    std::cerr << "helistab: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "helistab: " << e.what() << '\n';
    return 2;
  }
}

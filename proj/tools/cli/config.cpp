#include "cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace helistab::cli {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects a number, got '" + s + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
}

int to_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects an integer, got '" + s + "'");
  }
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

struct Key {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

using KeyTable = std::vector<std::pair<std::string, Key>>;  // "section.key" in output order

Key dbl(double ExperimentConfig::*p) {
  return {[p](const ExperimentConfig& c) { return format_double(c.*p); },
          [p](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*p = to_double(k, v); }};
}
Key cls(double ClassifierOptions::*p) {
  return {[p](const ExperimentConfig& c) { return format_double(c.classifier.*p); },
          [p](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.classifier.*p = to_double(k, v);
          }};
}
Key integer(int ExperimentConfig::*p) {
  return {[p](const ExperimentConfig& c) { return std::to_string(c.*p); },
          [p](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*p = to_int(k, v); }};
}
Key size(std::size_t ExperimentConfig::*p) {
  return {[p](const ExperimentConfig& c) { return std::to_string(c.*p); },
          [p](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*p = static_cast<std::size_t>(to_uint(k, v));
          }};
}
Key dlist(std::vector<double> ExperimentConfig::*p) {
  return {[p](const ExperimentConfig& c) { return join(c.*p, format_double); },
          [p](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*p).clear();
            for (const auto& s : split(v)) (c.*p).push_back(to_double(k, s));
          }};
}

const KeyTable& keys() {
  static const KeyTable table = {
      {"run.command", {[](const ExperimentConfig& c) { return c.command; },
                       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.command = v; }}},
      {"run.out", {[](const ExperimentConfig& c) { return c.out; },
                   [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; }}},
      {"run.jobs", integer(&ExperimentConfig::jobs)},
      {"run.seed", {[](const ExperimentConfig& c) { return std::to_string(c.seed); },
                    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); }}},
      {"run.corrupt_operator",
       {[](const ExperimentConfig& c) { return std::string(c.corrupt_operator ? "true" : "false"); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (v != "true" && v != "false") throw UsageError("config: '" + k + "' expects true or false");
          c.corrupt_operator = v == "true";
        }}},
      {"grid.n1", size(&ExperimentConfig::n1)},
      {"grid.n2", size(&ExperimentConfig::n2)},
      {"grid.ny", size(&ExperimentConfig::ny)},
      {"grid.M", integer(&ExperimentConfig::M)},
      {"physics.nu", dlist(&ExperimentConfig::nu)},
      {"physics.delta", dlist(&ExperimentConfig::delta)},
      {"physics.k1", integer(&ExperimentConfig::k1)},
      {"physics.k2", integer(&ExperimentConfig::k2)},
      {"physics.gamma", dlist(&ExperimentConfig::gamma)},
      {"physics.alpha", dbl(&ExperimentConfig::alpha)},
      {"physics.alpha0", dbl(&ExperimentConfig::alpha0)},
      {"init.seeds", {[](const ExperimentConfig& c) {
                        return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
                      },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                        c.seeds.clear();
                        for (const auto& s : split(v)) c.seeds.push_back(to_uint(k, s));
                      }}},
      {"init.amplitude", dbl(&ExperimentConfig::amplitude)},
      {"init.c0", dbl(&ExperimentConfig::c0)},
      {"init.beta", dbl(&ExperimentConfig::beta)},
      {"time.dt", dbl(&ExperimentConfig::dt)},
      {"time.T", dbl(&ExperimentConfig::T)},
      {"time.sample_every", size(&ExperimentConfig::sample_every)},
      {"time.epsilon", dbl(&ExperimentConfig::epsilon)},
      {"classifier.stable_growth", cls(&ClassifierOptions::stable_growth)},
      {"classifier.residual_energy", cls(&ClassifierOptions::residual_energy)},
      {"classifier.unstable_growth", cls(&ClassifierOptions::unstable_growth)},
      {"classifier.horizon_extension", cls(&ClassifierOptions::horizon_extension)},
      {"classifier.iterations", integer(&ExperimentConfig::iterations)},
      {"audit.samples", size(&ExperimentConfig::samples)},
      {"report.inputs", {[](const ExperimentConfig& c) { return join(c.inputs, [](const std::string& s) { return s; }); },
                         [](ExperimentConfig& c, const std::string&, const std::string& v) { c.inputs = split(v); }}},
  };
  return table;
}

}  // namespace

std::string serialize(const ExperimentConfig& c) {
  boost::property_tree::ptree tree;
  for (const auto& [name, key] : keys()) tree.put(boost::property_tree::ptree::path_type(name, '.'), key.get(c));
  std::ostringstream out;
  boost::property_tree::write_ini(out, tree);
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, const Key*> lookup;
  for (const auto& [name, key] : keys()) lookup[name] = &key;
  ExperimentConfig c;
  bool has_command = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw UsageError("config: key '" + section + "' outside a section");
    for (const auto& [k, v] : body) {
      const std::string name = section + "." + k;
      const auto it = lookup.find(name);
      if (it == lookup.end()) throw UsageError("config: unknown key '" + name + "'");
      it->second->set(c, name, v.data());
      has_command = has_command || name == "run.command";
    }
  }
  if (!has_command) throw UsageError("config: missing key 'run.command'");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const ExperimentConfig& c) {
  const auto& names = commands();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    throw UsageError("unknown command '" + c.command + "'");
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  need(c.jobs >= 1, "jobs must be >= 1");
  need(c.M >= 2, "M must be >= 2");
  need(!c.nu.empty() && std::all_of(c.nu.begin(), c.nu.end(), [](double v) { return v > 0; }),
       "nu must be a non-empty list of positive values");
  need(!c.delta.empty() && std::all_of(c.delta.begin(), c.delta.end(), [](double v) { return v >= 1; }),
       "delta must be a non-empty list of values >= 1");
  need(c.sample_every >= 1, "sample_every must be >= 1");
  need(c.dt >= 0 && c.T >= 0 && c.amplitude >= 0 && c.epsilon >= 0, "dt, T, amplitude, epsilon must be >= 0");
  need(c.iterations >= 1, "iterations must be >= 1");
  if (c.command == "report") need(!c.inputs.empty(), "report needs at least one input file");
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace helistab::cli

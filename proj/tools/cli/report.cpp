#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>

#include <helistab/fit.hpp>

#include "cli/csv.hpp"
#include "cli/experiments.hpp"

namespace helistab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Expands '*' and '?' in the file-name part of each pattern; sorted, de-duplicated.
std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
  std::set<std::string> found;
  for (const auto& pat : patterns) {
    const fs::path p(pat);
    const std::string name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
      if (fs::is_regular_file(p)) found.insert(p.string());
      continue;
    }
    std::string rx;
    for (char ch : name) {
      if (ch == '*') rx += ".*";
      else if (ch == '?') rx += '.';
      else if (std::string("\\^$.|+()[]{}").find(ch) != std::string::npos) rx += std::string("\\") + ch;
      else rx += ch;
    }
    const std::regex re(rx);
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec))
      if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re)) found.insert(e.path().string());
  }
  return {found.begin(), found.end()};
}

double num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::nan("");
  }
}

struct Group {
  std::string family, metric;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::set<std::string> files;
};

json column_ranges(const Group& g) {
  json out = json::object();
  for (std::size_t c = 0; c < g.header.size(); ++c) {
    double lo = INFINITY, hi = -INFINITY;
    bool numeric = true;
    for (const auto& r : g.rows) {
      const double v = num(r[c]);
      if (std::isnan(v) && r[c] != "nan") {
        numeric = false;
        break;
      }
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    if (numeric && lo <= hi) out[g.header[c]] = {lo, hi};
  }
  return out;
}

// Power-law fits of y against x, one per distinct value of the key columns.
json keyed_fits(const Group& g, const std::string& x, const std::string& y, const std::vector<std::string>& keys,
                const std::string& band_column = {}) {
  auto col = [&](const std::string& n) {
    const auto it = std::find(g.header.begin(), g.header.end(), n);
    return it == g.header.end() ? -1 : int(it - g.header.begin());
  };
  const int xi = col(x), yi = col(y), bi = band_column.empty() ? -1 : col(band_column);
  json fits = json::array();
  if (xi < 0 || yi < 0) return fits;
  std::map<std::vector<std::string>, std::vector<const std::vector<std::string>*>> by;
  for (const auto& r : g.rows) {
    std::vector<std::string> k;
    for (const auto& name : keys) k.push_back(col(name) >= 0 ? r[std::size_t(col(name))] : "");
    by[k].push_back(&r);
  }
  for (const auto& [k, rows] : by) {
    std::vector<double> xs, ys;
    double blo = INFINITY, bhi = -INFINITY;
    for (const auto* r : rows) {
      const double a = num((*r)[std::size_t(xi)]), b = num((*r)[std::size_t(yi)]);
      if (a > 0 && b > 0) xs.push_back(a), ys.push_back(b);
      if (bi >= 0) {
        const double c = num((*r)[std::size_t(bi)]);
        if (std::isfinite(c)) blo = std::min(blo, c), bhi = std::max(bhi, c);
      }
    }
    json f;
    for (std::size_t i = 0; i < keys.size(); ++i) f[keys[i]] = k[i];
    f["points"] = xs.size();
    if (std::set<double>(xs.begin(), xs.end()).size() >= 3) {
      const PowerLawFit p = fit_power_law(xs, ys);
      f["slope"] = p.slope;
      f["slope_stderr"] = p.slope_stderr;
      f["prefactor"] = p.prefactor;
      f["max_residual"] = p.max_residual;
    }
    if (bi >= 0 && blo <= bhi) f[band_column + "_band"] = {blo, bhi};
    fits.push_back(f);
  }
  return fits;
}

}  // namespace

CommandResult report(const ExperimentConfig& c) {
  const auto files = expand_inputs(c.inputs);
  if (files.empty()) throw UsageError("report: no result files match the given inputs");

  std::map<std::pair<std::string, std::string>, Group> groups;
  std::map<int, std::string> criteria;
  for (const auto& f : files) {
    if (fs::path(f).extension() != ".csv") continue;
    CsvTable t;
    try {
      t = read_csv(f);
    } catch (const std::exception& e) {
      throw UsageError(std::string("report: ") + e.what());
    }
    const int fam = t.column("family"), met = t.column("metric");
    if (t.column("criterion") >= 0 && t.column("status") >= 0) {
      for (const auto& r : t.rows) {
        const int id = int(num(r[std::size_t(t.column("criterion"))]));
        const std::string& s = r[std::size_t(t.column("status"))];
        // A FAIL anywhere wins over a PASS elsewhere.
        if (!criteria.count(id) || s == "FAIL") criteria[id] = s;
      }
      continue;
    }
    if (fam < 0) throw UsageError("report: " + f + " has no 'family' column");
    for (const auto& r : t.rows) {
      const std::string family = r[std::size_t(fam)];
      const std::string metric = met >= 0 ? r[std::size_t(met)] : "-";
      Group& g = groups[{family, metric}];
      if (g.header.empty()) {
        g.family = family;
        g.metric = metric;
        g.header = t.header;
      } else if (g.header != t.header) {
        throw UsageError("report: " + f + " disagrees with earlier '" + family + "' files on columns");
      }
      g.rows.push_back(r);
      g.files.insert(f);
    }
  }

  json tables = json::array();
  for (const auto& [key, g] : groups) {
    json t = {{"family", g.family}, {"metric", g.metric}, {"rows", g.rows.size()},
              {"files", std::vector<std::string>(g.files.begin(), g.files.end())}, {"ranges", column_ranges(g)}};
    if (g.family == "psi") t["fits"] = keyed_fits(g, "nu", "psi", {"operator", "delta", "k1", "k2"}, "psi_over_sqrt_nu");
    else if (g.family == "resolvent") t["fits"] = keyed_fits(g, "gamma", "min_sigma", {"nu", "alpha", "alpha0"}, "normalized");
    else if (g.family == "liftup") t["fits"] = keyed_fits(g, "nu", "peak_v1", {"delta", "c"}, "ratio");
    else if (g.family == "threshold_critical") t["fits"] = keyed_fits(g, "nu", "estimate", {"delta", "n1"});
    else if (g.family == "dissipation") t["fits"] = keyed_fits(g, "nu", "I_weighted", {"delta", "k1", "k2"});
    tables.push_back(t);
  }
  json crit = json::object();
  for (int i = 1; i <= 12; ++i) crit[std::to_string(i)] = criteria.count(i) ? criteria[i] : "NOT-RUN";

  CommandResult res;
  res.summary = {{"inputs", files}, {"tables", tables}, {"criteria", crit}};
  const fs::path out = fs::path(c.out) / "summary.json";
  std::ofstream(out) << res.summary.dump(2) << '\n';
  res.outputs = {out.string()};
  return res;
}

}  // namespace helistab::cli

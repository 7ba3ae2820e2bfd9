#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "polycarl/studies.hpp"
#include "polycarl/tiles.hpp"

namespace polycarl {

const std::vector<std::string>& study_names() {
  static const std::vector<std::string> names{"vdc",     "levelset", "nets",  "decompose", "interact",
                                              "mass",    "stopping", "trees", "rows"};
  return names;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// key -> section
const std::map<std::string, std::string>& key_sections() {
  static const std::map<std::string, std::string> keys{
      {"name", "study"},          {"seed", "study"},       {"out", "study"},      {"json_only", "study"},
      {"m", "family"},            {"d", "family"},         {"k_max", "family"},   {"grid_bits", "family"},
      {"cell_bits", "family"},    {"bound_factor", "window"}, {"step_factor", "window"}, {"empty", "window"},
      {"N", "thresholds"},        {"C0", "thresholds"},    {"D", "thresholds"},   {"tilde", "thresholds"},
      {"trials", "run"},          {"samples", "run"},
  };
  return keys;
}

long long to_int(const std::string& field, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(field, "expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& field, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  if (v.empty() || v[0] == '-') throw ConfigError(field, "expected an unsigned integer, got '" + v + "'");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
  if (*end != '\0' || errno == ERANGE) throw ConfigError(field, "expected an unsigned integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& field, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) throw ConfigError(field, "expected a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + v + "'");
}

}  // namespace

void set_config_value(ExperimentConfig& c, std::string_view raw_key, std::string_view raw_value) {
  std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  std::string section;
  if (auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  }
  const auto& keys = key_sections();
  auto it = keys.find(key);
  const std::string field = (section.empty() ? (it == keys.end() ? "" : it->second) : section) + "." + key;
  if (it == keys.end()) throw ConfigError(field, "unknown key");
  if (!section.empty() && section != it->second) throw ConfigError(field, "belongs in [" + it->second + "]");

  if (key == "name") c.study = v;
  else if (key == "seed") c.seed = to_u64(field, v);
  else if (key == "out") c.out_dir = v;
  else if (key == "json_only") c.json_only = to_bool(field, v);
  else if (key == "m") c.dim = static_cast<int>(to_int(field, v));
  else if (key == "d") c.degree = static_cast<int>(to_int(field, v));
  else if (key == "k_max") c.k_max = static_cast<int>(to_int(field, v));
  else if (key == "grid_bits") c.grid_bits = static_cast<int>(to_int(field, v));
  else if (key == "cell_bits") c.cell_bits = static_cast<int>(to_int(field, v));
  else if (key == "bound_factor") c.bound_factor = to_double(field, v);
  else if (key == "step_factor") c.step_factor = to_double(field, v);
  else if (key == "empty") c.empty_window = to_bool(field, v);
  else if (key == "N") c.exponent = static_cast<int>(to_int(field, v));
  else if (key == "C0") c.c0 = to_double(field, v);
  else if (key == "D") c.counting_bound = to_double(field, v);
  else if (key == "tilde") c.tilde_factor = to_double(field, v);
  else if (key == "trials") c.trials = static_cast<int>(to_int(field, v));
  else if (key == "samples") c.samples = static_cast<std::size_t>(to_u64(field, v));
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    set_config_value(c, key, std::string_view(t).substr(eq + 1));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

struct Defaults {
  int dim, degree, k_max, grid_bits, cell_bits, trials;
};

Defaults defaults_for(const std::string& study) {
  if (study == "vdc") return {1, 2, 0, 0, 0, 49};
  if (study == "levelset") return {1, 2, 0, 0, 0, 1};
  if (study == "nets") return {1, 1, 3, 0, 0, 1};
  if (study == "decompose") return {1, 1, 3, 6, 3, 5};
  if (study == "interact") return {1, 1, 3, 7, 3, 200};
  if (study == "mass") return {1, 1, 2, 5, 0, 1};
  if (study == "stopping") return {1, 1, 3, 6, 3, 10};
  if (study == "trees") return {1, 1, 2, 9, 4, 20};
  return {1, 1, 2, 6, 3, 3};  // rows
}

bool uses_grid(const std::string& study) {
  return study != "vdc" && study != "levelset" && study != "nets";
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void range(const std::string& field, double x, double lo, double hi) {
  if (!(x >= lo && x <= hi))
    throw ConfigError(field, format_number(x) + " is outside [" + format_number(lo) + ", " + format_number(hi) + "]");
}

}  // namespace

ExperimentConfig resolve(const ExperimentConfig& in) {
  ExperimentConfig c = in;
  const auto& names = study_names();
  if (std::find(names.begin(), names.end(), c.study) == names.end())
    throw ConfigError("study.name", c.study.empty() ? "missing study name" : "unknown study '" + c.study + "'");
  if (!c.seed) throw ConfigError("study.seed", "a seed is required");
  const Defaults d = defaults_for(c.study);
  if (!c.dim) c.dim = d.dim;
  if (!c.degree) c.degree = d.degree;
  if (!c.k_max) c.k_max = d.k_max;
  if (!c.grid_bits) c.grid_bits = d.grid_bits;
  if (!c.cell_bits) c.cell_bits = d.cell_bits;
  if (!c.trials) c.trials = d.trials;
  if (!c.samples) c.samples = 100000;

  range("family.m", *c.dim, 1, 2);
  range("family.d", *c.degree, 1, 3);
  range("family.k_max", *c.k_max, 0, 4);
  range("window.bound_factor", c.bound_factor, 1e-3, 64);
  range("window.step_factor", c.step_factor, 1e-3, 8);
  range("thresholds.N", c.exponent, 0, 64);
  range("thresholds.C0", c.c0, 1e-3, 1e6);
  range("thresholds.D", c.counting_bound, 1e-3, 1e6);
  range("thresholds.tilde", c.tilde_factor, 1, 16);
  range("run.trials", *c.trials, 1, 100000);
  range("run.samples", static_cast<double>(*c.samples), 100, 1e7);
  if (c.out_dir.empty()) throw ConfigError("study.out", "output directory is empty");

  const bool line_only = c.study == "mass" || c.study == "stopping" || c.study == "trees" || c.study == "rows";
  if (line_only && *c.dim != 1) throw ConfigError("family.m", "study '" + c.study + "' runs on m = 1 only");
  if (c.study == "levelset" && *c.dim != 1) throw ConfigError("family.m", "level-set study runs on m = 1 only");

  if (uses_grid(c.study)) {
    range("family.grid_bits", *c.grid_bits, *c.k_max + 3, 16);
    range("family.cell_bits", *c.cell_bits, 0, *c.grid_bits);
    // Desk budget: 2^10 grid points for m = 1, 2^6 per axis for m = 2.
    const int extra = c.study == "interact" ? 1 : 0;
    const int cap = *c.dim == 1 ? 10 : 6;
    if (*c.grid_bits + extra > cap)
      throw ResourceLimit("grid of 2^" + std::to_string(*c.dim * (*c.grid_bits + extra)) +
                              " points exceeds the budget of 2^" + std::to_string(*c.dim * cap),
                          std::ldexp(1.0, *c.dim * (*c.grid_bits + extra)));
  }
  if (c.study != "vdc" && c.study != "levelset") {
    const double monomials = binomial(*c.dim + *c.degree, *c.degree) - 1;
    const double per_axis = 2 * std::floor(c.bound_factor / c.step_factor) + 1;
    const double lattice = std::pow(per_axis, monomials);
    if (lattice > static_cast<double>(kDefaultLatticeBudget))
      throw ResourceLimit("frequency lattice of " + format_number(lattice) + " points per cube exceeds the budget",
                          lattice);
  }
  return c;
}

}  // namespace polycarl

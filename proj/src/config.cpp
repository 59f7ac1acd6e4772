#include "fracspec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "fracspec/error.hpp"

namespace fracspec {

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, x);
  if (r.ec != std::errc{} || r.ptr != end || !std::isfinite(x)) {
    throw ValidationError(what + ": '" + text + "' is not a finite number");
  }
  return x;
}

long long parse_integer(const std::string& text, const std::string& what) {
  long long x = 0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, x);
  if (r.ec != std::errc{} || r.ptr != end) throw ValidationError(what + ": '" + text + "' is not an integer");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

const std::set<std::string> kCommands = {"construct", "mfunc", "dims", "verify", "report"};
const std::set<std::string> kKinds = {"thm1", "sparse", "wholeline"};

}  // namespace

std::vector<double> GridSpec::points() const {
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    out[static_cast<std::size_t>(i)] =
        log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

GridSpec parse_grid(const std::string& text, bool default_log) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    throw ValidationError("grid '" + text + "' must have the form lo:hi:n[:log|:lin]");
  }
  GridSpec g;
  g.lo = parse_double(parts[0], "grid lower end");
  g.hi = parse_double(parts[1], "grid upper end");
  const long long n = parse_integer(parts[2], "grid size");
  if (n < 1 || n > 10'000'000) throw ValidationError("grid '" + text + "': size out of range");
  g.n = static_cast<int>(n);
  g.log = default_log;
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      g.log = true;
    } else if (parts[3] == "lin") {
      g.log = false;
    } else {
      throw ValidationError("grid '" + text + "': spacing must be 'log' or 'lin'");
    }
  }
  if (g.n > 1 && !(g.lo < g.hi)) throw ValidationError("grid '" + text + "': requires lo < hi");
  if (g.log && !(g.lo > 0.0)) throw ValidationError("grid '" + text + "': log spacing needs lo > 0");
  return g;
}

std::string to_string(const GridSpec& grid) {
  return shortest(grid.lo) + ":" + shortest(grid.hi) + ":" + std::to_string(grid.n) +
         (grid.log ? ":log" : ":lin");
}

Precision parse_precision(const std::string& text) {
  if (text == "double") return {};
  if (text.rfind("ext:", 0) == 0) {
    const long long bits = parse_integer(text.substr(4), "precision bits");
    if (bits < 256 || bits > 1 << 20) throw ValidationError("precision '" + text + "': bits must be >= 256");
    return {static_cast<unsigned>(bits)};
  }
  throw ValidationError("precision '" + text + "' must be 'double' or 'ext:<bits>'");
}

std::string to_string(const Precision& p) {
  return p.extended() ? "ext:" + std::to_string(p.bits) : "double";
}

int suite_index(const std::string& suite) {
  const auto& s = verify_suites();
  const auto it = std::find(s.begin(), s.end(), suite);
  if (it == s.end()) throw ValidationError("unknown verify suite '" + suite + "'");
  return static_cast<int>(it - s.begin());
}

std::vector<std::string> missing_keys(const RunConfig& c) {
  std::vector<std::string> missing;
  if (c.command.empty()) {
    missing.push_back("command");
    return missing;
  }
  if (c.command == "construct") {
    if (c.kind.empty()) missing.push_back("kind");
    if (c.out.empty()) missing.push_back("out");
  } else if (c.command == "mfunc" || c.command == "dims") {
    if (c.spec.empty()) missing.push_back("spec");
    if (c.out.empty()) missing.push_back("out");
  } else if (c.command == "verify") {
    if (c.suite.empty()) missing.push_back("suite");
    if (c.spec.empty()) missing.push_back("spec");
    if (c.suite == "ledger" && c.ledger.empty()) missing.push_back("ledger");
  } else if (c.command == "report") {
    if (c.spec.empty()) missing.push_back("spec");
  }
  return missing;
}

void validate(const RunConfig& c) {
  const auto missing = missing_keys(c);
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& k : missing) msg += " " + k;
    throw ValidationError(msg);
  }
  if (!kCommands.contains(c.command)) throw ValidationError("unknown command '" + c.command + "'");
  if (c.command == "construct" && !kKinds.contains(c.kind)) {
    throw ValidationError("unknown construction kind '" + c.kind + "'");
  }
  if (c.command == "verify") suite_index(c.suite);
  if (c.side != "plus" && c.side != "minus" && c.side != "line") {
    throw ValidationError("side must be plus, minus or line");
  }
  if (c.source != "proxy" && c.source != "oracle") throw ValidationError("source must be proxy or oracle");
  if (c.m_normalization != "weyl" && c.m_normalization != "rank_one") {
    throw ValidationError("m_normalization must be weyl or rank_one");
  }
  auto positive = [](bool ok, const char* key) {
    if (!ok) throw ValidationError(std::string("config key '") + key + "' is out of range");
  };
  positive(c.theta_points >= 1, "theta_points");
  positive(c.theta >= 0.0 && c.theta < 3.141592653589793, "theta");
  positive(c.workers >= 1 && c.workers <= 1024, "workers");
  positive(c.stages >= 1 && c.stages <= 64, "stages");
  positive(c.k_max >= 2 && c.k_max <= 12, "k_max");
  positive(c.first_site >= 1, "first_site");
  positive(c.grid_step > 0.0 && c.grid_step < 1.0, "grid_step");
  positive(c.margin >= 0.0, "margin");
  positive(c.eps0 > 0.0 && c.eps0 < 1.0, "eps0");
  positive(c.eps_ratio > 0.0 && c.eps_ratio < 0.5, "eps_ratio");
  positive(c.certificate_energy_points >= 2, "certificate_energy_points");
  positive(c.certificate_delta_points >= 2, "certificate_delta_points");
  positive(c.audit_points >= 2, "audit_points");
  positive(c.sup_theta_points >= 4, "sup_theta_points");
  positive(c.classify_length >= 2.0, "classify_length");
  positive(c.oracle_n >= 10, "oracle_n");
  positive(c.ess_n >= 100, "ess_n");
  positive(c.ess_resolution >= 0.0 && c.ess_resolution < 2.0, "ess_resolution");
  positive(c.samples >= 1, "samples");
  positive(c.divergence_threshold > 1.0, "divergence_threshold");
  positive(c.g_threshold > 0.0 && c.g_threshold < 1.0, "g_threshold");
  positive(c.jl_slack >= 0.0 && c.dt_slack >= 0.0 && c.dkl_slack >= 0.0, "slack");
  positive(c.circle_tol > 0.0 && c.scaling_tol > 0.0 && c.det_tol > 0.0 && c.oracle_tol > 0.0 &&
               c.ess_gap_tol > 0.0,
           "tolerance");
  positive(c.eps_grid.lo > 0.0 && c.delta_grid.lo > 0.0, "eps_grid");
  positive(!c.alphas.empty(), "alphas");
  for (double a : c.alphas) positive(a > 0.0 && a < 1.0, "alphas");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json alphas = nlohmann::json::array();
  for (double a : c.alphas) alphas.push_back(shortest(a));
  return {
      {"command", c.command},
      {"kind", c.kind},
      {"suite", c.suite},
      {"spec", c.spec},
      {"ledger", c.ledger},
      {"out", c.out},
      {"e_grid", to_string(c.e_grid)},
      {"eps_grid", to_string(c.eps_grid)},
      {"delta_grid", to_string(c.delta_grid)},
      {"theta_points", c.theta_points},
      {"theta", shortest(c.theta)},
      {"side", c.side},
      {"source", c.source},
      {"m_normalization", c.m_normalization},
      {"oracle_n", c.oracle_n},
      {"alphas", alphas},
      {"precision", to_string(c.precision)},
      {"workers", c.workers},
      {"seed", c.seed},
      {"stages", c.stages},
      {"k_max", c.k_max},
      {"first_site", c.first_site},
      {"grid_step", shortest(c.grid_step)},
      {"margin", shortest(c.margin)},
      {"eps0", shortest(c.eps0)},
      {"eps_ratio", shortest(c.eps_ratio)},
      {"certificate_energy_points", c.certificate_energy_points},
      {"certificate_delta_points", c.certificate_delta_points},
      {"audit_points", c.audit_points},
      {"sup_theta_points", c.sup_theta_points},
      {"classify_length", shortest(c.classify_length)},
      {"ess_n", c.ess_n},
      {"ess_resolution", shortest(c.ess_resolution)},
      {"samples", c.samples},
      {"divergence_threshold", shortest(c.divergence_threshold)},
      {"g_threshold", shortest(c.g_threshold)},
      {"jl_slack", shortest(c.jl_slack)},
      {"dt_slack", shortest(c.dt_slack)},
      {"dkl_slack", shortest(c.dkl_slack)},
      {"circle_tol", shortest(c.circle_tol)},
      {"det_tol", shortest(c.det_tol)},
      {"oracle_tol", shortest(c.oracle_tol)},
      {"ess_gap_tol", shortest(c.ess_gap_tol)},
      {"scaling_tol", shortest(c.scaling_tol)},
  };
}

namespace {

// Reals are accepted as JSON numbers or decimal strings.
double real_field(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double(v.get<std::string>(), key);
  throw ValidationError("config key '" + key + "' must be a number");
}

long long int_field(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_string()) return parse_integer(v.get<std::string>(), key);
  throw ValidationError("config key '" + key + "' must be an integer");
}

std::string string_field(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ValidationError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& doc, bool check) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  const nlohmann::json known = to_json(RunConfig{});
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  RunConfig c;
  auto str = [&](const char* key, std::string& field) {
    if (doc.contains(key)) field = string_field(doc[key], key);
  };
  auto real = [&](const char* key, double& field) {
    if (doc.contains(key)) field = real_field(doc[key], key);
  };
  auto integer = [&](const char* key, auto& field) {
    if (doc.contains(key)) {
      const long long v = int_field(doc[key], key);
      using T = std::remove_reference_t<decltype(field)>;
      if (v < 0 || static_cast<unsigned long long>(v) > static_cast<unsigned long long>(std::numeric_limits<T>::max())) {
        throw ValidationError(std::string("config key '") + key + "' is out of range");
      }
      field = static_cast<T>(v);
    }
  };
  auto grid = [&](const char* key, GridSpec& field, bool default_log) {
    if (doc.contains(key)) field = parse_grid(string_field(doc[key], key), default_log);
  };
  str("command", c.command);
  str("kind", c.kind);
  str("suite", c.suite);
  str("spec", c.spec);
  str("ledger", c.ledger);
  str("out", c.out);
  grid("e_grid", c.e_grid, false);
  grid("eps_grid", c.eps_grid, true);
  grid("delta_grid", c.delta_grid, true);
  integer("theta_points", c.theta_points);
  real("theta", c.theta);
  str("side", c.side);
  str("source", c.source);
  str("m_normalization", c.m_normalization);
  integer("oracle_n", c.oracle_n);
  if (doc.contains("alphas")) {
    if (!doc["alphas"].is_array()) throw ValidationError("config key 'alphas' must be an array");
    c.alphas.clear();
    for (const auto& a : doc["alphas"]) c.alphas.push_back(real_field(a, "alphas"));
  }
  if (doc.contains("precision")) c.precision = parse_precision(string_field(doc["precision"], "precision"));
  integer("workers", c.workers);
  integer("seed", c.seed);
  integer("stages", c.stages);
  integer("k_max", c.k_max);
  integer("first_site", c.first_site);
  real("grid_step", c.grid_step);
  real("margin", c.margin);
  real("eps0", c.eps0);
  real("eps_ratio", c.eps_ratio);
  integer("certificate_energy_points", c.certificate_energy_points);
  integer("certificate_delta_points", c.certificate_delta_points);
  integer("audit_points", c.audit_points);
  integer("sup_theta_points", c.sup_theta_points);
  real("classify_length", c.classify_length);
  integer("ess_n", c.ess_n);
  real("ess_resolution", c.ess_resolution);
  integer("samples", c.samples);
  real("divergence_threshold", c.divergence_threshold);
  real("g_threshold", c.g_threshold);
  real("jl_slack", c.jl_slack);
  real("dt_slack", c.dt_slack);
  real("dkl_slack", c.dkl_slack);
  real("circle_tol", c.circle_tol);
  real("det_tol", c.det_tol);
  real("oracle_tol", c.oracle_tol);
  real("ess_gap_tol", c.ess_gap_tol);
  real("scaling_tol", c.scaling_tol);
  if (check) validate(c);
  return c;
}

RunConfig parse_config(const std::string& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc, check);
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json doc = to_json(config);
  doc.erase("workers");
  doc.erase("out");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fracspec

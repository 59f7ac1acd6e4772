#include "fracspec/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "fracspec/cocycle.hpp"
#include "fracspec/error.hpp"
#include "fracspec/parallel.hpp"
#include "fracspec/solution.hpp"

namespace fracspec {

std::string decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- square sites -----------------------------------------------------------

Thm1Build build_thm1_detailed(int k_max, double grid_step, double margin) {
  if (k_max < 2) throw ArgumentError("build_thm1: requires k_max >= 2");
  if (!(grid_step > 0.0)) throw ArgumentError("build_thm1: grid_step must be positive");
  Thm1Build out;
  out.grid_step = grid_step;
  out.margin = margin;
  for (int k = 2; k <= k_max; ++k) {
    const Site n = Site{k} * k;
    const InverseNormEstimate c = min_inverse_norm(out.spec, n, grid_step);
    if (!(c.certified > 1e-300) || !std::isfinite(c.certified)) {
      throw PrecisionError("build_thm1: C_n underflows at k = " + std::to_string(k));
    }
    const double target = std::log(2.0) + (k + 1) * std::log(static_cast<double>(k + 1)) -
                          std::log(c.certified);
    const double lv = std::max(target, std::log(4.0)) + std::log1p(margin);
    out.spec.set(Barrier::from_log(n, lv));
    out.stages.push_back({k, n, c.certified, lv});
  }
  return out;
}

PotentialSpec build_thm1(int k_max, double grid_step) {
  return build_thm1_detailed(k_max, grid_step).spec;
}

std::vector<Thm1Audit> audit_thm1(const Thm1Build& build, int energy_points) {
  const auto energies = linear_grid(-2.0, 2.0, energy_points);
  std::vector<Thm1Audit> out;
  for (const auto& st : build.stages) {
    Thm1Audit a;
    a.k = st.k;
    const double log_threshold = (st.k + 1) * std::log(static_cast<double>(st.k + 1));
    a.threshold = std::exp(log_threshold);
    std::vector<double> log_product(energies.size()), log_max_norm(energies.size()),
        log_max_norm_next(energies.size());
    parallel_for(energies.size(), [&](std::size_t i) {
      const ScaledMatrix t = site_transfer(build.spec, st.site, energies[i]);
      log_product[i] = t.log_norm() + std::log(st.c_n);
      const SolutionFrame frame(build.spec, energies[i], 0.0, st.site + 1);
      // Solutions are spanned by u and v; the largest norm is the top Gram eigenvalue.
      auto log_top = [&](Site L) {
        const auto g = frame.gram(static_cast<double>(L));
        const double lmax = 0.5 * (g.uu + g.vv + std::hypot(g.uu - g.vv, 2.0 * g.uv));
        return 0.5 * (std::log(lmax) + g.log_scale);
      };
      log_max_norm[i] = log_top(st.site);
      log_max_norm_next[i] = log_top(st.site + 1);
    });
    const double min_lp = *std::min_element(log_product.begin(), log_product.end());
    a.min_product = std::exp(min_lp);
    a.min_log_max_norm = *std::min_element(log_max_norm.begin(), log_max_norm.end());
    a.min_log_max_norm_next = *std::min_element(log_max_norm_next.begin(), log_max_norm_next.end());
    a.product_ok = min_lp > log_threshold;
    a.norm_ok = a.min_log_max_norm >= log_threshold;
    a.norm_next_ok = a.min_log_max_norm_next >= log_threshold;
    out.push_back(a);
  }
  return out;
}

// ---- sparse -----------------------------------------------------------------

PotentialSpec build_sparse(Site first_site, int n_stages, double slack, unsigned extended_bits) {
  if (first_site < 1) throw ArgumentError("build_sparse: first_site must be >= 1");
  if (n_stages < 1) throw ArgumentError("build_sparse: need at least one stage");
  if (slack < 0.0) throw ArgumentError("build_sparse: slack must be nonnegative");
  PotentialSpec spec(Domain::half_line);
  double prefix = 0.0;
  Site site = first_site;
  for (int n = 1; n <= n_stages; ++n) {
    const double lv = prefix + static_cast<double>(site) + 1.0 + double(n) * n + slack;
    if (lv > kLogOnlyThreshold && extended_bits == 0) {
      throw PrecisionError("build_sparse: stage " + std::to_string(n) +
                           " needs a barrier above 1e300; enable extended precision");
    }
    spec.set(Barrier::from_log(site, lv));
    prefix += lv;
    site *= 2;
  }
  return spec;
}

std::vector<SparseChainAudit> audit_sparse(const PotentialSpec& spec,
                                           const std::vector<double>& energies) {
  const GrowthSchedule sched = growth_schedule(spec);
  const std::size_t count = sched.sites.size();
  // Free stretches before each barrier.
  std::vector<Site> stretches;
  Site prev = 0;
  for (Site s : sched.sites) {
    stretches.push_back(s - prev - 1);
    prev = s;
  }
  std::vector<double> stretch_norm(energies.size(), 1.0);
  parallel_for(energies.size(), [&](std::size_t i) {
    double worst = 1.0;
    for (Site len : stretches) {
      if (len > 0) worst = std::max(worst, std::exp(free_power(energies[i], len).log_norm()));
    }
    stretch_norm[i] = worst;
  });
  const double log_c =
      std::log(2.0 * *std::max_element(stretch_norm.begin(), stretch_norm.end()));

  std::vector<SparseChainAudit> out;
  double prefix = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    SparseChainAudit a;
    a.n = static_cast<int>(n + 1);
    a.site = sched.sites[n];
    std::vector<double> ln(energies.size());
    parallel_for(energies.size(),
                 [&](std::size_t i) { ln[i] = propagate(spec, energies[i], 1, a.site).log_norm(); });
    a.min_log_norm = *std::min_element(ln.begin(), ln.end());
    a.min_lyapunov = a.min_log_norm / static_cast<double>(a.site);
    a.chain_bound = sched.log_values[n] - prefix - static_cast<double>(n + 1) * log_c;
    a.chain_ok = a.min_log_norm >= a.chain_bound;
    prefix += sched.log_values[n];
    out.push_back(a);
  }
  return out;
}

// ---- whole line -------------------------------------------------------------

const char* to_string(LineSide side) { return side == LineSide::plus ? "+" : "-"; }

LineSide line_side_from_string(const std::string& s) {
  if (s == "+" || s == "plus") return LineSide::plus;
  if (s == "-" || s == "minus") return LineSide::minus;
  throw ValidationError("unknown side '" + s + "'");
}

PotentialSpec side_half_line(const PotentialSpec& line, LineSide side) {
  return side == LineSide::plus ? positive_half(line) : negative_half(line);
}

namespace {

// Half-line site <-> whole-line site; an involution on each side.
Site side_site(Site half, LineSide side) { return side == LineSide::plus ? half : 1 - half; }

struct Candidate {
  Barrier barrier;  // whole-line site
  CertificateReport cert;
  double slack = 0.0;
};

}  // namespace

CertificateReport stage_certificate(const PotentialSpec& half_line, int stage, double eps_prev,
                                    double eps, const CertificateGrids& grids, ScalingForm form) {
  if (stage < 1) throw ArgumentError("stage_certificate: stages are 1-based");
  CertificateReport lower =
      certificate_smallness(half_line, 1.0 / (stage + 1), 0.5 * eps, eps, grids, form);
  if (stage == 1) return lower;
  CertificateReport main =
      certificate_smallness(half_line, 1.0 / stage, eps, eps_prev, grids, form);
  return main.worst >= lower.worst ? main : lower;
}

std::vector<double> eps_schedule(const WholelineOptions& o) {
  std::vector<double> eps(static_cast<std::size_t>(2 * o.stages_per_side) + 1, 0.0);
  for (std::size_t k = 1; k < eps.size(); ++k) eps[k] = k == 1 ? o.eps0 : eps[k - 1] * o.eps_ratio;
  return eps;
}

WholelineBuild build_wholeline(const WholelineOptions& o) {
  if (o.stages_per_side < 1) throw ArgumentError("build_wholeline: need at least one stage per side");
  if (!(o.eps0 > 0.0 && o.eps0 < 1.0)) throw ArgumentError("build_wholeline: eps0 must lie in (0, 1)");
  if (!(o.eps_ratio > 0.0 && o.eps_ratio < 0.5)) {
    throw ArgumentError("build_wholeline: eps_ratio must lie in (0, 1/2)");
  }
  const std::vector<double> eps = eps_schedule(o);  // eps[k] = eps_k, eps[0] unused
  const int total = 2 * o.stages_per_side;
  WholelineBuild out;
  for (int k = 1; k <= total; ++k) {
    const LineSide side = k % 2 == 1 ? LineSide::plus : LineSide::minus;
    const PotentialSpec half = side_half_line(out.spec, side);
    const GrowthSchedule sched = growth_schedule(half);
    const Site last = sched.sites.empty() ? 0 : sched.sites.back();
    const Site prev_gap =
        sched.sites.size() >= 2 ? sched.sites.back() - sched.sites[sched.sites.size() - 2] : 0;
    double prefix = 0.0;
    for (double lv : sched.log_values) prefix += lv;
    const auto index = static_cast<double>(sched.sites.size() + 1);

    // A padding passes when this side meets its own stage windows and those of
    // its later stages; later barriers sit further out, so the box closed by
    // the new barrier has to be long enough for every remaining window.
    auto attempt = [&](Site padding) {
      const Site h = last + padding + 1;
      const double bound = prefix + static_cast<double>(h) + 1.0 + index * index;
      Candidate c;
      c.barrier = Barrier::from_log(side_site(h, side), bound + std::log1p(o.margin));
      c.slack = c.barrier.log_value - bound;
      PotentialSpec trial = half;
      trial.set(Barrier::from_log(h, c.barrier.log_value));
      c.cert = stage_certificate(trial, k, eps[k - 1], eps[k], o.grids, o.form);
      for (int j = k + 2; c.cert.holds && j <= total; j += 2) {
        const CertificateReport later = stage_certificate(trial, j, eps[j - 1], eps[j], o.grids, o.form);
        if (!later.holds) {
          c.cert.holds = false;
          c.cert.worst = later.worst;
          c.cert.worst_energy = later.worst_energy;
          c.cert.worst_delta = later.worst_delta;
        }
      }
      return c;
    };
    auto fail = [&](const Candidate& c, Site padding) {
      return PrecisionError("build_wholeline: stage " + std::to_string(k) + " (side " +
                            to_string(side) + ") certificate fails up to padding " +
                            std::to_string(padding) + "; worst " + decimal(c.cert.worst) +
                            " at E=" + decimal(c.cert.worst_energy) +
                            ", delta=" + decimal(c.cert.worst_delta));
    };

    // Doubling, then bisection for the smallest passing padding.
    Site lo = 0, pass = 1;
    Candidate best = attempt(pass);
    while (!best.cert.holds) {
      lo = pass;
      pass *= 2;
      if (pass > o.max_padding) throw fail(best, lo);
      best = attempt(pass);
    }
    while (pass - lo > 1) {
      const Site mid = lo + (pass - lo) / 2;
      Candidate c = attempt(mid);
      if (c.cert.holds) {
        pass = mid;
        best = std::move(c);
      } else {
        lo = mid;
      }
    }
    // Keep barrier gaps strictly increasing on each side.
    if (prev_gap > 0 && pass + 1 <= prev_gap) {
      Site padded = prev_gap;
      best = attempt(padded);
      while (!best.cert.holds) {
        if (padded * 2 > o.max_padding) throw fail(best, padded);
        padded *= 2;
        best = attempt(padded);
      }
      pass = padded;
    }
    // Report the stage's own certificate, not the look-ahead.
    {
      PotentialSpec trial = half;
      trial.set(Barrier::from_log(side_site(best.barrier.site, side), best.barrier.log_value));
      best.cert = stage_certificate(trial, k, eps[k - 1], eps[k], o.grids, o.form);
    }

    out.spec.set(best.barrier);
    LedgerStage st;
    st.stage = k;
    st.side = side;
    st.site = best.barrier.site;
    st.log_value = best.barrier.log_value;
    st.log_value_text = log_value_text(best.barrier);
    st.alpha = 1.0 / (k + 1);
    st.eps_prev = eps[k - 1];
    st.eps = eps[k];
    st.padding = pass;
    st.form = o.form;
    st.grids = o.grids;
    st.certificate_worst = best.cert.worst;
    st.growth_slack = best.slack;
    out.ledger.push_back(st);
  }
  return out;
}

nlohmann::json ledger_to_json(const ConstructionLedger& ledger) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : ledger) {
    arr.push_back({{"stage", s.stage},
                   {"side", to_string(s.side)},
                   {"site", s.site},
                   {"log_value", s.log_value_text},
                   {"alpha", decimal(s.alpha)},
                   {"eps_prev", decimal(s.eps_prev)},
                   {"eps", decimal(s.eps)},
                   {"padding", s.padding},
                   {"form", to_string(s.form)},
                   {"energy_points", s.grids.energy_points},
                   {"delta_points", s.grids.delta_points},
                   {"certificate_worst", decimal(s.certificate_worst)},
                   {"growth_slack", decimal(s.growth_slack)}});
  }
  return arr;
}

namespace {

double parse_decimal(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(std::string("ledger: field '") + key + "' must be a decimal string");
  }
  const std::string s = j[key].get<std::string>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw ValidationError(std::string("ledger: field '") + key + "' is not a decimal number");
  }
  return v;
}

template <typename T>
T parse_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw ValidationError(std::string("ledger: field '") + key + "' must be an integer");
  }
  return j[key].get<T>();
}

}  // namespace

ConstructionLedger ledger_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ValidationError("ledger must be a JSON array of stage records");
  static const std::set<std::string> known = {
      "stage", "side", "site", "log_value", "alpha", "eps_prev", "eps", "padding",
      "form", "energy_points", "delta_points", "certificate_worst", "growth_slack"};
  ConstructionLedger out;
  for (const auto& j : doc) {
    if (!j.is_object()) throw ValidationError("ledger: stage records must be objects");
    for (const auto& [key, _] : j.items()) {
      if (!known.contains(key)) throw ValidationError("ledger: unknown key '" + key + "'");
    }
    LedgerStage s;
    s.stage = parse_int<int>(j, "stage");
    if (!j.contains("side") || !j["side"].is_string()) throw ValidationError("ledger: missing side");
    s.side = line_side_from_string(j["side"].get<std::string>());
    s.site = parse_int<Site>(j, "site");
    if (!j.contains("log_value") || !j["log_value"].is_string()) {
      throw ValidationError("ledger: missing log_value");
    }
    s.log_value_text = j["log_value"].get<std::string>();
    s.log_value = barrier_from_text(s.site, s.log_value_text).log_value;
    s.alpha = parse_decimal(j, "alpha");
    s.eps_prev = parse_decimal(j, "eps_prev");
    s.eps = parse_decimal(j, "eps");
    s.padding = parse_int<Site>(j, "padding");
    if (!j.contains("form") || !j["form"].is_string()) throw ValidationError("ledger: missing form");
    s.form = scaling_form_from_string(j["form"].get<std::string>());
    s.grids.energy_points = parse_int<int>(j, "energy_points");
    s.grids.delta_points = parse_int<int>(j, "delta_points");
    s.certificate_worst = parse_decimal(j, "certificate_worst");
    s.growth_slack = parse_decimal(j, "growth_slack");
    out.push_back(s);
  }
  return out;
}

std::string StageReplay::failures() const {
  std::string s;
  auto add = [&](bool ok, const char* name) {
    if (ok) return;
    if (!s.empty()) s += ",";
    s += name;
  };
  add(eps_ok, "eps");
  add(alpha_ok, "alpha");
  add(side_ok, "side");
  add(value_ok, "value");
  add(growth_ok, "growth");
  add(certificate_ok, "certificate");
  return s;
}

bool ReplayReport::passed() const { return gaps_ok && first_failure() == 0; }

int ReplayReport::first_failure() const {
  for (const auto& s : stages) {
    if (!s.passed()) return s.stage;
  }
  return 0;
}

ReplayReport replay_ledger(const PotentialSpec& spec, const ConstructionLedger& ledger) {
  if (spec.domain() != Domain::whole_line) throw ArgumentError("replay_ledger: expected a whole-line spec");
  std::set<Site> spec_sites, ledger_sites;
  for (const auto& b : spec.barriers()) spec_sites.insert(b.site);
  for (const auto& s : ledger) ledger_sites.insert(s.site);
  if (spec_sites != ledger_sites) {
    throw IntegrityError("replay_ledger: barrier sites of spec and ledger differ");
  }

  // Growth slack per whole-line site, from each side's schedule on the spec.
  std::map<Site, double> slack_at;
  for (LineSide side : {LineSide::plus, LineSide::minus}) {
    const GrowthSchedule sched = growth_schedule(side_half_line(spec, side));
    const GrowthReport g = check_growth(sched);
    for (std::size_t i = 0; i < sched.sites.size(); ++i) {
      slack_at[side_site(sched.sites[i], side)] = g.slack[i];
    }
  }

  ReplayReport report;
  report.gaps_ok = check_gaps(spec);
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const LedgerStage& s = ledger[i];
    StageReplay r;
    r.stage = s.stage;
    r.side = s.side;
    const bool chained = i == 0 ? s.eps_prev == 0.0 : ledger[i - 1].eps == s.eps_prev;
    r.eps_ok = chained && s.eps > 0.0 && s.eps < 1.0 && (i == 0 || s.eps < 0.5 * s.eps_prev);
    r.alpha_ok = s.stage == static_cast<int>(i + 1) &&
                 std::abs(s.alpha - 1.0 / (s.stage + 1)) <= 1e-15;
    r.side_ok = s.side == (s.stage % 2 == 1 ? LineSide::plus : LineSide::minus) &&
                (s.side == LineSide::plus ? s.site >= 1 : s.site <= 0);
    const Barrier* b = spec.find(s.site);
    r.value_ok = b != nullptr && std::abs(b->log_value - s.log_value) <=
                                     1e-15 * std::max(1.0, std::abs(s.log_value));
    r.growth_ok = slack_at.count(s.site) > 0 && slack_at[s.site] >= 0.0;
    if (s.stage >= 1 && s.eps > 0.0 && (s.stage == 1 || s.eps < s.eps_prev)) {
      const CertificateReport c = stage_certificate(side_half_line(spec, s.side), s.stage,
                                                    s.eps_prev, s.eps, s.grids, s.form);
      r.certificate_ok = c.holds;
      r.certificate_worst = c.worst;
    }
    report.stages.push_back(r);
  }
  return report;
}

}  // namespace fracspec

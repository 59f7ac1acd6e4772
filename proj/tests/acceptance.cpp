// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "fracspec/cocycle.hpp"
#include "fracspec/config.hpp"
#include "fracspec/constructor.hpp"
#include "fracspec/fractal.hpp"
#include "fracspec/herglotz.hpp"
#include "fracspec/oracle.hpp"
#include "fracspec/parallel.hpp"
#include "fracspec/report.hpp"
#include "fracspec/run.hpp"
#include "fracspec/solution.hpp"
#include "gen.hpp"

using namespace fracspec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

unsigned hardware() { return std::max(1u, std::thread::hardware_concurrency()); }

// Random half-line family shared by criteria 1, 2 and 4: up to 5 barriers,
// values in [0.1, 3], sites up to `max_site`.
PotentialSpec random_spec(gen::Rng& r, Site max_site) { return gen::half_line(r, 5, max_site, 0.1, 3.0); }

// Independent closed form: the root of m^2 + z m + 1 = 0 inside the unit disk.
Complex free_closed_form(Complex z) {
  const Complex s = std::sqrt(z * z - 4.0);
  const Complex a = (-z + s) / 2.0, b = (-z - s) / 2.0;
  return std::abs(a) < 1.0 ? a : b;
}

// Plain backward continued fraction m_n = 1 / (-z - m_{n+1}) started from 0.
Complex free_unclosed_cf(Complex z, int depth) {
  Complex m = 0.0;
  for (int n = 0; n < depth; ++n) m = 1.0 / (-z - m);
  return m;
}

const WholelineBuild& wholeline_3() {
  static const WholelineBuild b = [] {
    WholelineOptions o;
    o.stages_per_side = 3;
    return build_wholeline(o);
  }();
  return b;
}

RunConfig verify(const std::string& suite) {
  RunConfig c;
  c.command = "verify";
  c.suite = suite;
  c.spec = "in-memory";
  c.workers = hardware();
  return c;
}

Outcome c1_unimodularity() {
  gen::Rng r(1001);
  struct Draw {
    PotentialSpec s;
    double E;
    Site m;
  };
  std::vector<Draw> draws;
  for (int i = 0; i < 1000; ++i) {
    PotentialSpec s = random_spec(r, 10000);
    const double E = r.uniform(-1.9, 1.9);
    draws.push_back({std::move(s), E, r.integer(1, 10000)});
  }
  std::vector<double> dev(draws.size());
  parallel_for(draws.size(), hardware(), [&](std::size_t i) {
    dev[i] = std::abs(propagate(draws[i].s, draws[i].E, 1, draws[i].m).determinant() - 1.0);
  });
  const double worst = *std::max_element(dev.begin(), dev.end());
  return {worst <= 1e-10, "1000 pairs, worst |det - 1| = " + fmt(worst)};
}

Outcome c2_wronskian() {
  gen::Rng r(1002);
  struct Draw {
    PotentialSpec s;
    double E, theta;
  };
  std::vector<Draw> draws;
  for (int i = 0; i < 100; ++i) {
    PotentialSpec s = random_spec(r, 10000);
    const double E = r.uniform(-1.9, 1.9), th = r.uniform(0.0, kPi);
    draws.push_back({std::move(s), E, th});
  }
  std::vector<double> dev(draws.size());
  parallel_for(draws.size(), hardware(), [&](std::size_t i) {
    const SolutionFrame f = solve(draws[i].s, draws[i].E, draws[i].theta, 10000);
    double w = 0.0;
    for (Site n = 0; n <= 10000; ++n) w = std::max(w, std::abs(f.wronskian(n) - 1.0));
    dev[i] = w;
  });
  const double worst = *std::max_element(dev.begin(), dev.end());
  return {worst <= 1e-10, "100 triples, n <= 1e4, worst |W - 1| = " + fmt(worst)};
}

Outcome c3_free_m() {
  gen::Rng r(1003);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Complex z{r.uniform(-4.0, 4.0), r.uniform(0.1, 4.0)};
    const Complex exact = free_closed_form(z);
    // |m| < 1 contracts the tail by |m|^2 per step; 1e-17 after `depth` steps.
    const int depth = static_cast<int>(std::ceil(-17.0 * std::log(10.0) / (2.0 * std::log(std::abs(exact))))) + 2;
    worst = std::max({worst, std::abs(m_halfline(PotentialSpec::free(), 0.0, z).value - exact),
                      std::abs(m_continued_fraction_stepwise(PotentialSpec::free(), z, 64) - exact),
                      std::abs(free_unclosed_cf(z, depth) - m_free(z))});
  }
  return {worst <= 1e-10, "1000 z, im z >= 0.1, worst |diff| = " + fmt(worst)};
}

Outcome c4_oracle() {
  gen::Rng r(1004);
  std::vector<PotentialSpec> specs{PotentialSpec::free()};
  while (specs.size() < 11) {
    PotentialSpec s = gen::half_line(r, 5, 400, 0.1, 3.0);
    if (!s.empty()) specs.push_back(std::move(s));
  }
  const auto th = theta_grid(8);  // includes pi/2
  const std::size_t n = specs.size() * th.size();
  std::vector<double> worst(n);
  std::vector<std::vector<Complex>> zs(n);
  for (auto& z : zs) {
    for (int j = 0; j < 25; ++j) z.emplace_back(r.uniform(-2.5, 2.5), r.uniform(0.05, 1.0));
  }
  parallel_for(n, hardware(), [&](std::size_t i) {
    const PotentialSpec& s = specs[i / th.size()];
    const double t = th[i % th.size()];
    const AtomicMeasure mu = truncated_measure(s, Side::plus, t, 2000);
    double w = 0.0;
    for (const Complex z : zs[i]) w = std::max(w, std::abs(m_truncated(mu, z) - m_halfline(s, t, z).value));
    worst[i] = w;
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  return {w <= 1e-6, "free + 10 random specs, 8 theta, 25 z each, N=2000, worst |diff| = " + fmt(w)};
}

Outcome sweep(const std::string& suite) {
  const PotentialSpec specs[] = {PotentialSpec::free(), build_sparse(10, 3, 0.0)};
  const char* names[] = {"free", "sparse"};
  std::string detail;
  bool pass = true;
  for (int i = 0; i < 2; ++i) {
    RunConfig c = verify(suite);
    c.e_grid = {-1.9, 1.9, 50, false};
    const SuiteResult res = run_suite(c, specs[i]);
    std::size_t failed = 0;
    for (const auto& row : res.table.rows) failed += row.back() == "0";
    pass = pass && res.passed && failed == 0;
    detail += std::string(i ? "; " : "") + names[i] + " " + std::to_string(res.table.rows.size() - failed) + "/" +
              std::to_string(res.table.rows.size());
  }
  return {pass, detail + " triples pass (E 50 x theta 8 x eps 16)"};
}

Outcome c7_thm1() {
  const Thm1Build b = build_thm1_detailed(5, 1e-3);
  const auto audit = audit_thm1(b, 1000);
  bool product = true, norm = true, norm_next = true;
  std::string worst;
  for (const auto& a : audit) {
    product = product && a.product_ok;
    norm = norm && a.norm_ok;
    norm_next = norm_next && a.norm_next_ok;
    if (!a.norm_ok && worst.empty()) {
      worst = "; k=" + std::to_string(a.k) + " max ln||u||_{k^2} = " + fmt(a.min_log_max_norm) + " < " +
              fmt(std::log(a.threshold));
    }
  }
  return {product && norm,
          std::string("stage products ") + (product ? "hold" : "fail") + ", norm at L=k^2 " + (norm ? "holds" : "fails") +
              ", norm at L=k^2+1 " + (norm_next ? "holds" : "fails") + worst};
}

Outcome c8_sparse() {
  const PotentialSpec s = build_sparse(10, 4, 0.0);
  const GrowthReport g = check_growth(growth_schedule(s));
  double min_slack = INFINITY;
  for (double x : g.slack) min_slack = std::min(min_slack, x);
  const auto E = linear_grid(-1.9, 1.9, 200);
  double worst = INFINITY;
  for (std::size_t n = 1; n < 4; ++n) {
    const Site L = s.barriers()[n].site;
    std::vector<double> est(E.size());
    parallel_for(E.size(), hardware(), [&](std::size_t i) { est[i] = lyapunov_estimate(s, E[i], L); });
    worst = std::min(worst, *std::min_element(est.begin(), est.end()));
  }
  return {g.holds && min_slack >= 0.0 && worst >= 1.0,
          "min growth slack " + fmt(min_slack) + ", min Lyapunov estimate at L_2..L_4 = " + fmt(worst)};
}

Outcome c9_dkl() {
  RunConfig c = verify("dkl");
  c.e_grid = {-1.9, 1.9, 25, false};
  c.delta_grid = {1e-3, 1.0, 20, true};
  const SuiteResult res = run_suite(c, wholeline_3().spec);
  std::size_t dkl_fail = 0, circle_fail = 0;
  for (const auto& row : res.table.rows) {
    dkl_fail += row[5] == "0";
    circle_fail += row[6] == "0";
  }
  return {res.passed, std::to_string(res.table.rows.size()) + " z: DKL fails at " + std::to_string(dkl_fail) +
                          ", circle vs 512-grid sup fails at " + std::to_string(circle_fail)};
}

Outcome c10_ledger() {
  const WholelineBuild& b = wholeline_3();
  const ReplayReport clean = replay_ledger(b.spec, b.ledger);
  bool invariants = true;
  for (std::size_t i = 1; i < b.ledger.size(); ++i) invariants = invariants && b.ledger[i].eps < b.ledger[i - 1].eps / 2.0;

  ConstructionLedger eps_fault = b.ledger;
  eps_fault[2].eps *= 1.3;
  const ReplayReport r1 = replay_ledger(b.spec, eps_fault);

  PotentialSpec halved = b.spec;
  const Barrier& t = *b.spec.find(b.ledger[3].site);
  halved.set(Barrier::from_log(t.site, t.log_value - std::log(2.0)));
  const ReplayReport r2 = replay_ledger(halved, b.ledger);

  const bool ok = clean.passed() && invariants && r1.first_failure() == 3 && r2.first_failure() == 4;
  return {ok, "clean replay " + std::string(clean.passed() ? "passes" : "fails") + " on " +
                  std::to_string(b.ledger.size()) + " stages; eps fault -> stage " + std::to_string(r1.first_failure()) +
                  " (" + r1.stages[2].failures() + "); halved barrier -> stage " + std::to_string(r2.first_failure()) +
                  " (" + (r2.first_failure() > 0 ? r2.stages[static_cast<std::size_t>(r2.first_failure() - 1)].failures()
                                                 : std::string("none")) +
                  ")"};
}

Outcome c11_synthetic() {
  const auto eps = log_grid(1e-3, 1e-1, 16);
  double gamma_err = 0.0;
  bool flags = true;
  for (double s : {0.0, 0.3, 0.7, 1.0}) {
    const ScalingWindow w = power_law_window(0.0, eps, s);
    const GammaEstimate g = gamma_estimates(w);
    gamma_err = std::max({gamma_err, std::abs(g.gamma_minus - s), std::abs(g.gamma_plus - s)});
    for (double alpha : {0.25, 0.5, 0.75}) {
      const AlphaDerivatives d = alpha_derivatives(w, alpha);
      flags = flags && d.upper_divergent == (s < alpha) && d.lower_divergent == (s < alpha);
    }
  }
  int agree = 0;
  for (double s : {0.3, 0.5, 0.7}) {
    for (const AlphaReport& a : dimension_report(power_law_window(0.0, eps, s), {0.3, 0.5, 0.7}).alphas) {
      agree += a.classes_agree();
    }
  }
  return {gamma_err <= 1e-9 && flags && agree == 9,
          "gamma error " + fmt(gamma_err) + ", divergence flags " + (flags ? "match" : "mismatch") +
              ", panel agreement " + std::to_string(agree) + "/9"};
}

Outcome c12_contrast() {
  const WholelineBuild& b = wholeline_3();
  const double eps1 = b.ledger[0].eps, eps3 = b.ledger[2].eps;
  const auto eps = log_grid(eps3, eps1, 16);
  const auto E = linear_grid(-1.9, 1.9, 20);
  const auto th = theta_grid(8);
  std::vector<double> half(E.size() * th.size() * 2), line(E.size());
  parallel_for(half.size(), hardware(), [&](std::size_t i) {
    const Side side = i % 2 == 0 ? Side::plus : Side::minus;
    const double t = th[(i / 2) % th.size()], e = E[i / (2 * th.size())];
    half[i] = gamma_estimates(scaling_window(b.spec, side, t, e, eps, MassSource::proxy)).fit;
  });
  parallel_for(line.size(), hardware(), [&](std::size_t i) {
    line[i] = gamma_estimates(scaling_window(b.spec, Side::line, 0.0, E[i], eps, MassSource::proxy)).fit;
  });
  std::vector<double> sorted = half;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  const auto high = std::count_if(line.begin(), line.end(), [](double g) { return g >= 0.6; });
  const double frac = static_cast<double>(high) / static_cast<double>(line.size());
  return {median <= 0.4 && frac >= 0.7,
          "window eps in [" + fmt(eps3) + ", " + fmt(eps1) + "], 20 E: half-line median fit slope " + fmt(median) +
              " (<= 0.4), whole-line slope >= 0.6 at " + fmt(100.0 * frac) + "% (>= 70%)"};
}

Outcome c13_ess() {
  const EssFillReport free = ess_fill(PotentialSpec::free(), 1000, 0.05);
  const EssFillReport sparse = ess_fill(build_sparse(10, 3, 0.0), 2000, 0.05);
  return {free.max_gap <= 0.02 && sparse.outliers <= sparse.barrier_count,
          "free N=1000 max gap " + fmt(free.max_gap) + "; sparse N=2000 outliers " + std::to_string(sparse.outliers) +
              " <= barriers " + std::to_string(sparse.barrier_count)};
}

Outcome c14_determinism() {
  const fs::path dir = fs::temp_directory_path() / "fracspec_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string half = (dir / "sparse.json").string(), line = (dir / "line.json").string(),
                    ledger = (dir / "ledger.json").string(), thm1 = (dir / "thm1.json").string();
  write_text(half, serialize(build_sparse(10, 4, 0.0)));
  write_text(line, serialize(wholeline_3().spec));
  write_json(ledger, ledger_to_json(wholeline_3().ledger));
  write_text(thm1, serialize(build_thm1(5, 1e-3)));

  struct Case {
    const char* suite;
    std::string spec;
  };
  const Case cases[] = {{"jl", half},     {"dt", half},      {"dkl", line},     {"thm1", thm1},
                        {"growth", line}, {"lyapunov", half}, {"ledger", line},  {"cocycle", half},
                        {"oracle", half}, {"ess", half}};
  int identical = 0;
  std::string differing;
  for (const Case& k : cases) {
    std::string csv[2];
    for (int w = 0; w < 2; ++w) {
      RunConfig c = verify(k.suite);
      c.spec = k.spec;
      if (std::string(k.suite) == "ledger") c.ledger = ledger;
      if (std::string(k.suite) == "dkl") c.delta_grid.n = 8, c.e_grid.n = 10;
      if (std::string(k.suite) == "oracle") c.e_grid.n = 5, c.delta_grid = {0.05, 1.0, 5, true};
      c.workers = w == 0 ? 1 : 4;
      c.out = (dir / (std::string(k.suite) + std::to_string(c.workers) + ".csv")).string();
      run(c);  // verify failures still write their CSV
      csv[w] = fs::exists(c.out) ? read_text(c.out) : std::string();
    }
    if (!csv[0].empty() && csv[0] == csv[1]) {
      ++identical;
    } else {
      differing += std::string(" ") + k.suite;
    }
  }
  return {identical == 10, std::to_string(identical) + "/10 suites bitwise identical for workers 1 vs 4" +
                               (differing.empty() ? "" : ";" + differing + " differ")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "unimodularity", 30, c1_unimodularity},
      {2, "wronskian", 30, c2_wronskian},
      {3, "free m-function", 5, c3_free_m},
      {4, "oracle equivalence", 120, c4_oracle},
      {5, "JL sandwich", 300, [] { return sweep("jl"); }},
      {6, "DT bound", 120, [] { return sweep("dt"); }},
      {7, "square-site audit", 60, c7_thm1},
      {8, "sparse audit", 60, c8_sparse},
      {9, "DKL comparison", 180, c9_dkl},
      {10, "ledger replay", 600, c10_ledger},
      {11, "dimension estimator exactness", 5, c11_synthetic},
      {12, "dimension contrast trend", 600, c12_contrast},
      {13, "essential spectrum fill", 30, c13_ess},
      {14, "determinism", 600, c14_determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.1fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "fracspec/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "fracspec/cocycle.hpp"
#include "fracspec/error.hpp"
#include "fracspec/fractal.hpp"
#include "fracspec/herglotz.hpp"
#include "fracspec/oracle.hpp"
#include "fracspec/parallel.hpp"
#include "fracspec/solution.hpp"

namespace fracspec {

namespace {

const char* kTruncationNote =
    "oracle truncations use a Dirichlet condition at the window edge; agreement with the "
    "half-line operator is only claimed for im z >= 0.05";

PotentialSpec plus_half(const PotentialSpec& spec) {
  return spec.domain() == Domain::half_line ? spec : positive_half(spec);
}

std::vector<double> descending(std::vector<double> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string side_text(const std::string& side, const PotentialSpec& spec) {
  return spec.domain() == Domain::half_line ? "plus" : side;
}

// ---- verify suites ----------------------------------------------------------

SuiteResult suite_jl(const RunConfig& c, const PotentialSpec& spec) {
  const PotentialSpec half = plus_half(spec);
  const auto E = c.e_grid.points(), eps = c.eps_grid.points();
  const auto th = theta_grid(c.theta_points);
  const std::size_t n = E.size() * th.size() * eps.size();
  std::vector<JlReport> out(n);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t ie = i / (th.size() * eps.size()), it = (i / eps.size()) % th.size(),
                      ix = i % eps.size();
    out[i] = check_jl(half, E[ie], th[it], eps[ix], c.jl_slack, m_normalization_from_string(c.m_normalization));
  });
  SuiteResult r;
  r.table.columns = {"E", "theta", "eps", "L", "ratio", "abs_m", "lower", "upper", "ok"};
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ie = i / (th.size() * eps.size()), it = (i / eps.size()) % th.size(),
                      ix = i % eps.size();
    const auto& j = out[i];
    r.table.add({cell(E[ie]), cell(th[it]), cell(eps[ix]), cell(j.L), cell(j.ratio), cell(j.abs_m),
                 cell(j.lower), cell(j.upper), cell(j.holds)});
    if (!j.holds && r.passed) {
      r.passed = false;
      r.failure = "JL sandwich fails at E=" + cell(E[ie]) + " theta=" + cell(th[it]) + " eps=" + cell(eps[ix]);
    }
  }
  return r;
}

SuiteResult suite_dt(const RunConfig& c, const PotentialSpec& spec) {
  const PotentialSpec half = plus_half(spec);
  const auto E = c.e_grid.points(), eps = c.eps_grid.points();
  const auto th = theta_grid(c.theta_points);
  const std::size_t n = E.size() * th.size() * eps.size();
  std::vector<DtReport> out(n);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t ie = i / (th.size() * eps.size()), it = (i / eps.size()) % th.size(),
                      ix = i % eps.size();
    out[i] = check_dt(half, E[ie], th[it], eps[ix], DtForm::squared, c.dt_slack,
                      m_normalization_from_string(c.m_normalization));
  });
  SuiteResult r;
  r.table.columns = {"E", "theta", "eps", "L", "b", "im_m", "bound", "ok"};
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ie = i / (th.size() * eps.size()), it = (i / eps.size()) % th.size(),
                      ix = i % eps.size();
    const auto& d = out[i];
    r.table.add({cell(E[ie]), cell(th[it]), cell(eps[ix]), cell(d.L), cell(d.b), cell(d.im_m),
                 cell(d.bound), cell(d.holds)});
    if (!d.holds && r.passed) {
      r.passed = false;
      r.failure = "DT bound fails at E=" + cell(E[ie]) + " theta=" + cell(th[it]) + " eps=" + cell(eps[ix]);
    }
  }
  return r;
}

SuiteResult suite_dkl(const RunConfig& c, const PotentialSpec& spec) {
  if (spec.domain() != Domain::whole_line) throw ValidationError("suite dkl needs a whole-line spec");
  const PotentialSpec half = positive_half(spec);
  const auto E = c.e_grid.points(), delta = c.delta_grid.points();
  const std::size_t n = E.size() * delta.size();
  std::vector<DklSample> dkl(n);
  std::vector<double> grid_sup(n);
  parallel_for(n, [&](std::size_t i) {
    const Complex z(E[i / delta.size()], delta[i % delta.size()]);
    dkl[i] = check_dkl(spec, z, c.dkl_slack);
    grid_sup[i] = sup_over_theta_grid(half, z, c.sup_theta_points);
  });
  SuiteResult r;
  r.table.columns = {"E", "eps", "abs_M", "sup_abs_m", "grid_sup", "dkl_ok", "circle_ok"};
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = dkl[i];
    const double sup = d.sup_plus.sup();
    const bool circle_ok = std::abs(sup - grid_sup[i]) <= c.circle_tol * std::max(1.0, sup);
    r.table.add({cell(d.z.real()), cell(d.z.imag()), cell(d.abs_M), cell(sup), cell(grid_sup[i]),
                 cell(d.holds), cell(circle_ok)});
    if ((!d.holds || !circle_ok) && r.passed) {
      r.passed = false;
      r.failure = std::string(d.holds ? "circle and grid sup disagree" : "|M| exceeds sup |m_+^theta|") +
                  " at z=" + cell(d.z.real()) + "+" + cell(d.z.imag()) + "i";
    }
  }
  return r;
}

SuiteResult suite_thm1(const RunConfig& c, const PotentialSpec& spec) {
  if (spec.domain() != Domain::half_line) throw ValidationError("suite thm1 needs a half-line spec");
  Thm1Build build;
  build.spec = spec;
  build.grid_step = c.grid_step;
  for (const auto& b : spec.barriers()) {
    const auto k = static_cast<int>(std::llround(std::sqrt(static_cast<double>(b.site))));
    if (static_cast<Site>(k) * k != b.site || k < 2) {
      throw ValidationError("suite thm1: barrier site " + std::to_string(b.site) + " is not a square k^2 with k >= 2");
    }
    const double c_n = min_inverse_norm(spec, b.site, c.grid_step).certified;
    build.stages.push_back({k, b.site, c_n, b.log_value});
  }
  const auto audit = audit_thm1(build, c.audit_points);
  SuiteResult r;
  r.table.columns = {"k", "site", "c_n", "min_product", "threshold", "log_norm_k2", "log_norm_k2_plus_1",
                     "product_ok", "norm_ok", "norm_next_ok"};
  r.passed = true;
  for (std::size_t i = 0; i < audit.size(); ++i) {
    const auto& a = audit[i];
    const auto& st = build.stages[i];
    r.table.add({cell(static_cast<long long>(a.k)), cell(static_cast<long long>(st.site)), cell(st.c_n),
                 cell(a.min_product), cell(a.threshold), cell(a.min_log_max_norm),
                 cell(a.min_log_max_norm_next), cell(a.product_ok), cell(a.norm_ok), cell(a.norm_next_ok)});
    if ((!a.product_ok || !a.norm_next_ok) && r.passed) {
      r.passed = false;
      r.failure = "stage k=" + std::to_string(a.k) + (a.product_ok ? ": max solution norm" : ": ||T_n|| C_n") +
                  " below (k+1)^(k+1)";
    }
  }
  return r;
}

SuiteResult suite_growth(const RunConfig&, const PotentialSpec& spec) {
  SuiteResult r;
  r.table.columns = {"side", "index", "site", "log_value", "slack", "ok"};
  r.passed = true;
  auto side = [&](const char* name, const PotentialSpec& half) {
    const GrowthSchedule s = growth_schedule(half);
    const GrowthReport g = check_growth(s);
    for (std::size_t i = 0; i < s.sites.size(); ++i) {
      const bool ok = g.slack[i] >= 0.0;
      r.table.add({name, cell(static_cast<long long>(i + 1)), cell(static_cast<long long>(s.sites[i])),
                   cell(s.log_values[i]), cell(g.slack[i]), cell(ok)});
      if (!ok && r.passed) {
        r.passed = false;
        r.failure = std::string("growth condition fails on the ") + name + " side at stage " + std::to_string(i + 1);
      }
    }
  };
  side("plus", plus_half(spec));
  if (spec.domain() == Domain::whole_line) side("minus", negative_half(spec));
  return r;
}

SuiteResult suite_lyapunov(const RunConfig& c, const PotentialSpec& spec) {
  const PotentialSpec half = plus_half(spec);
  const auto E = c.e_grid.points();
  std::vector<Site> sites;
  for (const auto& b : half.barriers()) sites.push_back(b.site);
  // The first barrier has no predecessor and carries no growth guarantee.
  const std::size_t stages = sites.size() > 1 ? sites.size() - 1 : 0;
  const std::size_t n = stages * E.size();
  std::vector<double> est(n);
  parallel_for(n, [&](std::size_t i) {
    const Site L = sites[1 + i / E.size()];
    const double e = E[i % E.size()];
    est[i] = c.precision.extended() ? lyapunov_estimate_extended(half, e, L, c.precision.bits)
                                    : lyapunov_estimate(half, e, L);
  });
  SuiteResult r;
  r.table.columns = {"E", "n", "site", "estimate", "ok"};
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t stage = 2 + i / E.size();
    const bool ok = est[i] >= 1.0;
    r.table.add({cell(E[i % E.size()]), cell(static_cast<long long>(stage)),
                 cell(static_cast<long long>(sites[stage - 1])), cell(est[i]), cell(ok)});
    if (!ok && r.passed) {
      r.passed = false;
      r.failure = "Lyapunov estimate below 1 at stage " + std::to_string(stage) + " E=" + cell(E[i % E.size()]);
    }
  }
  return r;
}

SuiteResult suite_ledger(const PotentialSpec& spec, const ConstructionLedger& ledger) {
  SuiteResult r;
  r.table.columns = {"stage", "side", "eps_ok", "alpha_ok", "side_ok", "value_ok", "growth_ok",
                     "certificate_ok", "certificate_worst", "gaps_ok"};
  ReplayReport rep;
  try {
    rep = replay_ledger(spec, ledger);
  } catch (const IntegrityError& e) {
    r.passed = false;
    r.failure = e.what();
    return r;
  }
  for (const auto& s : rep.stages) {
    r.table.add({cell(static_cast<long long>(s.stage)), to_string(s.side), cell(s.eps_ok), cell(s.alpha_ok),
                 cell(s.side_ok), cell(s.value_ok), cell(s.growth_ok), cell(s.certificate_ok),
                 cell(s.certificate_worst), cell(rep.gaps_ok)});
  }
  r.passed = rep.passed();
  if (!r.passed) {
    const int k = rep.first_failure();
    if (k > 0) {
      r.failure = "ledger replay fails at stage " + std::to_string(k) + ": " +
                  rep.stages[static_cast<std::size_t>(k - 1)].failures();
    } else {
      r.failure = "barrier gaps do not increase";
    }
  }
  return r;
}

SuiteResult suite_cocycle(const RunConfig& c, const PotentialSpec& spec) {
  const PotentialSpec half = plus_half(spec);
  struct Draw {
    double E, theta;
    Site m;
  };
  std::mt19937_64 rng(c.seed);
  std::vector<Draw> draws(static_cast<std::size_t>(c.samples));
  for (auto& d : draws) {
    d.E = c.e_grid.lo + (c.e_grid.hi - c.e_grid.lo) * unit_draw(rng);
    d.theta = std::numbers::pi * unit_draw(rng);
    d.m = 1 + static_cast<Site>(unit_draw(rng) * 1e4);
  }
  std::vector<double> det_dev(draws.size()), wr_dev(draws.size());
  parallel_for(draws.size(), [&](std::size_t i) {
    const auto& d = draws[i];
    det_dev[i] = std::abs(propagate(half, d.E, 1, d.m).determinant() - 1.0);
    const SolutionFrame f(half, d.E, d.theta, d.m);
    double w = 0.0;
    for (Site k = 0; k <= d.m; ++k) w = std::max(w, std::abs(f.wronskian(k) - 1.0));
    wr_dev[i] = w;
  });
  SuiteResult r;
  r.table.columns = {"sample", "E", "theta", "m", "det_dev", "wronskian_dev", "ok"};
  r.passed = true;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const bool ok = det_dev[i] <= c.det_tol && wr_dev[i] <= c.det_tol;
    r.table.add({cell(static_cast<long long>(i)), cell(draws[i].E), cell(draws[i].theta),
                 cell(static_cast<long long>(draws[i].m)), cell(det_dev[i]), cell(wr_dev[i]), cell(ok)});
    if (!ok && r.passed) {
      r.passed = false;
      r.failure = "unimodularity or Wronskian deviation above tolerance at sample " + std::to_string(i);
    }
  }
  return r;
}

SuiteResult suite_oracle(const RunConfig& c, const PotentialSpec& spec) {
  const PotentialSpec half = plus_half(spec);
  const auto th = theta_grid(c.theta_points);
  const auto E = c.e_grid.points(), delta = c.delta_grid.points();
  std::vector<AtomicMeasure> mu(th.size());
  parallel_for(th.size(), [&](std::size_t i) { mu[i] = truncated_measure(half, Side::plus, th[i], c.oracle_n); });
  const std::size_t per = E.size() * delta.size(), n = th.size() * per;
  std::vector<Complex> cf(n), orc(n);
  parallel_for(n, [&](std::size_t i) {
    const Complex z(E[(i % per) / delta.size()], delta[i % delta.size()]);
    cf[i] = m_halfline(half, th[i / per], z).value;
    orc[i] = m_truncated(mu[i / per], z);
  });
  SuiteResult r;
  r.table.columns = {"theta", "E", "eps", "re_m", "im_m", "re_oracle", "im_oracle", "abs_diff", "ok"};
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = std::abs(cf[i] - orc[i]);
    const bool ok = diff <= c.oracle_tol;
    r.table.add({cell(th[i / per]), cell(E[(i % per) / delta.size()]), cell(delta[i % delta.size()]),
                 cell(cf[i].real()), cell(cf[i].imag()), cell(orc[i].real()), cell(orc[i].imag()), cell(diff),
                 cell(ok)});
    if (!ok && r.passed) {
      r.passed = false;
      r.failure = "continued fraction and truncation differ by " + cell(diff) + " at theta=" + cell(th[i / per]);
    }
  }
  return r;
}

SuiteResult suite_ess(const RunConfig& c, const PotentialSpec& spec) {
  const EssFillReport e = ess_fill(spec, c.ess_n, c.ess_resolution);
  SuiteResult r;
  r.table.columns = {"N", "resolution", "max_gap", "in_window", "outliers", "barrier_count", "gap_ok",
                     "outlier_ok"};
  const bool gap_ok = e.max_gap <= c.ess_gap_tol;
  const bool outlier_ok = e.outliers <= e.barrier_count;
  r.table.add({cell(static_cast<long long>(e.N)), cell(e.resolution), cell(e.max_gap),
               cell(static_cast<long long>(e.in_window)), cell(static_cast<long long>(e.outliers)),
               cell(static_cast<long long>(e.barrier_count)), cell(gap_ok), cell(outlier_ok)});
  r.passed = gap_ok && outlier_ok;
  if (!gap_ok) r.failure = "eigenvalue gap " + cell(e.max_gap) + " exceeds " + cell(c.ess_gap_tol);
  if (!outlier_ok) r.failure = "more eigenvalues outside [-2, 2] than barriers";
  return r;
}

// ---- commands -----------------------------------------------------------------

void write_sidecar(const std::string& path, const RunConfig& c, nlohmann::json extra,
                   std::vector<std::string>& outputs) {
  extra["provenance"] = to_json(provenance(c));
  const std::string side = path + ".provenance.json";
  write_json(side, extra);
  outputs.push_back(side);
}

RunResult cmd_construct(const RunConfig& c) {
  RunResult res;
  PotentialSpec spec;
  nlohmann::json summary = {{"kind", c.kind}};
  if (c.kind != "wholeline" && !c.ledger.empty()) {
    throw ValidationError("a ledger is only produced by --kind wholeline");
  }
  if (c.kind == "thm1") {
    const Thm1Build b = build_thm1_detailed(c.k_max, c.grid_step, c.margin);
    spec = b.spec;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : b.stages) {
      stages.push_back({{"k", s.k}, {"site", s.site}, {"c_n", decimal(s.c_n)}, {"log_value", decimal(s.log_value)}});
    }
    summary["stages"] = stages;
  } else if (c.kind == "sparse") {
    spec = build_sparse(c.first_site, c.stages, c.margin, c.precision.bits);
    const GrowthReport g = check_growth(growth_schedule(spec));
    nlohmann::json slack = nlohmann::json::array();
    for (double s : g.slack) slack.push_back(decimal(s));
    summary["growth_slack"] = slack;
  } else {
    WholelineOptions o;
    o.stages_per_side = c.stages;
    o.eps0 = c.eps0;
    o.eps_ratio = c.eps_ratio;
    o.margin = c.margin;
    o.grids.energy_points = c.certificate_energy_points;
    o.grids.delta_points = c.certificate_delta_points;
    const WholelineBuild b = build_wholeline(o);
    spec = b.spec;
    if (!c.ledger.empty()) {
      write_json(c.ledger, ledger_to_json(b.ledger));
      res.outputs.push_back(c.ledger);
      write_sidecar(c.ledger, c, {{"kind", c.kind}}, res.outputs);
    }
  }
  write_text(c.out, serialize(spec));
  res.outputs.push_back(c.out);
  write_sidecar(c.out, c, summary, res.outputs);
  return res;
}

RunResult cmd_mfunc(const RunConfig& c, const PotentialSpec& spec) {
  RunResult res;
  std::filesystem::create_directories(c.out);
  const Provenance p = provenance(c);
  const std::string side = side_text(c.side, spec);
  const auto E = c.e_grid.points(), eps = c.eps_grid.points();
  const auto th = theta_grid(c.theta_points);
  Table m;
  m.columns = {"E", "eps", "theta_or_sup", "re_m", "im_m", "abs_m"};
  if (side == "line") {
    const std::size_t n = E.size() * eps.size();
    std::vector<Complex> M(n);
    parallel_for(n, [&](std::size_t i) { M[i] = M_wholeline(spec, Complex(E[i / eps.size()], eps[i % eps.size()])).value; });
    for (std::size_t i = 0; i < n; ++i) {
      m.add({cell(E[i / eps.size()]), cell(eps[i % eps.size()]), "M", cell(M[i].real()), cell(M[i].imag()),
             cell(std::abs(M[i]))});
    }
  } else {
    const PotentialSpec half = side == "plus" ? plus_half(spec) : negative_half(spec);
    const std::size_t cols = th.size() + 1, n = E.size() * eps.size() * cols;
    std::vector<Complex> v(n);
    parallel_for(n, [&](std::size_t i) {
      const Complex z(E[i / (eps.size() * cols)], eps[(i / cols) % eps.size()]);
      const std::size_t j = i % cols;
      if (j == th.size()) {
        v[i] = sup_over_theta(half, z).sup();
      } else if (spec.domain() == Domain::half_line) {
        v[i] = m_halfline(spec, th[j], z).value;
      } else {
        v[i] = side == "plus" ? m_plus(spec, th[j], z) : m_minus(spec, th[j], z);
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i % cols;
      const bool sup = j == th.size();
      m.add({cell(E[i / (eps.size() * cols)]), cell(eps[(i / cols) % eps.size()]), sup ? "sup" : cell(th[j]),
             sup ? "nan" : cell(v[i].real()), sup ? "nan" : cell(v[i].imag()), cell(sup ? v[i].real() : std::abs(v[i]))});
    }
  }
  const std::string m_path = (std::filesystem::path(c.out) / "m.csv").string();
  write_text(m_path, render_csv(m, p));
  res.outputs.push_back(m_path);
  if (spec.domain() == Domain::whole_line) {
    const std::size_t n = E.size() * eps.size();
    std::vector<DklSample> d(n);
    parallel_for(n, [&](std::size_t i) { d[i] = check_dkl(spec, Complex(E[i / eps.size()], eps[i % eps.size()]), c.dkl_slack); });
    Table t;
    t.columns = {"E", "eps", "abs_M", "sup_abs_m", "dkl_ok"};
    for (const auto& s : d) {
      t.add({cell(s.z.real()), cell(s.z.imag()), cell(s.abs_M), cell(s.sup_plus.sup()), cell(s.holds)});
    }
    const std::string path = (std::filesystem::path(c.out) / "dkl.csv").string();
    write_text(path, render_csv(t, p));
    res.outputs.push_back(path);
  }
  return res;
}

RunResult cmd_dims(const RunConfig& c, const PotentialSpec& spec) {
  RunResult res;
  std::filesystem::create_directories(c.out);
  const Provenance p = provenance(c);
  const Side side = side_from_string(side_text(c.side, spec));
  const MassSource source = mass_source_from_string(c.source);
  const auto E = c.e_grid.points();
  const auto eps = descending(c.eps_grid.points());
  std::vector<DimensionReport> reports(E.size());
  std::vector<ScalingWindow> windows(E.size());
  parallel_for(E.size(), [&](std::size_t i) {
    windows[i] = scaling_window(spec, side, c.theta, E[i], eps, source, c.oracle_n);
    reports[i] = dimension_report(windows[i], c.alphas, c.divergence_threshold, c.scaling_tol);
  });
  Table w, d;
  w.columns = {"E", "source", "eps", "mass"};
  d.columns = {"E", "gamma_minus", "gamma_plus", "alpha", "T_flag", "U_flag", "Q", "R"};
  for (std::size_t i = 0; i < E.size(); ++i) {
    for (std::size_t j = 0; j < eps.size(); ++j) {
      w.add({cell(E[i]), to_string(source), cell(eps[j]), cell(windows[i].masses[j])});
    }
    for (const auto& a : reports[i].alphas) {
      d.add({cell(E[i]), cell(reports[i].gamma.gamma_minus), cell(reports[i].gamma.gamma_plus), cell(a.alpha),
             cell(a.t_flag), cell(a.u_flag), cell(a.probes.Q), cell(a.probes.R)});
    }
  }
  auto emit = [&](const char* name, const Table& t) {
    const std::string path = (std::filesystem::path(c.out) / name).string();
    write_text(path, render_csv(t, p));
    res.outputs.push_back(path);
  };
  emit("windows.csv", w);
  emit("dims.csv", d);
  if (spec.domain() == Domain::whole_line) {
    const auto delta = descending(c.delta_grid.points());
    std::vector<LineClassification> cls(E.size());
    parallel_for(E.size(), [&](std::size_t i) {
      cls[i] = classify_line_energy(spec, E[i], c.classify_length, delta, c.g_threshold);
    });
    Table t;
    t.columns = {"E", "theta_E", "min_G", "liminf_flag", "matched", "degenerate"};
    for (const auto& x : cls) {
      t.add({cell(x.E), cell(x.theta_E), cell(x.min_G), cell(x.liminf_flag), cell(x.matched), cell(x.degenerate)});
    }
    emit("classification.csv", t);
  }
  return res;
}

RunResult cmd_verify(const RunConfig& c, const PotentialSpec& spec, const ConstructionLedger* ledger) {
  RunResult res;
  const SuiteResult s = run_suite(c, spec, ledger);
  if (!c.out.empty()) {
    write_text(c.out, render_csv(s.table, provenance(c)));
    res.outputs.push_back(c.out);
  }
  if (!s.passed) {
    res.exit_code = kExitVerifyBase + suite_index(c.suite);
    res.message = "verify " + c.suite + " failed: " + s.failure;
  }
  return res;
}

RunResult cmd_report(const RunConfig& c, const PotentialSpec& spec, const ConstructionLedger* ledger) {
  RunResult res;
  nlohmann::json doc;
  doc["provenance"] = to_json(provenance(c));
  std::size_t log_only = 0;
  for (const auto& b : spec.barriers()) log_only += b.log_only() ? 1 : 0;
  doc["spec"] = {{"domain", to_string(spec.domain())},
                 {"barriers", spec.barriers().size()},
                 {"log_only_barriers", log_only},
                 {"support_radius", support_radius(spec)}};
  auto growth = [](const PotentialSpec& half) {
    const GrowthReport g = check_growth(growth_schedule(half));
    const double min_slack = g.slack.empty() ? 0.0 : *std::min_element(g.slack.begin(), g.slack.end());
    return nlohmann::json{{"holds", g.holds}, {"stages", g.slack.size()}, {"min_slack", decimal(min_slack)}};
  };
  doc["growth"]["plus"] = growth(plus_half(spec));
  if (spec.domain() == Domain::whole_line) doc["growth"]["minus"] = growth(negative_half(spec));
  doc["gaps_increase"] = check_gaps(spec);
  const EssFillReport e = ess_fill(spec, c.ess_n, c.ess_resolution);
  doc["ess_fill"] = {{"N", e.N},
                     {"resolution", decimal(e.resolution)},
                     {"max_gap", decimal(e.max_gap)},
                     {"outliers", e.outliers},
                     {"barrier_count", e.barrier_count}};
  if (ledger) {
    const ReplayReport rep = replay_ledger(spec, *ledger);
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : rep.stages) {
      stages.push_back({{"stage", s.stage},
                        {"side", to_string(s.side)},
                        {"passed", s.passed()},
                        {"failures", s.failures()},
                        {"certificate_worst", decimal(s.certificate_worst)}});
    }
    doc["ledger"] = {{"passed", rep.passed()}, {"first_failure", rep.first_failure()},
                     {"gaps_ok", rep.gaps_ok}, {"stages", stages}};
  }
  doc["notes"] = nlohmann::json::array({kTruncationNote});
  if (c.out.empty()) {
    res.message = doc.dump(2);
  } else {
    write_json(c.out, doc);
    res.outputs.push_back(c.out);
  }
  return res;
}

}  // namespace

std::vector<double> theta_grid(int n) {
  if (n < 1) throw ArgumentError("theta_grid: need at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = std::numbers::pi * j / n;
  return out;
}

PotentialSpec load_spec(const std::string& path) { return parse_potential(read_text(path)); }

ConstructionLedger load_ledger(const std::string& path) {
  try {
    return ledger_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("ledger '" + path + "' is not valid JSON: " + e.what());
  }
}

SuiteResult run_suite(const RunConfig& c, const PotentialSpec& spec, const ConstructionLedger* ledger) {
  set_default_workers(c.workers);
  const std::string& s = c.suite;
  if (s == "jl") return suite_jl(c, spec);
  if (s == "dt") return suite_dt(c, spec);
  if (s == "dkl") return suite_dkl(c, spec);
  if (s == "thm1") return suite_thm1(c, spec);
  if (s == "growth") return suite_growth(c, spec);
  if (s == "lyapunov") return suite_lyapunov(c, spec);
  if (s == "ledger") {
    if (!ledger) throw ArgumentError("suite ledger needs a ledger");
    return suite_ledger(spec, *ledger);
  }
  if (s == "cocycle") return suite_cocycle(c, spec);
  if (s == "oracle") return suite_oracle(c, spec);
  if (s == "ess") return suite_ess(c, spec);
  throw ValidationError("unknown verify suite '" + s + "'");
}

RunResult run(const RunConfig& c) {
  RunResult res;
  try {
    validate(c);
  } catch (const std::exception& e) {
    return {kExitConfig, e.what(), {}};
  }
  set_default_workers(c.workers);
  PotentialSpec spec;
  ConstructionLedger ledger;
  const bool has_ledger = c.command != "construct" && !c.ledger.empty();
  try {
    if (c.command != "construct") spec = load_spec(c.spec);
    if (has_ledger) ledger = load_ledger(c.ledger);
  } catch (const std::exception& e) {
    return {kExitInput, e.what(), {}};
  }
  try {
    if (c.command == "construct") return cmd_construct(c);
    if (c.command == "mfunc") return cmd_mfunc(c, spec);
    if (c.command == "dims") return cmd_dims(c, spec);
    if (c.command == "verify") return cmd_verify(c, spec, has_ledger ? &ledger : nullptr);
    return cmd_report(c, spec, has_ledger ? &ledger : nullptr);
  } catch (const ValidationError& e) {
    return {kExitConfig, e.what(), {}};
  } catch (const std::exception& e) {
    return {kExitRuntime, e.what(), {}};
  }
}

}  // namespace fracspec

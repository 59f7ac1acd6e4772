#include "fracspec/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracspec/error.hpp"
#include "fracspec/herglotz.hpp"
#include "fracspec/solution.hpp"

namespace fracspec {

const char* to_string(MassSource source) {
  switch (source) {
    case MassSource::oracle: return "oracle";
    case MassSource::proxy: return "proxy";
    case MassSource::synthetic: return "synthetic";
  }
  return "?";
}

MassSource mass_source_from_string(const std::string& s) {
  if (s == "oracle") return MassSource::oracle;
  if (s == "proxy") return MassSource::proxy;
  if (s == "synthetic") return MassSource::synthetic;
  throw ValidationError("unknown mass source '" + s + "'");
}

const char* to_string(ScalingClass c) {
  switch (c) {
    case ScalingClass::zero: return "zero";
    case ScalingClass::finite: return "finite";
    case ScalingClass::infinite: return "infinite";
    case ScalingClass::indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

void require_decreasing(const std::vector<double>& eps) {
  if (eps.empty()) throw ArgumentError("eps grid is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ArgumentError("eps grid must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ArgumentError("eps grid must be strictly decreasing");
  }
}

Complex borel_transform(const PotentialSpec& spec, Side side, double theta, Complex z) {
  if (spec.domain() == Domain::half_line) {
    if (side != Side::plus) throw ArgumentError("half-line specs only have the plus side");
    return m_halfline(spec, theta, z).value;
  }
  switch (side) {
    case Side::plus: return m_plus(spec, theta, z);
    case Side::minus: return m_minus(spec, theta, z);
    case Side::line: return M_wholeline(spec, z).value;
  }
  throw ArgumentError("unknown side");
}

// Local exponents p_j with values ~ eps^p between consecutive grid points.
std::vector<double> local_exponents(const std::vector<double>& eps, const std::vector<double>& v) {
  std::vector<double> p;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    p.push_back(std::log(v[j + 1] / v[j]) / std::log(eps[j + 1] / eps[j]));
  }
  return p;
}

}  // namespace

ScalingWindow scaling_window(const PotentialSpec& spec, Side side, double theta, double E,
                             const std::vector<double>& eps_grid, MassSource source,
                             Site oracle_N) {
  require_decreasing(eps_grid);
  ScalingWindow w;
  w.E = E;
  w.eps = eps_grid;
  w.source = source;
  if (source == MassSource::synthetic) {
    throw ArgumentError("scaling_window: synthetic windows come from power_law_window");
  }
  if (source == MassSource::oracle) {
    const AtomicMeasure mu = truncated_measure(spec, side, theta, oracle_N);
    for (double e : eps_grid) {
      w.masses.push_back(interval_mass(mu, E - e, E + e));
      const Complex m = m_truncated(mu, Complex(E, e));
      w.im_m.push_back(m.imag());
      w.abs_m.push_back(std::abs(m));
    }
    const double e_min = eps_grid.back();
    const auto count = std::count_if(mu.atoms.begin(), mu.atoms.end(), [&](const Atom& a) {
      return a.energy > E - e_min && a.energy < E + e_min;
    });
    if (count < 10) {
      w.resolution_warning = true;
      w.note = "only " + std::to_string(count) + " eigenvalues within the smallest interval (N=" +
               std::to_string(oracle_N) + ")";
    }
    return w;
  }
  for (double e : eps_grid) {
    const Complex m = borel_transform(spec, side, theta, Complex(E, e));
    w.masses.push_back(2.0 * e * m.imag());
    w.im_m.push_back(m.imag());
    w.abs_m.push_back(std::abs(m));
  }
  return w;
}

ScalingWindow power_law_window(double E, const std::vector<double>& eps_grid, double s) {
  require_decreasing(eps_grid);
  if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("power_law_window: s must lie in [0, 1]");
  ScalingWindow w;
  w.E = E;
  w.eps = eps_grid;
  w.source = MassSource::synthetic;
  for (double e : eps_grid) {
    const double im = s == 0.0 ? 1.0 / e
                               : s * std::pow(e, s - 1.0) * std::numbers::pi /
                                     (2.0 * std::sin(0.5 * std::numbers::pi * s));
    w.masses.push_back(std::pow(e, s));
    w.im_m.push_back(im);
    w.abs_m.push_back(im);  // symmetric density: re m = 0
  }
  return w;
}

GammaEstimate gamma_estimates(const ScalingWindow& window) {
  std::vector<double> eps, mass;
  GammaEstimate g;
  for (std::size_t j = 0; j < window.eps.size(); ++j) {
    if (window.masses[j] > 0.0) {
      eps.push_back(window.eps[j]);
      mass.push_back(window.masses[j]);
    } else {
      ++g.excluded;
    }
  }
  if (eps.size() < 4) throw ArgumentError("gamma_estimates: needs at least 4 points with positive mass");
  g.slopes = local_exponents(eps, mass);
  g.gamma_minus = *std::min_element(g.slopes.begin(), g.slopes.end());
  g.gamma_plus = *std::max_element(g.slopes.begin(), g.slopes.end());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const double x = std::log(eps[j]), y = std::log(mass[j]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  g.fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return g;
}

ScalingClass classify_scaling(const std::vector<double>& eps, const std::vector<double>& values,
                              double tol) {
  if (eps.size() != values.size() || eps.size() < 2) {
    throw ArgumentError("classify_scaling: needs matching grids of at least 2 points");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) return ScalingClass::indeterminate;
  }
  const auto p = local_exponents(eps, values);
  if (std::all_of(p.begin(), p.end(), [&](double x) { return x > tol; })) return ScalingClass::zero;
  if (std::all_of(p.begin(), p.end(), [&](double x) { return x < -tol; })) return ScalingClass::infinite;
  if (std::all_of(p.begin(), p.end(), [&](double x) { return std::abs(x) <= tol; })) {
    return ScalingClass::finite;
  }
  return ScalingClass::indeterminate;
}

AlphaDerivatives alpha_derivatives(const ScalingWindow& window, double alpha, double threshold,
                                   double slope_tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha_derivatives: alpha must lie in (0, 1)");
  AlphaDerivatives d;
  d.upper = 0.0;
  d.lower = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < window.eps.size(); ++j) {
    const double r = window.masses[j] / std::pow(window.eps[j], alpha);
    d.upper = std::max(d.upper, r);
    d.lower = std::min(d.lower, r);
  }
  const GammaEstimate g = gamma_estimates(window);
  d.upper_divergent = d.upper > threshold || g.gamma_minus < alpha - slope_tol;
  d.lower_divergent = d.lower > threshold || g.gamma_plus < alpha - slope_tol;
  return d;
}

QrProbes qr_probes(const ScalingWindow& window, double alpha, double tol) {
  QrProbes q;
  std::vector<double> qv, rv;
  for (std::size_t j = 0; j < window.eps.size(); ++j) {
    const double f = std::pow(window.eps[j], 1.0 - alpha);
    qv.push_back(f * window.im_m[j]);
    rv.push_back(f * window.abs_m[j]);
  }
  q.Q = *std::max_element(qv.begin(), qv.end());
  q.R = *std::max_element(rv.begin(), rv.end());
  q.q_class = classify_scaling(window.eps, qv, tol);
  q.r_class = classify_scaling(window.eps, rv, tol);
  return q;
}

QrProbes qr_probes(const PotentialSpec& half_line, double theta, double E, double alpha,
                   const std::vector<double>& eps_grid, double tol) {
  return qr_probes(scaling_window(half_line, Side::plus, theta, E, eps_grid, MassSource::proxy),
                   alpha, tol);
}

bool AlphaReport::classes_agree() const {
  return d_class == probes.q_class && d_class == probes.r_class &&
         d_class != ScalingClass::indeterminate;
}

DimensionReport dimension_report(const ScalingWindow& window, const std::vector<double>& alphas,
                                 double threshold, double tol) {
  DimensionReport r;
  r.E = window.E;
  r.source = window.source;
  r.eps_max = window.eps.front();
  r.eps_min = window.eps.back();
  r.points = static_cast<int>(window.eps.size());
  r.threshold = threshold;
  r.gamma = gamma_estimates(window);
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  for (double alpha : sorted) {
    AlphaReport a;
    a.alpha = alpha;
    a.derivatives = alpha_derivatives(window, alpha, threshold);
    std::vector<double> ratio;
    for (std::size_t j = 0; j < window.eps.size(); ++j) {
      ratio.push_back(window.masses[j] / std::pow(window.eps[j], alpha));
    }
    a.d_class = classify_scaling(window.eps, ratio, tol);
    a.probes = qr_probes(window, alpha, tol);
    a.t_flag = a.derivatives.upper_divergent;
    a.u_flag = a.derivatives.lower_divergent;
    r.alphas.push_back(a);
  }
  return r;
}

double jlt_probe(const ScalingWindow& window, double eta) {
  double p = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < window.eps.size(); ++j) {
    p = std::min(p, std::pow(window.eps[j], 1.0 - eta) * window.im_m[j]);
  }
  return p;
}

JltReport jlt_check(double gamma_minus, double gamma_plus, double eta, double probe_liminf,
                    double threshold, double slack) {
  if (!(eta >= 0.0 && eta < 2.0)) throw ArgumentError("jlt_check: eta must lie in [0, 2)");
  JltReport r;
  r.bound = eta * (2.0 - gamma_minus) / (2.0 - eta);
  r.weak_bound = 2.0 * eta / (2.0 - eta);
  r.applicable = probe_liminf > threshold;
  if (r.applicable) {
    r.holds = gamma_plus <= r.bound + slack;
    r.weak_holds = gamma_plus <= r.weak_bound + slack;
  }
  return r;
}

double g_ratio(const PotentialSpec& line, double theta, Complex z) {
  const double a = m_plus(line, theta, z).imag();
  const double b = m_minus(line, theta, z).imag();
  return a / (a + b);
}

LineClassification classify_line_energy(const PotentialSpec& line, double E, double L,
                                        const std::vector<double>& delta_grid, double threshold,
                                        double match_tol) {
  if (line.domain() != Domain::whole_line) throw ArgumentError("classify_line_energy: expected a whole-line spec");
  require_decreasing(delta_grid);
  constexpr double pi = std::numbers::pi;
  LineClassification c;
  c.E = E;
  const SubordinateTheta plus = subordinate_theta(positive_half(line), E, L);
  const SubordinateTheta minus = subordinate_theta(negative_half(line), E, L);
  if (plus.degenerate || minus.degenerate) {
    c.degenerate = true;
    return c;
  }
  c.theta_E = plus.theta;
  c.theta_minus = minus.theta;
  // The reflected minus side sees the same initial data at angle pi/2 - theta.
  double d = std::fmod(std::abs(minus.theta - (0.5 * pi - plus.theta)), pi);
  d = std::min(d, pi - d);
  c.matched = d <= match_tol;
  c.delta = delta_grid;
  for (double delta : delta_grid) c.G.push_back(g_ratio(line, c.theta_E, Complex(E, delta)));
  c.min_G = *std::min_element(c.G.begin(), c.G.end());
  c.liminf_flag = c.min_G < threshold;
  return c;
}

}  // namespace fracspec

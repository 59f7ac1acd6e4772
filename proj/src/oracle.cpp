#include "fracspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "fracspec/error.hpp"
#include "fracspec/herglotz.hpp"

namespace fracspec {

TridiagonalEigen tridiagonal_eigen(std::vector<double> d, std::vector<double> e,
                                   const std::vector<std::size_t>& tracked) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (e.size() + 1 < n) throw ArgumentError("tridiagonal_eigen: off-diagonal too short");
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  for (double x : d) {
    if (!std::isfinite(x)) throw ArgumentError("tridiagonal_eigen: non-finite diagonal");
  }

  std::vector<std::vector<double>> z(tracked.size(), std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < tracked.size(); ++r) {
    if (tracked[r] >= n) throw ArgumentError("tridiagonal_eigen: tracked row out of range");
    z[r][tracked[r]] = 1.0;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 100) throw IntegrityError("tridiagonal eigensolver failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (auto& row : z) {
            const double t = row[i + 1];
            row[i + 1] = s * row[i] + c * t;
            row[i] = c * row[i] - s * t;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  TridiagonalEigen out;
  out.values.resize(n);
  out.rows.assign(tracked.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = d[order[j]];
    for (std::size_t r = 0; r < tracked.size(); ++r) out.rows[r][j] = z[r][order[j]];
  }
  return out;
}

double AtomicMeasure::total() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

const char* to_string(Side side) {
  switch (side) {
    case Side::plus: return "plus";
    case Side::minus: return "minus";
    case Side::line: return "line";
  }
  return "?";
}

Side side_from_string(const std::string& s) {
  if (s == "plus") return Side::plus;
  if (s == "minus") return Side::minus;
  if (s == "line") return Side::line;
  throw ValidationError("unknown side '" + s + "'");
}

namespace {

struct Truncation {
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<double> isolated;  // eigenvalues of split-off sites (may be +inf)
  std::vector<std::size_t> isolated_index;
};

// Diagonal for sites first..last of `spec`, splitting off huge barriers.
Truncation build(const PotentialSpec& spec, Site first, Site last) {
  Truncation t;
  const auto n = static_cast<std::size_t>(last - first + 1);
  t.diag.assign(n, 0.0);
  t.off.assign(n > 0 ? n - 1 : 0, 1.0);
  for (const auto& b : spec.barriers()) {
    if (b.site < first || b.site > last) continue;
    const auto i = static_cast<std::size_t>(b.site - first);
    if (b.log_value < std::log(kDecoupleThreshold)) {
      t.diag[i] += b.value;
      continue;
    }
    const double inv = std::exp(-b.log_value);
    if (i > 0) {
      t.off[i - 1] = 0.0;
      t.diag[i - 1] -= inv;
    }
    if (i + 1 < n) {
      t.off[i] = 0.0;
      t.diag[i + 1] -= inv;
    }
    t.isolated.push_back(b.linear_or_inf());
    t.isolated_index.push_back(i);
    t.diag[i] = 0.0;  // placeholder, removed from the matrix below
  }
  return t;
}

// Eigen-decomposition of a truncation with isolated sites removed; weights are
// the summed squares of the tracked rows.
AtomicMeasure decompose(Truncation t, const std::vector<std::size_t>& tracked) {
  const std::size_t n = t.diag.size();
  std::vector<bool> isolated(n, false);
  for (auto i : t.isolated_index) isolated[i] = true;

  AtomicMeasure out;
  // Split into maximal runs of non-isolated sites joined by nonzero couplings.
  std::size_t start = 0;
  while (start < n) {
    if (isolated[start]) {
      double w = 0.0;
      for (auto r : tracked) w += r == start ? 1.0 : 0.0;
      const auto k = static_cast<std::size_t>(
          std::find(t.isolated_index.begin(), t.isolated_index.end(), start) -
          t.isolated_index.begin());
      out.atoms.push_back({t.isolated[k], w});
      ++start;
      continue;
    }
    std::size_t end = start;
    while (end + 1 < n && !isolated[end + 1] && t.off[end] != 0.0) ++end;
    std::vector<double> diag(t.diag.begin() + static_cast<std::ptrdiff_t>(start),
                             t.diag.begin() + static_cast<std::ptrdiff_t>(end + 1));
    std::vector<double> off(t.off.begin() + static_cast<std::ptrdiff_t>(start),
                            t.off.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> local;
    for (auto r : tracked) {
      if (r >= start && r <= end) local.push_back(r - start);
    }
    const auto eig = tridiagonal_eigen(std::move(diag), std::move(off), local);
    for (std::size_t j = 0; j < eig.values.size(); ++j) {
      double w = 0.0;
      for (const auto& row : eig.rows) w += row[j] * row[j];
      out.atoms.push_back({eig.values[j], w});
    }
    start = end + 1;
  }
  std::stable_sort(out.atoms.begin(), out.atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.energy < b.energy; });
  return out;
}

AtomicMeasure half_line_measure(const PotentialSpec& half, double theta, Site N) {
  if (is_half_pi(theta)) {
    Truncation t = build(half, 2, N + 1);
    return decompose(std::move(t), {0});
  }
  Truncation t = build(half, 1, N);
  const double corner = -std::tan(theta);
  if (!t.isolated_index.empty() && t.isolated_index.front() == 0) {
    t.isolated.front() += corner;
  } else {
    t.diag[0] += corner;
  }
  return decompose(std::move(t), {0});
}

}  // namespace

AtomicMeasure truncated_measure(const PotentialSpec& spec, Side side, double theta, Site N) {
  if (N < 1) throw ArgumentError("truncated_measure: requires N >= 1");
  if (!(theta >= 0.0 && theta < std::numbers::pi)) throw ArgumentError("theta must lie in [0, pi)");
  if (spec.domain() == Domain::half_line) {
    if (side != Side::plus) throw ArgumentError("half-line specs only have the plus side");
    return half_line_measure(spec, theta, N);
  }
  switch (side) {
    case Side::plus:
      return half_line_measure(positive_half(spec), theta, N);
    case Side::minus: {
      double reflected = 0.5 * std::numbers::pi - theta;
      if (reflected < 0.0) reflected += std::numbers::pi;
      return half_line_measure(negative_half(spec), reflected, N);
    }
    case Side::line: {
      Truncation t = build(spec, -N, N);
      const auto origin = static_cast<std::size_t>(N);
      return decompose(std::move(t), {origin, origin + 1});
    }
  }
  throw ArgumentError("unknown side");
}

std::complex<double> m_truncated(const AtomicMeasure& measure, std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw DomainError("m_truncated needs im z > 0");
  std::complex<double> s = 0.0;
  for (const auto& a : measure.atoms) {
    if (a.weight == 0.0 || !std::isfinite(a.energy)) continue;
    s += a.weight / (a.energy - z);
  }
  return s;
}

double interval_mass(const AtomicMeasure& measure, double a, double b) {
  if (!(a < b)) throw ArgumentError("interval_mass: requires a < b");
  const auto lo = std::upper_bound(measure.atoms.begin(), measure.atoms.end(), a,
                                   [](double x, const Atom& at) { return x < at.energy; });
  const auto hi = std::lower_bound(measure.atoms.begin(), measure.atoms.end(), b,
                                   [](const Atom& at, double x) { return at.energy < x; });
  double s = 0.0;
  for (auto it = lo; it < hi; ++it) s += it->weight;
  return s;
}

EssFillReport ess_fill(const PotentialSpec& spec, Site N, double resolution) {
  if (N < 100) throw ArgumentError("ess_fill: requires N >= 100");
  if (!(resolution >= 0.0 && resolution < 2.0)) throw ArgumentError("ess_fill: bad resolution");
  const AtomicMeasure mu = spec.domain() == Domain::half_line
                               ? half_line_measure(spec, 0.0, N)
                               : decompose(build(spec, -N, N), {});
  EssFillReport r;
  r.N = N;
  r.resolution = resolution;
  r.barrier_count = spec.barriers().size();
  const double lo = -2.0 + resolution, hi = 2.0 - resolution;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (const auto& a : mu.atoms) {
    if (a.energy < -2.0 || a.energy > 2.0) ++r.outliers;
    if (a.energy < lo || a.energy > hi) continue;
    ++r.in_window;
    if (!std::isnan(prev)) r.max_gap = std::max(r.max_gap, a.energy - prev);
    prev = a.energy;
  }
  return r;
}

}  // namespace fracspec

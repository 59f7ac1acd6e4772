#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracspec/error.hpp"
#include "fracspec/solution.hpp"
#include "gen.hpp"

using namespace fracspec;

namespace {

// u_theta or v_theta by direct recursion on 0..n.
std::vector<double> recurse(const PotentialSpec& s, double E, double u0, double u1, Site n) {
  std::vector<double> u{u0, u1};
  for (Site k = 1; k < n; ++k) u.push_back((E - s.eval(k)) * u[k] - u[k - 1]);
  return u;
}

struct DirectGram {
  double uu = 0.0, uv = 0.0, vv = 0.0;
};

DirectGram direct_gram(const std::vector<double>& u, const std::vector<double>& v, double L) {
  DirectGram g;
  const auto whole = static_cast<Site>(std::floor(L));
  for (Site n = 1; n <= whole; ++n) {
    g.uu += u[n] * u[n];
    g.uv += u[n] * v[n];
    g.vv += v[n] * v[n];
  }
  const double f = L - static_cast<double>(whole);
  g.uu += f * u[whole + 1] * u[whole + 1];
  g.uv += f * u[whole + 1] * v[whole + 1];
  g.vv += f * v[whole + 1] * v[whole + 1];
  return g;
}

}  // namespace

TEST_SUITE("solution") {
  TEST_CASE("free values by hand") {
    const SolutionFrame f = solve(PotentialSpec::free(), 0.0, 0.0, 6);
    const double u[] = {0, 1, 0, -1, 0, 1};
    const double v[] = {1, 0, -1, 0, 1};
    for (int n = 0; n < 6; ++n) CHECK(f.u(n) == doctest::Approx(u[n]));
    for (int n = 0; n < 5; ++n) CHECK(f.v(n) == doctest::Approx(v[n]));
    // theta = pi/2 turns u into -v_0.
    const SolutionFrame g = solve(PotentialSpec::free(), 0.0, std::numbers::pi / 2, 6);
    for (int n = 0; n < 5; ++n) CHECK(g.u(n) == doctest::Approx(-v[n]).epsilon(1e-12));
  }

  TEST_CASE("norms, omega and the length scale on the free operator") {
    const SolutionFrame f = solve(PotentialSpec::free(), 0.0, 0.0, 10);
    CHECK(norm_L(f, 4.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(norm_L(f, 4.5) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
    CHECK(omega(PotentialSpec::free(), 0.0, 4.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(length_scale(PotentialSpec::free(), 0.0, 0.5) == doctest::Approx(4.0).epsilon(1e-10));
    for (double L = 3.0; L < 3.999; L += 0.01) CHECK(omega(PotentialSpec::free(), 0.0, L) < 2.0);
    CHECK_THROWS_AS(norm_L(f, 0.5), ArgumentError);
    CHECK_THROWS_AS(norm_L(f, 11.0), ArgumentError);
    CHECK_THROWS_AS(length_scale(PotentialSpec::free(), 0.0, 0.0), DomainError);
  }

  TEST_CASE("length_scale inverts omega") {
    const PotentialSpec s(Domain::half_line, {Barrier::from_value(3, 2.0), Barrier::from_value(5, 0.7)});
    for (double E : {-1.3, 0.2, 1.7}) {
      const double w7 = omega(s, E, 7.0);
      CHECK(length_scale(s, E, 1.0 / w7) == doctest::Approx(7.0).epsilon(1e-8));
    }
  }

  TEST_CASE("subordinacy ratio and the subordinate angle") {
    CHECK(subordinacy_ratio(PotentialSpec::free(), 0.0, 0.0, 4.0) == doctest::Approx(1.0));
    CHECK(subordinacy_ratio(PotentialSpec::free(), 0.0, std::numbers::pi / 4, 4.0) == doctest::Approx(1.0));
    CHECK(subordinate_theta(PotentialSpec::free(), 0.0, 4.0).degenerate);

    // A huge barrier at site 3 singles out the solution vanishing there.
    const PotentialSpec s(Domain::half_line, {Barrier::from_value(3, 1e8)});
    const double L = 40.0;
    const SubordinateTheta t = subordinate_theta(s, 0.0, L);
    REQUIRE_FALSE(t.degenerate);
    double best = 0.0, best_norm = INFINITY;
    for (int j = 0; j < 1000; ++j) {
      const double th = j * std::numbers::pi / 1000.0;
      const double n = solve(s, 0.0, th, 41).norm_u(L);
      if (n < best_norm) best_norm = n, best = th;
    }
    const double d = std::abs(t.theta - best);
    CHECK(std::min(d, std::numbers::pi - d) < 1e-3 + std::numbers::pi / 1000.0);
  }

  TEST_CASE("recursion and Gram quantities match a direct computation (property)") {
    gen::Rng r(31);
    for (int t = 0; t < 200; ++t) {
      const PotentialSpec s = gen::half_line(r, 4, 60, 0.1, 3.0);
      const double E = r.uniform(-2.2, 2.2), th = r.uniform(0.0, std::numbers::pi);
      const Site N = 80;
      const SolutionFrame f = solve(s, E, th, N);
      const auto u = recurse(s, E, -std::sin(th), std::cos(th), N + 1);
      const auto v = recurse(s, E, std::cos(th), std::sin(th), N + 1);
      for (Site n = 0; n <= N + 1; n += 3) {
        const double scale = std::max(1.0, std::abs(u[n]));
        CHECK(std::abs(f.u(n) - u[n]) / scale < 1e-9);
        CHECK(std::abs(f.v(n) - v[n]) / std::max(1.0, std::abs(v[n])) < 1e-9);
      }
      const double L = r.uniform(1.0, static_cast<double>(N));
      const DirectGram g = direct_gram(u, v, L);
      CHECK(f.norm_u(L) == doctest::Approx(std::sqrt(g.uu)).epsilon(1e-9));
      CHECK(f.norm_v(L) == doctest::Approx(std::sqrt(g.vv)).epsilon(1e-9));
      const double det = g.uu * g.vv - g.uv * g.uv;
      if (det > 1e-6 * g.uu * g.vv) CHECK(f.omega(L) == doctest::Approx(std::sqrt(det)).epsilon(1e-7));
    }
  }

  TEST_CASE("Wronskian equals one (property)") {
    gen::Rng r(32);
    for (int t = 0; t < 60; ++t) {
      const PotentialSpec s = gen::half_line(r, 5, 10000, 0.1, 3.0);
      const double E = r.uniform(-1.9, 1.9), th = r.uniform(0.0, std::numbers::pi);
      const SolutionFrame f = solve(s, E, th, 10000);
      double worst = 0.0;
      for (Site n = 0; n < 10000; ++n) worst = std::max(worst, std::abs(f.wronskian(n) - 1.0));
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("Wronskian in extended precision") {
    const PotentialSpec s(Domain::half_line, {Barrier::from_value(4, 30.0), Barrier::from_value(20, 1e5)});
    CHECK(wronskian_deviation_extended(s, 0.4, 1.1, 200, 256) <= 1e-25);
  }

  TEST_CASE("circle sum equals the Gram trace (property)") {
    gen::Rng r(33);
    for (int t = 0; t < 100; ++t) {
      const PotentialSpec s = gen::half_line(r, 4, 50, 0.1, 3.0);
      const double E = r.uniform(-2, 2), L = r.uniform(1.0, 60.0);
      const SolutionFrame base = solve(s, E, 0.0, 61);
      const double trace = std::pow(base.norm_u(L), 2) + std::pow(base.norm_v(L), 2);
      const double th = r.uniform(0.0, std::numbers::pi);
      const SolutionFrame f = solve(s, E, th, 61);
      CHECK(std::pow(f.norm_u(L), 2) + std::pow(f.norm_v(L), 2) == doctest::Approx(trace).epsilon(1e-10));
      CHECK(f.omega(L) == doctest::Approx(base.omega(L)).epsilon(1e-8));
    }
  }

  TEST_CASE("omega and norms are nondecreasing in L (property)") {
    gen::Rng r(34);
    for (int t = 0; t < 50; ++t) {
      const PotentialSpec s = gen::half_line(r, 4, 100, 0.1, 3.0);
      const SolutionFrame f = solve(s, r.uniform(-2, 2), r.uniform(0, 3), 120);
      double prev_w = 0.0, prev_u = 0.0;
      for (double L = 1.0; L <= 120.0; L += 0.37) {
        CHECK(f.omega(L) >= prev_w * (1.0 - 1e-12));
        CHECK(f.norm_u(L) >= prev_u * (1.0 - 1e-12));
        prev_w = f.omega(L);
        prev_u = f.norm_u(L);
      }
    }
  }

  TEST_CASE("scaled recursion stays exact past double range") {
    const PotentialSpec s(Domain::half_line, {Barrier::from_value(5, 1e200), Barrier::from_value(9, 1e200)});
    const SolutionFrame f = solve(s, 0.3, 0.4, 30);
    CHECK(std::isfinite(f.log_norm_u(20.0)));
    CHECK(f.log_abs_u(12) > 400.0 * std::log(10.0) - 5.0);
    // In double the Wronskian is only resolved relative to |u| |v|.
    const double size = std::exp(f.log_abs_u(15) + f.log_abs_v(16));
    CHECK(std::isinf(size));
    const SolutionFrame small = solve(PotentialSpec(Domain::half_line, {Barrier::from_value(5, 1e100)}), 0.3, 0.4, 30);
    const double rel = std::abs(small.wronskian(15) - 1.0) / std::exp(small.log_abs_u(15) + small.log_abs_v(16));
    CHECK(rel < 1e-14);
  }

  TEST_CASE("free tails grow like L^(1/2)") {
    const SolutionFrame f = solve(PotentialSpec::free(), 0.7, 0.3, 100001);
    for (double L : {1e3, 1e4, 1e5}) {
      const double ratio = f.log_norm_u(L) / std::log(L);
      CHECK(ratio > 0.4);
      CHECK(ratio < 0.6);
    }
  }
}

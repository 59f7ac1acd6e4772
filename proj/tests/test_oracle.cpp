#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracspec/constructor.hpp"
#include "fracspec/herglotz.hpp"
#include "fracspec/oracle.hpp"
#include "gen.hpp"

using namespace fracspec;

namespace {
constexpr double kPi = std::numbers::pi;
const std::complex<double> I{0.0, 1.0};
}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("one and two site truncations") {
    const AtomicMeasure one = truncated_measure(PotentialSpec::free(), Side::plus, 0.0, 1);
    REQUIRE(one.atoms.size() == 1);
    CHECK(one.atoms[0].energy == doctest::Approx(0.0));
    CHECK(one.atoms[0].weight == doctest::Approx(1.0));
    CHECK(std::abs(m_truncated(one, I) - I) < 1e-14);

    const AtomicMeasure two = truncated_measure(PotentialSpec::free(), Side::plus, 0.0, 2);
    REQUIRE(two.atoms.size() == 2);
    CHECK(two.atoms[0].energy == doctest::Approx(-1.0));
    CHECK(two.atoms[1].energy == doctest::Approx(1.0));
    CHECK(two.atoms[0].weight == doctest::Approx(0.5));
    CHECK(std::abs(m_truncated(two, I) - 0.5 * I) < 1e-14);
    CHECK(interval_mass(two, -0.5, 0.5) == 0.0);
    CHECK(interval_mass(two, -2.0, 2.0) == doctest::Approx(1.0));
    CHECK(interval_mass(two, two.atoms[0].energy, two.atoms[1].energy) == 0.0);  // open interval
  }

  TEST_CASE("eigensolver contract (property)") {
    gen::Rng r(51);
    for (int t = 0; t < 30; ++t) {
      const auto n = static_cast<std::size_t>(r.integer(2, 120));
      std::vector<double> d(n), e(n - 1);
      for (auto& x : d) x = r.uniform(-3, 3);
      for (auto& x : e) x = r.uniform(0.1, 1.5);
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      const TridiagonalEigen eig = tridiagonal_eigen(d, e, all);
      CHECK(std::is_sorted(eig.values.begin(), eig.values.end()));
      double trace = 0.0;
      for (double x : d) trace += x;
      double sum = 0.0;
      for (double x : eig.values) sum += x;
      CHECK(sum == doctest::Approx(trace).epsilon(1e-10));
      // Residual ||T q - lambda q|| and orthonormality.
      for (std::size_t j = 0; j < n; j += 7) {
        double res = 0.0, nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double tq = d[i] * eig.rows[i][j];
          if (i > 0) tq += e[i - 1] * eig.rows[i - 1][j];
          if (i + 1 < n) tq += e[i] * eig.rows[i + 1][j];
          res = std::max(res, std::abs(tq - eig.values[j] * eig.rows[i][j]));
          nrm += eig.rows[i][j] * eig.rows[i][j];
        }
        CHECK(res < 1e-12 * 10.0);
        CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t k = j + 1; k < n; k += 11) {
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i) dot += eig.rows[i][j] * eig.rows[i][k];
          CHECK(std::abs(dot) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("truncated m-function matches the continued fraction (property)") {
    gen::Rng r(52);
    for (int t = 0; t < 4; ++t) {
      const PotentialSpec s = t == 0 ? PotentialSpec::free() : gen::half_line(r, 4, 300, 0.1, 1e3);
      for (double th : {0.0, kPi / 4, kPi / 2, 5 * kPi / 8}) {
        const AtomicMeasure mu = truncated_measure(s, Side::plus, th, 2000);
        CHECK(mu.total() == doctest::Approx(1.0).epsilon(1e-10));
        for (int j = 0; j < 5; ++j) {
          const std::complex<double> z{r.uniform(-2.5, 2.5), r.uniform(0.05, 1.0)};
          const auto a = m_truncated(mu, z);
          CHECK(a.imag() > 0.0);
          CHECK(std::abs(a - m_halfline(s, th, z).value) <= 1e-6);
        }
      }
    }
  }

  TEST_CASE("whole-line truncation reproduces M") {
    const PotentialSpec line(Domain::whole_line, {Barrier::from_value(-3, 2.0), Barrier::from_value(5, 1.5)});
    const AtomicMeasure mu = truncated_measure(line, Side::line, 0.0, 1500);
    CHECK(mu.total() == doctest::Approx(2.0).epsilon(1e-10));
    for (auto z : {std::complex<double>{0.3, 0.1}, std::complex<double>{-1.7, 0.5}}) {
      CHECK(std::abs(m_truncated(mu, z) - M_wholeline(line, z).value) <= 1e-6);
    }
    const AtomicMeasure minus = truncated_measure(line, Side::minus, 0.7, 1500);
    CHECK(std::abs(m_truncated(minus, {0.2, 0.2}) - m_minus(line, 0.7, {0.2, 0.2})) <= 1e-6);
  }

  TEST_CASE("boundary changes interlace the atoms (property)") {
    gen::Rng r(53);
    for (int t = 0; t < 20; ++t) {
      const PotentialSpec s = gen::half_line(r, 3, 60, 0.1, 5.0);
      const double a = r.uniform(0.0, 0.7), b = a + r.uniform(0.05, 0.8);
      const AtomicMeasure x = truncated_measure(s, Side::plus, a, 80);
      const AtomicMeasure y = truncated_measure(s, Side::plus, b, 80);
      // tan grows with theta, so the corner entry decreases and every eigenvalue moves down,
      // strictly for the atoms that see site 1.
      REQUIRE(x.atoms.size() == y.atoms.size());
      for (std::size_t j = 0; j < x.atoms.size(); ++j) {
        CHECK(y.atoms[j].energy <= x.atoms[j].energy + 1e-12);
        if (x.atoms[j].weight > 1e-8) CHECK(y.atoms[j].energy < x.atoms[j].energy);
        if (j > 0) CHECK(y.atoms[j].energy >= x.atoms[j - 1].energy - 1e-12);
      }
    }
  }

  TEST_CASE("essential spectrum fill") {
    const EssFillReport free = ess_fill(PotentialSpec::free(), 1000, 0.05);
    CHECK(free.max_gap <= 0.02);
    CHECK(free.outliers == 0);
    const PotentialSpec sparse = build_sparse(10, 3, 0.0);
    const EssFillReport s = ess_fill(sparse, 2000, 0.05);
    CHECK(s.max_gap <= 0.05);
    CHECK(s.outliers <= s.barrier_count);
    CHECK(s.barrier_count == 3);
  }

  TEST_CASE("outliers never exceed the barrier count (property)") {
    gen::Rng r(54);
    for (int t = 0; t < 20; ++t) {
      const PotentialSpec s = gen::half_line(r, 6, 400, 0.1, 1e4);
      const EssFillReport e = ess_fill(s, 500, 0.05);
      CHECK(e.outliers <= e.barrier_count);
    }
  }
}

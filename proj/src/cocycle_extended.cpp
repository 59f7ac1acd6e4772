#include <boost/multiprecision/mpfr.hpp>

#include "fracspec/cocycle.hpp"
#include "fracspec/error.hpp"
#include "fracspec/solution.hpp"

namespace fracspec {

namespace {

namespace mp = boost::multiprecision;
using Big = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

struct BigMat {
  Big a, b, c, d;
};

BigMat mul(const BigMat& x, const BigMat& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

Big norm(const BigMat& m) {
  const Big p = sqrt((m.a + m.d) * (m.a + m.d) + (m.c - m.b) * (m.c - m.b));
  const Big q = sqrt((m.a - m.d) * (m.a - m.d) + (m.b + m.c) * (m.b + m.c));
  return (p + q) / 2;
}

class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits) : saved_(Big::default_precision()) {
    Big::default_precision(static_cast<unsigned>(bits * 0.30103) + 1);
  }
  ~PrecisionScope() { Big::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

}  // namespace

double log_norm_extended(const PotentialSpec& spec, double energy, Site k, Site m, unsigned bits) {
  if (k > m) throw ArgumentError("propagate: requires k <= m");
  if (bits < 64) throw ArgumentError("extended precision needs at least 64 mantissa bits");
  PrecisionScope scope(bits);
  const Big e(energy);
  BigMat acc{Big(1), Big(0), Big(0), Big(1)};
  for (Site j = k; j <= m; ++j) {
    const Barrier* b = spec.find(j);
    Big v(0);
    if (b != nullptr) v = b->log_only() ? Big(exp(Big(b->log_value))) : Big(b->value);
    const BigMat t{e - v, Big(-1), Big(1), Big(0)};
    acc = mul(t, acc);
  }
  return static_cast<double>(log(norm(acc)));
}

double lyapunov_estimate_extended(const PotentialSpec& spec, double energy, Site n, unsigned bits) {
  if (n < 1) throw ArgumentError("lyapunov_estimate: requires n >= 1");
  return log_norm_extended(spec, energy, 1, n, bits) / static_cast<double>(n);
}

double wronskian_deviation_extended(const PotentialSpec& spec, double energy, double theta,
                                    Site n_max, unsigned bits) {
  if (n_max < 1) throw ArgumentError("solve: requires N >= 1");
  if (bits < 64) throw ArgumentError("extended precision needs at least 64 mantissa bits");
  PrecisionScope scope(bits);
  const Big e(energy);
  const Big c = cos(Big(theta)), s = sin(Big(theta));
  // Columns: (u(n+1), u(n)) and (v(n+1), v(n)).
  Big u1 = c, u0 = -s, v1 = s, v0 = c;
  Big worst(0);
  for (Site n = 1; n <= n_max + 1; ++n) {
    const Big w = u1 * v0 - u0 * v1;
    const Big dev = abs(w - 1);
    if (dev > worst) worst = dev;
    if (n > n_max) break;
    const Barrier* b = spec.find(n);
    Big v(0);
    if (b != nullptr) v = b->log_only() ? Big(exp(Big(b->log_value))) : Big(b->value);
    const Big a = e - v;
    Big nu = a * u1 - u0;
    Big nv = a * v1 - v0;
    u0 = u1, v0 = v1, u1 = nu, v1 = nv;
  }
  return static_cast<double>(worst);
}

}  // namespace fracspec

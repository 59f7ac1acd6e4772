#include "fracspec/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <mpfr.h>

#include "fracspec/error.hpp"

namespace fracspec {

namespace {

constexpr mpfr_prec_t kTextPrecision = 256;

class MpfrScalar {
 public:
  MpfrScalar() { mpfr_init2(v_, kTextPrecision); }
  ~MpfrScalar() { mpfr_clear(v_); }
  MpfrScalar(const MpfrScalar&) = delete;
  MpfrScalar& operator=(const MpfrScalar&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// Number of mantissa digits in a decimal literal such as "-1.2300e+05".
int mantissa_digits(const std::string& s) {
  int digits = 0;
  for (char c : s) {
    if (c == 'e' || c == 'E') break;
    if (std::isdigit(static_cast<unsigned char>(c))) ++digits;
  }
  return digits;
}

bool is_decimal_literal(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

double exp_correctly_rounded(double x) {
  MpfrScalar v;
  mpfr_set_d(v.get(), x, MPFR_RNDN);
  mpfr_exp(v.get(), v.get(), MPFR_RNDN);
  return mpfr_get_d(v.get(), MPFR_RNDN);
}

double log_correctly_rounded(double x) {
  MpfrScalar v;
  mpfr_set_d(v.get(), x, MPFR_RNDN);
  mpfr_log(v.get(), v.get(), MPFR_RNDN);
  return mpfr_get_d(v.get(), MPFR_RNDN);
}

Barrier Barrier::from_value(Site site, double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ValidationError("barrier value at site " + std::to_string(site) +
                          " must be finite and strictly positive");
  }
  Barrier b;
  b.site = site;
  b.value = value;
  b.log_value = log_correctly_rounded(value);
  b.origin = Origin::linear;
  return b;
}

Barrier Barrier::from_log(Site site, double log_value) {
  if (!std::isfinite(log_value)) {
    throw ValidationError("barrier log-value at site " + std::to_string(site) + " must be finite");
  }
  Barrier b;
  b.site = site;
  b.log_value = log_value;
  b.value = log_value > kLogOnlyThreshold ? std::numeric_limits<double>::infinity()
                                          : exp_correctly_rounded(log_value);
  b.origin = Origin::logarithmic;
  return b;
}

double Barrier::linear_or_inf() const {
  return log_only() ? std::numeric_limits<double>::infinity() : value;
}

std::string log_value_text(const Barrier& b) {
  if (b.origin == Barrier::Origin::logarithmic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", b.log_value);
    return buf;
  }
  // 40 significant digits of ln(value): exp of the text rounds back to `value`.
  MpfrScalar v;
  mpfr_set_d(v.get(), b.value, MPFR_RNDN);
  mpfr_log(v.get(), v.get(), MPFR_RNDN);
  char buf[96];
  mpfr_snprintf(buf, sizeof buf, "%.39Re", v.get());
  return buf;
}

Barrier barrier_from_text(Site site, const std::string& log_text) {
  if (!is_decimal_literal(log_text)) {
    throw ValidationError("log_value '" + log_text + "' at site " + std::to_string(site) +
                          " is not a decimal number");
  }
  if (mantissa_digits(log_text) <= 17) {
    return Barrier::from_log(site, std::strtod(log_text.c_str(), nullptr));
  }
  MpfrScalar v;
  mpfr_set_str(v.get(), log_text.c_str(), 10, MPFR_RNDN);
  const double log_value = mpfr_get_d(v.get(), MPFR_RNDN);
  if (!std::isfinite(log_value)) {
    throw ValidationError("log_value at site " + std::to_string(site) + " is not finite");
  }
  if (log_value > kLogOnlyThreshold) return Barrier::from_log(site, log_value);
  mpfr_exp(v.get(), v.get(), MPFR_RNDN);
  Barrier b;
  b.site = site;
  b.value = mpfr_get_d(v.get(), MPFR_RNDN);
  b.log_value = log_value;
  b.origin = Barrier::Origin::linear;
  return b;
}

PotentialSpec::PotentialSpec(Domain domain, std::vector<Barrier> barriers) : domain_(domain) {
  for (const auto& b : barriers) {
    validate_site(b.site);
    if (find(b.site) != nullptr) {
      throw ValidationError("duplicate barrier site " + std::to_string(b.site));
    }
    set(b);
  }
}

void PotentialSpec::validate_site(Site site) const {
  if (!in_domain(site)) {
    throw ValidationError("barrier site " + std::to_string(site) + " lies outside the half-line");
  }
}

void PotentialSpec::set(const Barrier& b) {
  validate_site(b.site);
  if (!std::isfinite(b.log_value) || (!b.log_only() && !(b.value > 0.0))) {
    throw ValidationError("barrier values must be strictly positive");
  }
  auto it = std::lower_bound(barriers_.begin(), barriers_.end(), b.site,
                             [](const Barrier& x, Site s) { return x.site < s; });
  if (it != barriers_.end() && it->site == b.site) {
    *it = b;
  } else {
    barriers_.insert(it, b);
  }
}

const Barrier* PotentialSpec::find(Site n) const {
  auto it = std::lower_bound(barriers_.begin(), barriers_.end(), n,
                             [](const Barrier& x, Site s) { return x.site < s; });
  if (it != barriers_.end() && it->site == n) return &*it;
  return nullptr;
}

double PotentialSpec::eval(Site n) const {
  if (!in_domain(n)) {
    throw DomainError("site " + std::to_string(n) + " is outside the half-line");
  }
  const Barrier* b = find(n);
  if (b == nullptr) return 0.0;
  if (b->log_only()) {
    throw PrecisionError("barrier at site " + std::to_string(n) +
                         " exceeds 1e300; use its log-value");
  }
  return b->value;
}

Site PotentialSpec::last_positive_site() const {
  if (barriers_.empty() || barriers_.back().site < 1) return 0;
  return barriers_.back().site;
}

Site PotentialSpec::first_nonpositive_site() const {
  if (barriers_.empty() || barriers_.front().site > 0) return 1;
  return barriers_.front().site;
}

PotentialSpec positive_half(const PotentialSpec& spec) {
  PotentialSpec out(Domain::half_line);
  for (const auto& b : spec.barriers()) {
    if (b.site >= 1) out.set(b);
  }
  return out;
}

PotentialSpec negative_half(const PotentialSpec& spec) {
  PotentialSpec out(Domain::half_line);
  for (auto b : spec.barriers()) {
    if (b.site <= 0) {
      b.site = 1 - b.site;
      out.set(b);
    }
  }
  return out;
}

PotentialSpec shifted_left(const PotentialSpec& spec) {
  PotentialSpec out(spec.domain());
  for (auto b : spec.barriers()) {
    if (spec.domain() == Domain::half_line && b.site == 1) continue;
    b.site -= 1;
    out.set(b);
  }
  return out;
}

Site support_radius(const PotentialSpec& spec) {
  Site r = 0;
  for (const auto& b : spec.barriers()) r = std::max(r, b.site >= 0 ? b.site : -b.site);
  return r;
}

GrowthReport check_growth(const GrowthSchedule& schedule) {
  if (schedule.sites.size() != schedule.log_values.size()) {
    throw ValidationError("growth schedule: sites and log_values differ in length");
  }
  GrowthReport report;
  double prefix = 0.0;
  for (std::size_t i = 0; i < schedule.sites.size(); ++i) {
    if (i > 0 && schedule.sites[i] <= schedule.sites[i - 1]) {
      throw ValidationError("growth schedule: sites must be strictly increasing");
    }
    const double n = static_cast<double>(i + 1);
    const double bound = static_cast<double>(schedule.sites[i]) + 1.0 + n * n;
    const double slack = schedule.log_values[i] - prefix - bound;
    report.slack.push_back(slack);
    if (slack < 0.0) report.holds = false;
    prefix += schedule.log_values[i];
  }
  return report;
}

GrowthSchedule growth_schedule(const PotentialSpec& half_line) {
  GrowthSchedule s;
  for (const auto& b : half_line.barriers()) {
    if (b.site < 1) continue;
    s.sites.push_back(b.site);
    s.log_values.push_back(b.log_value);
  }
  return s;
}

namespace {

bool gaps_increase(const std::vector<Site>& distances) {
  for (std::size_t i = 2; i < distances.size(); ++i) {
    if (distances[i] - distances[i - 1] <= distances[i - 1] - distances[i - 2]) return false;
  }
  return true;
}

}  // namespace

bool check_gaps(const PotentialSpec& spec) {
  std::vector<Site> pos;
  std::vector<Site> neg;
  for (const auto& b : spec.barriers()) {
    if (b.site >= 1) {
      pos.push_back(b.site);
    } else {
      neg.push_back(1 - b.site);
    }
  }
  std::sort(neg.begin(), neg.end());
  return gaps_increase(pos) && gaps_increase(neg);
}

const char* to_string(Domain d) { return d == Domain::half_line ? "half_line" : "whole_line"; }

Domain domain_from_string(const std::string& s) {
  if (s == "half_line") return Domain::half_line;
  if (s == "whole_line") return Domain::whole_line;
  throw ValidationError("unknown domain '" + s + "'");
}

nlohmann::json to_json(const PotentialSpec& spec) {
  nlohmann::json barriers = nlohmann::json::array();
  for (const auto& b : spec.barriers()) {
    barriers.push_back({{"site", b.site}, {"log_value", log_value_text(b)}});
  }
  return {{"domain", to_string(spec.domain())}, {"barriers", std::move(barriers)}};
}

PotentialSpec potential_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("potential spec must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "domain" && key != "barriers") {
      throw ValidationError("potential spec: unknown key '" + key + "'");
    }
  }
  if (!doc.contains("domain") || !doc["domain"].is_string()) {
    throw ValidationError("potential spec: missing string field 'domain'");
  }
  if (!doc.contains("barriers") || !doc["barriers"].is_array()) {
    throw ValidationError("potential spec: missing array field 'barriers'");
  }
  std::vector<Barrier> barriers;
  for (const auto& entry : doc["barriers"]) {
    if (!entry.is_object() || !entry.contains("site") || !entry["site"].is_number_integer() ||
        !entry.contains("log_value") || !entry["log_value"].is_string() || entry.size() != 2) {
      throw ValidationError(
          "potential spec: each barrier needs exactly {\"site\": int, \"log_value\": string}");
    }
    barriers.push_back(
        barrier_from_text(entry["site"].get<Site>(), entry["log_value"].get<std::string>()));
  }
  return PotentialSpec(domain_from_string(doc["domain"].get<std::string>()), std::move(barriers));
}

std::string serialize(const PotentialSpec& spec) { return to_json(spec).dump(2) + "\n"; }

PotentialSpec parse_potential(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("potential spec: ") + e.what());
  }
  return potential_from_json(doc);
}

}  // namespace fracspec

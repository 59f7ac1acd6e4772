#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracspec {

using Site = std::int64_t;

enum class Domain { half_line, whole_line };

// Values above this threshold are carried only through their logarithm.
inline constexpr double kLogOnlyThreshold = 690.7755278982137;  // ln(1e300)

/// One nonzero entry of a sparse potential.
///
/// `log_value` is always populated. `value` holds the linear value whenever
/// it is at most 1e300; past that the barrier is "log-only" and consumers
/// must work with `log_value`.
struct Barrier {
  enum class Origin { linear, logarithmic };

  Site site = 0;
  double log_value = 0.0;
  double value = 1.0;
  Origin origin = Origin::linear;

  static Barrier from_value(Site site, double value);
  static Barrier from_log(Site site, double log_value);

  bool log_only() const { return log_value > kLogOnlyThreshold; }
  // Linear value for finite-range barriers; +inf for log-only ones.
  double linear_or_inf() const;

  friend bool operator==(const Barrier&, const Barrier&) = default;
};

/// Finite sparse potential with zero baseline on the half-line (sites >= 1)
/// or the whole line. Barriers are kept sorted by site.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(Domain domain) : domain_(domain) {}
  PotentialSpec(Domain domain, std::vector<Barrier> barriers);

  static PotentialSpec free(Domain domain = Domain::half_line) { return PotentialSpec(domain); }

  Domain domain() const { return domain_; }
  std::span<const Barrier> barriers() const { return barriers_; }
  bool empty() const { return barriers_.empty(); }

  // Inserts or replaces the barrier at `b.site`.
  void set(const Barrier& b);

  bool in_domain(Site n) const { return domain_ == Domain::whole_line || n >= 1; }

  /// V(n). Exact for stored linear values, 0 off the barrier list.
  /// Throws DomainError outside the domain, PrecisionError for log-only sites.
  double eval(Site n) const;
  /// Barrier record at n, if any.
  const Barrier* find(Site n) const;

  /// Largest barrier site (0 when there are no positive sites).
  Site last_positive_site() const;
  /// Smallest barrier site at or below 0 (1 when there is none).
  Site first_nonpositive_site() const;

  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;

 private:
  void validate_site(Site site) const;

  Domain domain_ = Domain::half_line;
  std::vector<Barrier> barriers_;
};

// Restriction of a whole-line potential to {1, 2, ...}.
PotentialSpec positive_half(const PotentialSpec& spec);
// Restriction to {0, -1, ...} reflected onto the half-line via n -> 1 - n.
PotentialSpec negative_half(const PotentialSpec& spec);
// Half-line potential shifted once to the left: V~(n) = V(n + 1).
PotentialSpec shifted_left(const PotentialSpec& spec);
// Largest |site| in the support, 0 for the free potential.
Site support_radius(const PotentialSpec& spec);

struct GrowthSchedule {
  std::vector<Site> sites;
  std::vector<double> log_values;
};

struct GrowthReport {
  std::vector<double> slack;
  bool holds = true;
};

/// Per-index slack of  ln V(L_n) - sum_{k<n} ln V(L_k) >= L_n + 1 + n^2.
GrowthReport check_growth(const GrowthSchedule& schedule);

// Schedule of the barriers on the positive side ({1,2,...}) of `spec`.
GrowthSchedule growth_schedule(const PotentialSpec& half_line);

/// True iff consecutive barrier gaps on each side of the origin strictly
/// increase (vacuous for fewer than three barriers on a side).
bool check_gaps(const PotentialSpec& spec);

const char* to_string(Domain d);
Domain domain_from_string(const std::string& s);

nlohmann::json to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const nlohmann::json& doc);

std::string serialize(const PotentialSpec& spec);
PotentialSpec parse_potential(const std::string& text);

// Decimal text used for log-values in persisted files.
std::string log_value_text(const Barrier& b);
Barrier barrier_from_text(Site site, const std::string& log_text);

// Correctly rounded exp/log so persisted artifacts reproduce across platforms.
double exp_correctly_rounded(double x);
double log_correctly_rounded(double x);

}  // namespace fracspec

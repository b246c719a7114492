#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace glshrink {

/// The flexible factor L in π(λ²) ∝ (λ²)^{-a-1} L(λ²).
///
/// `log_value` maps log u to log L(u); working on the log scale keeps the
/// posterior kernels finite for u anywhere in (0, ∞). The lower bound m only
/// holds for u ≥ lower_threshold (the horseshoe has L(0) = 0), and
/// L(u) = O(u^zero_rate) as u → 0. User-supplied functions must be pure and
/// reentrant: kernels evaluate them concurrently.
struct SlowlyVarying {
  std::string name;
  std::function<double(double)> log_value;
  double upper_bound = 1.0;
  double lower_bound = 1.0;
  double lower_threshold = 0.0;
  double zero_rate = 0.0;

  double eval_log(double u) const;
};

/// u / (1 + u); with a = 1/2 this is the horseshoe.
SlowlyVarying horseshoe_L();
/// min(u^p, 1).
SlowlyVarying saturating_power_L(double p);
/// Constant L; violates the propriety gate for every a > 0.
SlowlyVarying constant_L(double value = 1.0);
/// Parses "horseshoe", "saturating_power(p)", "constant" or "constant(v)".
SlowlyVarying slowly_varying_from_name(std::string_view name);

struct GlobalLocal {
  double a = 0.5;
  SlowlyVarying L = horseshoe_L();
  double tau = 0.01;
};

struct ExpInvGamma {
  double d = 0.5;
  double c = 0.01;
};

using PriorSpec = std::variant<GlobalLocal, ExpInvGamma>;

inline bool is_global_local(const PriorSpec& p) { return std::holds_alternative<GlobalLocal>(p); }
/// a for the global-local prior, d for EIG: the exponent in the tuning rates.
double prior_exponent(const PriorSpec& p);
/// τ for the global-local prior, c for EIG.
double prior_tuning(const PriorSpec& p);
PriorSpec with_tuning(PriorSpec p, double tuning);
/// Short label for reports, e.g. "gl:horseshoe:a=0.5" or "eig:d=0.3".
std::string prior_label(const PriorSpec& p);
/// Stable 64-bit hash of the canonical JSON form.
std::uint64_t prior_hash(const PriorSpec& p);

double tau_from_sparsity(std::int64_t n, std::int64_t q, double a);
double c_from_sparsity(std::int64_t n, std::int64_t q, double d);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_prior(const PriorSpec& p, int k);

/// Density of u = λ²τ implied by the EIG prior: d c^d (u + c)^{-d-1}.
struct BetaPrimeView {
  double d = 0.5;
  double c = 1.0;
  double log_unnormalized(double u) const;
  /// d·c^d, the constant that normalizes (u + c)^{-d-1} on (0, ∞).
  double normalizer() const;
};

BetaPrimeView beta_prime_view(const PriorSpec& p);

// {"type":"global_local","a":…,"L":"horseshoe","tau":…} and
// {"type":"eig","d":…,"c":…}. Unknown keys are rejected. When
// `require_tuning` is false the tau/c field may be omitted (families whose
// tuning is derived from the sparsity level); it is then left at NaN.
nlohmann::json prior_to_json(const PriorSpec& p, bool include_tuning = true);
PriorSpec prior_from_json(const nlohmann::json& j, bool require_tuning = true);

}  // namespace glshrink

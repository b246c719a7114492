#include "glshrink/priors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "glshrink/error.hpp"

namespace glshrink {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// "name(value)" → value; throws ConfigError on a malformed argument.
double parse_arg(std::string_view name, std::string_view prefix) {
  if (name.size() < prefix.size() + 2 || name.back() != ')') {
    throw Error(ErrorCode::ConfigError, "malformed L specification '" + std::string(name) + "'");
  }
  const std::string arg(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != arg.size() || arg.empty()) {
    throw Error(ErrorCode::ConfigError, "malformed L argument '" + arg + "'");
  }
  return v;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double SlowlyVarying::eval_log(double u) const { return log_value(std::log(u)); }

SlowlyVarying horseshoe_L() {
  SlowlyVarying L;
  L.name = "horseshoe";
  L.log_value = [](double log_u) { return -softplus(-log_u); };
  L.upper_bound = 1.0;
  L.lower_bound = 0.5;
  L.lower_threshold = 1.0;
  L.zero_rate = 1.0;
  return L;
}

SlowlyVarying saturating_power_L(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::ConfigError, "saturating_power needs p > 0");
  }
  SlowlyVarying L;
  L.name = "saturating_power(" + fmt17(p) + ")";
  L.log_value = [p](double log_u) { return std::min(p * log_u, 0.0); };
  L.upper_bound = 1.0;
  L.lower_bound = 1.0;
  L.lower_threshold = 1.0;
  L.zero_rate = p;
  return L;
}

SlowlyVarying constant_L(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw Error(ErrorCode::ConfigError, "constant L needs value > 0");
  SlowlyVarying L;
  L.name = value == 1.0 ? "constant" : "constant(" + fmt17(value) + ")";
  const double lv = std::log(value);
  L.log_value = [lv](double) { return lv; };
  L.upper_bound = value;
  L.lower_bound = value;
  L.lower_threshold = 0.0;
  L.zero_rate = 0.0;
  return L;
}

SlowlyVarying slowly_varying_from_name(std::string_view name) {
  if (name == "horseshoe") return horseshoe_L();
  if (name == "constant") return constant_L(1.0);
  if (name.starts_with("constant(")) return constant_L(parse_arg(name, "constant"));
  if (name.starts_with("saturating_power(")) return saturating_power_L(parse_arg(name, "saturating_power"));
  throw Error(ErrorCode::ConfigError, "unknown L function '" + std::string(name) + "'");
}

double prior_exponent(const PriorSpec& p) {
  return std::visit([](const auto& v) {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, GlobalLocal>) return v.a; else return v.d;
  }, p);
}

double prior_tuning(const PriorSpec& p) {
  return std::visit([](const auto& v) {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, GlobalLocal>) return v.tau; else return v.c;
  }, p);
}

PriorSpec with_tuning(PriorSpec p, double tuning) {
  if (auto* gl = std::get_if<GlobalLocal>(&p)) gl->tau = tuning;
  else std::get<ExpInvGamma>(p).c = tuning;
  return p;
}

std::string prior_label(const PriorSpec& p) {
  if (const auto* gl = std::get_if<GlobalLocal>(&p)) return "gl:" + gl->L.name + ":a=" + fmt17(gl->a);
  return "eig:d=" + fmt17(std::get<ExpInvGamma>(p).d);
}

std::uint64_t prior_hash(const PriorSpec& p) {
  const std::string s = prior_to_json(p).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

double sparsity_tuning(std::int64_t n, std::int64_t q, double exponent, const char* what) {
  if (q < 1 || n <= q) {
    throw Error(ErrorCode::InvalidCounts, "need n > q >= 1, got n=" + std::to_string(n) + ", q=" + std::to_string(q));
  }
  if (!(exponent > 0.0)) throw Error(ErrorCode::InvalidCounts, std::string(what) + " must be positive");
  const double ratio = static_cast<double>(n) / static_cast<double>(q);
  if (!(ratio > std::exp(1.0))) {
    throw Error(ErrorCode::SparsityTooMild, "n/q = " + std::to_string(ratio) + " must exceed e");
  }
  const double eps = 1.0 / std::log(std::log(ratio));
  return std::pow(1.0 / ratio, (1.0 + eps) / exponent);
}

}  // namespace

double tau_from_sparsity(std::int64_t n, std::int64_t q, double a) { return sparsity_tuning(n, q, a, "a"); }

double c_from_sparsity(std::int64_t n, std::int64_t q, double d) { return sparsity_tuning(n, q, d, "d"); }

ValidationReport validate_prior(const PriorSpec& p, int k) {
  ValidationReport rep;
  auto fail = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };
  if (k < 1) fail("dimension k must be >= 1");

  if (const auto* gl = std::get_if<GlobalLocal>(&p)) {
    if (!(gl->a > 0.0) || !std::isfinite(gl->a)) fail("a must be positive");
    if (!(gl->tau > 0.0 && gl->tau < 1.0)) fail("tau must lie in (0, 1)");
    const SlowlyVarying& L = gl->L;
    if (!L.log_value) {
      fail("L has no evaluation function");
      return rep;
    }
    // Log-grid check of the growth conditions on L for u in [1e-12, 1e12].
    constexpr int kGrid = 241;
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true, bounded = true, floor_ok = true, finite = true;
    for (int i = 0; i < kGrid; ++i) {
      const double log_u = std::log(1e-12) + i * (std::log(1e24) / (kGrid - 1));
      const double v = L.log_value(log_u);
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        finite = false;
        continue;
      }
      if (v < prev - 1e-12 * std::max(1.0, std::fabs(prev))) monotone = false;
      if (std::exp(v) > L.upper_bound * (1.0 + 1e-12)) bounded = false;
      if (std::exp(log_u) >= L.lower_threshold && std::exp(v) < L.lower_bound * (1.0 - 1e-12)) floor_ok = false;
      prev = v;
    }
    if (!finite) fail("L(" + L.name + ") is not finite on the sampled grid");
    if (!monotone) fail("L(" + L.name + ") is not non-decreasing on the sampled grid");
    if (!bounded) fail("L(" + L.name + ") exceeds its declared upper bound M");
    if (!floor_ok) fail("L(" + L.name + ") drops below its declared lower bound m beyond u0");
    if (!(L.zero_rate > gl->a)) {
      fail("improper kappa-posterior at kappa=1: L(u) = O(u^p) near 0 with p = " + fmt17(L.zero_rate) +
           " <= a = " + fmt17(gl->a) + " makes the posterior non-integrable");
    }
    const double measured = (L.log_value(std::log(1e-10)) - L.log_value(std::log(1e-12))) / std::log(100.0);
    if (measured < L.zero_rate - 0.02 - 0.01 * L.zero_rate) {
      fail("L(" + L.name + ") decays more slowly near 0 (slope " + fmt17(measured) + ") than its declared zero_rate");
    }
  } else {
    const auto& e = std::get<ExpInvGamma>(p);
    if (!(e.d > 0.0 && e.d < 1.0)) fail("d must lie in (0, 1), got " + fmt17(e.d));
    if (!(e.c > 0.0) || !std::isfinite(e.c)) fail("c must be positive");
  }
  return rep;
}

double BetaPrimeView::log_unnormalized(double u) const { return -(d + 1.0) * std::log(u + c); }

double BetaPrimeView::normalizer() const { return d * std::pow(c, d); }

BetaPrimeView beta_prime_view(const PriorSpec& p) {
  const auto* e = std::get_if<ExpInvGamma>(&p);
  if (!e) throw Error(ErrorCode::WrongVariant, "beta prime view needs the EIG prior");
  return {e->d, e->c};
}

nlohmann::json prior_to_json(const PriorSpec& p, bool include_tuning) {
  nlohmann::json j;
  if (const auto* gl = std::get_if<GlobalLocal>(&p)) {
    j["type"] = "global_local";
    j["a"] = gl->a;
    j["L"] = gl->L.name;
    if (include_tuning && std::isfinite(gl->tau)) j["tau"] = gl->tau;
  } else {
    const auto& e = std::get<ExpInvGamma>(p);
    j["type"] = "eig";
    j["d"] = e.d;
    if (include_tuning && std::isfinite(e.c)) j["c"] = e.c;
  }
  return j;
}

PriorSpec prior_from_json(const nlohmann::json& j, bool require_tuning) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "prior must be a JSON object");
  auto number = [&](const char* key) -> double {
    if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("prior is missing '") + key + "'");
    if (!j.at(key).is_number()) throw Error(ErrorCode::ConfigError, std::string("prior field '") + key + "' must be a number");
    return j.at(key).get<double>();
  };
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) throw Error(ErrorCode::ConfigError, "unknown prior key '" + key + "'");
    }
  };
  if (!j.contains("type") || !j.at("type").is_string()) throw Error(ErrorCode::ConfigError, "prior needs a string 'type'");
  const std::string type = j.at("type").get<std::string>();
  if (type == "global_local") {
    check_keys({"type", "a", "L", "tau"});
    GlobalLocal gl;
    gl.a = number("a");
    if (j.contains("L")) {
      if (!j.at("L").is_string()) throw Error(ErrorCode::ConfigError, "prior field 'L' must be a string");
      gl.L = slowly_varying_from_name(j.at("L").get<std::string>());
    }
    gl.tau = (require_tuning || j.contains("tau")) ? number("tau") : kNaN;
    return gl;
  }
  if (type == "eig") {
    check_keys({"type", "d", "c"});
    ExpInvGamma e;
    e.d = number("d");
    e.c = (require_tuning || j.contains("c")) ? number("c") : kNaN;
    return e;
  }
  throw Error(ErrorCode::ConfigError, "unknown prior type '" + type + "'");
}

}  // namespace glshrink

#pragma once

// Adaptive Gauss-Kronrod (7/15) integration, globally adaptive in the style
// of QUADPACK's QAG: the panel with the largest error estimate is bisected
// until the summed estimate meets the tolerance or the panel cap is hit.
//
// Integrands may return a double or a std::array<double, N>; all components
// share one panel structure and the tolerance applies to each of them.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace glshrink::quad {

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Traits {
  static constexpr std::size_t size = 1;
  static double get(const T& v, std::size_t) { return v; }
  static void set(T& v, std::size_t, double x) { v = x; }
};

template <std::size_t N>
struct Traits<std::array<double, N>> {
  static constexpr std::size_t size = N;
  static double get(const std::array<double, N>& v, std::size_t i) { return v[i]; }
  static void set(std::array<double, N>& v, std::size_t i, double x) { v[i] = x; }
};

}  // namespace detail

template <class T>
struct Panel {
  double a = 0.0;
  double b = 0.0;
  T value{};
  T error{};
};

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  using Tr = detail::Traits<T>;
  constexpr std::size_t n = Tr::size;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::fabs(half);

  std::array<T, 15> fv;
  fv[7] = f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * detail::kXgk[j];
    fv[j] = f(center - dx);
    fv[14 - j] = f(center + dx);
  }

  Panel<T> p{a, b, T{}, T{}};
  for (std::size_t c = 0; c < n; ++c) {
    double resk = detail::kWgk[7] * Tr::get(fv[7], c);
    double resg = detail::kWg[3] * Tr::get(fv[7], c);
    double resabs = std::fabs(resk);
    for (int j = 0; j < 7; ++j) {
      const double f1 = Tr::get(fv[j], c);
      const double f2 = Tr::get(fv[14 - j], c);
      resk += detail::kWgk[j] * (f1 + f2);
      resabs += detail::kWgk[j] * (std::fabs(f1) + std::fabs(f2));
      if (j % 2 == 1) resg += detail::kWg[j / 2] * (f1 + f2);
    }
    const double reskh = 0.5 * resk;
    double resasc = detail::kWgk[7] * std::fabs(Tr::get(fv[7], c) - reskh);
    for (int j = 0; j < 7; ++j) {
      resasc += detail::kWgk[j] * (std::fabs(Tr::get(fv[j], c) - reskh) + std::fabs(Tr::get(fv[14 - j], c) - reskh));
    }
    resabs *= abs_half;
    resasc *= abs_half;
    double err = std::fabs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    Tr::set(p.value, c, resk * half);
    Tr::set(p.error, c, err);
  }
  return p;
}

struct Options {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  /// Extra allowance for every component relative to |component 0|; lets
  /// small moments be judged against the normalizer.
  double rel_tol_first = 0.0;
  std::size_t max_panels = std::size_t{1} << 14;
};

template <class T>
struct Result {
  T value{};
  T error{};
  bool converged = false;
  /// Final panels and their boundaries in increasing order.
  std::vector<Panel<T>> panels;
  std::vector<double> breakpoints;
};

/// Globally adaptive integration over the partition given by `breaks`
/// (sorted, at least two entries).
template <class T, class F>
Result<T> integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
  using Tr = detail::Traits<T>;
  constexpr std::size_t n = Tr::size;

  std::vector<Panel<T>> panels;
  panels.reserve(std::max<std::size_t>(breaks.size() * 2, 16));
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) panels.push_back(gk15<T>(f, breaks[i], breaks[i + 1]));
  }

  auto totals = [&](T& val, T& err) {
    val = T{};
    err = T{};
    for (const auto& p : panels) {
      for (std::size_t c = 0; c < n; ++c) {
        Tr::set(val, c, Tr::get(val, c) + Tr::get(p.value, c));
        Tr::set(err, c, Tr::get(err, c) + Tr::get(p.error, c));
      }
    }
  };
  auto allowance = [&](const T& val, std::size_t c) {
    return std::max({opt.abs_tol, opt.rel_tol * std::fabs(Tr::get(val, c)),
                     opt.rel_tol_first * std::fabs(Tr::get(val, 0))});
  };
  // Largest ratio of a component's error to its allowance.
  auto badness = [&](const T& err, const T& val) {
    double worst = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double allow = allowance(val, c);
      const double e = Tr::get(err, c);
      if (e == 0.0) continue;
      worst = std::max(worst, allow > 0.0 ? e / allow : std::numeric_limits<double>::infinity());
    }
    return worst;
  };
  auto panel_key = [&](const Panel<T>& p, const T& val) {
    double worst = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double allow = allowance(val, c);
      const double e = Tr::get(p.error, c);
      worst = std::max(worst, allow > 0.0 ? e / allow : e);
    }
    return worst;
  };

  Result<T> out;
  T val, err;
  totals(val, err);
  while (badness(err, val) > 1.0) {
    if (panels.size() >= opt.max_panels) break;
    // Allowances move with the running total, so keys are recomputed.
    std::size_t worst = 0;
    double worst_key = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const double key = panel_key(panels[i], val);
      if (key > worst_key) {
        worst_key = key;
        worst = i;
      }
    }
    const double a = panels[worst].a;
    const double b = panels[worst].b;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) break;
    panels[worst] = gk15<T>(f, a, mid);
    panels.push_back(gk15<T>(f, mid, b));
    totals(val, err);
  }
  out.value = val;
  out.error = err;
  out.converged = badness(err, val) <= 1.0;
  std::sort(panels.begin(), panels.end(), [](const Panel<T>& x, const Panel<T>& y) { return x.a < y.a; });
  out.breakpoints.reserve(panels.size() + 1);
  for (const auto& p : panels) out.breakpoints.push_back(p.a);
  if (!panels.empty()) out.breakpoints.push_back(panels.back().b);
  out.panels = std::move(panels);
  return out;
}

template <class T, class F>
Result<T> integrate(F&& f, double a, double b, const Options& opt = {}) {
  const double br[2] = {a, b};
  return integrate<T>(std::forward<F>(f), std::span<const double>(br, 2), opt);
}

/// Support of a log-integrand on the real line: the window outside of which
/// exp(logf - peak) is negligible, plus a coarse partition for integration.
struct Support {
  double peak = 0.0;     // max of logf found by the scan
  double t_lo = 0.0;
  double t_hi = 0.0;
  double tail_rel = 0.0;  // bound on the truncated mass relative to exp(peak)
  std::vector<double> breaks;
};

struct SupportOptions {
  double lo_limit = -1e4;
  double hi_limit = 1e4;
  double scan_lo = -40.0;
  double scan_hi = 40.0;
  double scan_step = 0.5;
  double drop = 45.0;       // nats below peak treated as negligible
  double max_panel = 3.0;   // width of initial panels inside the bulk
};

/// Locates the bulk of exp(logf) by a coarse scan, then walks outward with
/// geometrically growing steps until the log-integrand has dropped `drop`
/// nats below the peak and the exponential-tail estimate of the remaining
/// mass is negligible.
Support locate_support(const std::function<double(double)>& logf, const SupportOptions& opt = {});

}  // namespace glshrink::quad

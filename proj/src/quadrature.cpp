#include "glshrink/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace glshrink::quad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTailTol = 1e-16;

double safe_eval(const std::function<double(double)>& logf, double t) {
  const double v = logf(t);
  return std::isnan(v) ? kNegInf : v;
}

struct Walk {
  double end = 0.0;
  double tail_rel = 0.0;
  std::vector<double> points;
};

// Walks from `start` (value `v0`, with an inner neighbour at `inner`) in
// direction `dir` until the function is negligible relative to `peak`.
Walk walk_out(const std::function<double(double)>& logf, double start, double v0, double inner, double v_inner,
              int dir, double limit, double& peak, double drop) {
  Walk w;
  double t = start;
  double v = v0;
  double t_in = inner;
  double v_in = v_inner;
  double step = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    if (v == kNegInf) {
      w.tail_rel = 0.0;
      break;
    }
    const double slope = (v_in - v) / std::fabs(t_in - t);  // > 0 when decaying outward
    if (v < peak - drop && slope > 0.0) {
      const double tail = std::exp(v - peak) / slope;
      if (tail < kTailTol) {
        w.tail_rel = tail;
        break;
      }
    }
    if (t == limit) {
      w.tail_rel = 0.0;
      break;
    }
    double t_next = t + dir * step;
    if ((dir < 0 && t_next <= limit) || (dir > 0 && t_next >= limit)) t_next = limit;
    t_in = t;
    v_in = v;
    t = t_next;
    v = safe_eval(logf, t);
    peak = std::max(peak, v);
    w.points.push_back(t);
    step *= 2.0;
  }
  if (w.tail_rel == 0.0 && v != kNegInf && t != limit) {
    // Iteration cap: report whatever is left as an exponential tail guess.
    const double slope = (v_in - v) / std::fabs(t_in - t);
    w.tail_rel = slope > 0.0 ? std::exp(v - peak) / slope : std::numeric_limits<double>::infinity();
  }
  w.end = t;
  return w;
}

}  // namespace

Support locate_support(const std::function<double(double)>& logf, const SupportOptions& opt) {
  double lo = std::max(opt.lo_limit, opt.scan_lo);
  double hi = std::min(opt.hi_limit, opt.scan_hi);
  const double span = opt.scan_hi - opt.scan_lo;
  if (lo >= hi) {
    if (opt.lo_limit >= opt.scan_hi) {
      lo = opt.lo_limit;
      hi = std::min(opt.hi_limit, lo + span);
    } else {
      hi = opt.hi_limit;
      lo = std::max(opt.lo_limit, hi - span);
    }
  }

  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / opt.scan_step)) + 1);
  const double h = (hi - lo) / (n - 1);
  std::vector<double> ts(n), vs(n);
  double peak = kNegInf;
  for (int i = 0; i < n; ++i) {
    ts[i] = (i == n - 1) ? hi : lo + i * h;
    vs[i] = safe_eval(logf, ts[i]);
    peak = std::max(peak, vs[i]);
  }

  Support sup;
  Walk left = walk_out(logf, ts[0], vs[0], ts[1], vs[1], -1, opt.lo_limit, peak, opt.drop);
  Walk right = walk_out(logf, ts[n - 1], vs[n - 1], ts[n - 2], vs[n - 2], +1, opt.hi_limit, peak, opt.drop);
  sup.peak = peak;
  sup.t_lo = left.end;
  sup.t_hi = right.end;
  sup.tail_rel = left.tail_rel + right.tail_rel;
  if (peak == kNegInf) return sup;

  // Bulk of the scan grid; partition it into panels of at most max_panel.
  int first = -1, last = -1;
  for (int i = 0; i < n; ++i) {
    if (vs[i] >= peak - opt.drop) {
      if (first < 0) first = i;
      last = i;
    }
  }
  std::vector<double> br;
  br.push_back(sup.t_lo);
  br.push_back(sup.t_hi);
  br.insert(br.end(), left.points.begin(), left.points.end());
  br.insert(br.end(), right.points.begin(), right.points.end());
  if (first >= 0) {
    const double b_lo = ts[std::max(0, first - 1)];
    const double b_hi = ts[std::min(n - 1, last + 1)];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b_hi - b_lo) / opt.max_panel)));
    for (int j = 0; j <= pieces; ++j) br.push_back(b_lo + (b_hi - b_lo) * j / pieces);
  }
  br.push_back(ts[0]);
  br.push_back(ts[n - 1]);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  for (double b : br) {
    if (b >= sup.t_lo && b <= sup.t_hi) sup.breaks.push_back(b);
  }
  return sup;
}

}  // namespace glshrink::quad

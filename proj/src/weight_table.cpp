#include "glshrink/weight_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "glshrink/error.hpp"
#include "glshrink/posterior.hpp"

namespace glshrink {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'S', 'W', 'T', 'B', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kMaxKnots = std::size_t{1} << 20;
constexpr int kInitialSegments = 32;

struct Node {
  double s, w, dw;
};

Node exact_node(const PriorSpec& prior, int k, double s) {
  const PosteriorKernel kern(prior, k, s);
  return {s, kern.shrinkage_weight(), 0.5 * kern.kappa_variance()};
}

// Evaluates `nodes[i]` for every s in `ss` in parallel; exceptions are
// collected and rethrown as TableBuildFailure.
std::vector<Node> exact_nodes(const PriorSpec& prior, int k, const std::vector<double>& ss) {
  std::vector<Node> out(ss.size());
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(ss.size()); ++i) {
    try {
      out[i] = exact_node(prior, k, ss[i]);
    } catch (const std::exception& e) {
#pragma omp critical(glshrink_table_error)
      {
        if (!failed) message = e.what();
        failed = true;
      }
    }
  }
  if (failed) throw Error(ErrorCode::TableBuildFailure, message);
  return out;
}

struct Hermite {
  double d0, d1;  // limited derivatives
};

Hermite limit(const Node& a, const Node& b) {
  const double h = b.s - a.s;
  const double delta = (b.w - a.w) / h;
  Hermite out{a.dw, b.dw};
  if (delta <= 0.0) return {0.0, 0.0};
  const double alpha = out.d0 / delta;
  const double beta = out.d1 / delta;
  const double r2 = alpha * alpha + beta * beta;
  if (r2 > 9.0) {
    const double scale = 3.0 / std::sqrt(r2);
    out.d0 *= scale;
    out.d1 *= scale;
  }
  return out;
}

double hermite(double s0, double s1, double w0, double w1, double d0, double d1, double s) {
  const double h = s1 - s0;
  const double x = (s - s0) / h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * w0 + (x3 - 2 * x2 + x) * h * d0 + (-2 * x3 + 3 * x2) * w1 + (x3 - x2) * h * d1;
}

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::ifstream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

void put_vec(std::ofstream& out, const std::vector<double>& v) {
  put(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

bool get_vec(std::ifstream& in, std::vector<double>& v, std::uint64_t max_len) {
  std::uint64_t n = 0;
  if (!get(in, n) || n > max_len) return false;
  v.resize(n);
  return static_cast<bool>(in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))));
}

}  // namespace

WeightTable build_weight_table(const PriorSpec& prior, int k, double s_max, double tol) {
  if (!(s_max > 0.0) || !std::isfinite(s_max)) throw Error(ErrorCode::TableBuildFailure, "s_max must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::TableBuildFailure, "tol must be positive");

  std::vector<double> init(kInitialSegments + 1);
  for (int j = 0; j <= kInitialSegments; ++j) init[j] = s_max * j / kInitialSegments;
  std::vector<Node> nodes = exact_nodes(prior, k, init);
  std::vector<char> done(nodes.size() - 1, 0);
  const double accept = 0.25 * tol;
  double worst = 0.0;

  for (;;) {
    std::vector<std::size_t> open;
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      if (!done[i]) {
        open.push_back(i);
        mids.push_back(0.5 * (nodes[i].s + nodes[i + 1].s));
      }
    }
    if (open.empty()) break;
    if (nodes.size() + open.size() > kMaxKnots) {
      throw Error(ErrorCode::TableBuildFailure, "weight table exceeded the knot cap");
    }
    const std::vector<Node> mid_nodes = exact_nodes(prior, k, mids);

    std::vector<Node> next_nodes;
    std::vector<char> next_done;
    next_nodes.reserve(nodes.size() + open.size());
    std::size_t o = 0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      next_nodes.push_back(nodes[i]);
      if (done[i]) {
        next_done.push_back(1);
        continue;
      }
      const Node& a = nodes[i];
      const Node& b = nodes[i + 1];
      const Node& m = mid_nodes[o++];
      const Hermite hl = limit(a, b);
      const double err = std::fabs(hermite(a.s, b.s, a.w, b.w, hl.d0, hl.d1, m.s) - m.w);
      const bool tiny = !(m.s > a.s && m.s < b.s);
      if (err <= accept || tiny) {
        worst = std::max(worst, err);
        next_done.push_back(1);
      } else {
        next_nodes.push_back(m);
        next_done.push_back(0);
        next_done.push_back(0);
      }
    }
    next_nodes.push_back(nodes.back());
    nodes = std::move(next_nodes);
    done = std::move(next_done);
  }

  WeightTable t;
  t.prior = prior;
  t.k = k;
  t.s_max = s_max;
  t.tol = tol;
  t.error_bound = worst;
  for (const auto& n : nodes) {
    t.grid.push_back(n.s);
    t.weights.push_back(n.w);
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Hermite h = limit(nodes[i], nodes[i + 1]);
    t.slope_left.push_back(h.d0);
    t.slope_right.push_back(h.d1);
  }
  return t;
}

double WeightTable::lookup(double s) const {
  if (std::isnan(s) || s < 0.0) throw Error(ErrorCode::DomainError, "s must be >= 0");
  if (s > s_max || grid.size() < 2) return PosteriorKernel(prior, k, s).shrinkage_weight();
  auto it = std::upper_bound(grid.begin(), grid.end(), s);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  i = i == 0 ? 0 : i - 1;
  if (i + 1 >= grid.size()) return weights.back();
  if (s == grid[i]) return weights[i];
  return hermite(grid[i], grid[i + 1], weights[i], weights[i + 1], slope_left[i], slope_right[i], s);
}

void save_weight_table(const WeightTable& table, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    put(out, prior_hash(table.prior));
    put(out, static_cast<std::int32_t>(table.k));
    put(out, table.s_max);
    put(out, table.tol);
    put(out, table.error_bound);
    put_vec(out, table.grid);
    put_vec(out, table.weights);
    put_vec(out, table.slope_left);
    put_vec(out, table.slope_right);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::IoError, "cannot rename to " + path);
}

std::optional<WeightTable> load_weight_table(const std::string& path, const PriorSpec& prior, int k, double s_max,
                                             double tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
  std::uint32_t version = 0;
  std::uint64_t hash = 0;
  std::int32_t kk = 0;
  WeightTable t;
  if (!get(in, version) || version != kVersion) return std::nullopt;
  if (!get(in, hash) || hash != prior_hash(prior)) return std::nullopt;
  if (!get(in, kk) || kk != k) return std::nullopt;
  if (!get(in, t.s_max) || t.s_max != s_max) return std::nullopt;
  if (!get(in, t.tol) || t.tol != tol) return std::nullopt;
  if (!get(in, t.error_bound)) return std::nullopt;
  if (!get_vec(in, t.grid, kMaxKnots) || !get_vec(in, t.weights, kMaxKnots) ||
      !get_vec(in, t.slope_left, kMaxKnots) || !get_vec(in, t.slope_right, kMaxKnots)) {
    return std::nullopt;
  }
  if (t.grid.size() < 2 || t.weights.size() != t.grid.size() || t.slope_left.size() + 1 != t.grid.size() ||
      t.slope_right.size() != t.slope_left.size()) {
    return std::nullopt;
  }
  t.prior = prior;
  t.k = k;
  return t;
}

WeightTable load_or_build_weight_table(const std::string& path, const PriorSpec& prior, int k, double s_max,
                                       double tol) {
  if (auto t = load_weight_table(path, prior, k, s_max, tol)) return *t;
  WeightTable t = build_weight_table(prior, k, s_max, tol);
  save_weight_table(t, path);
  return t;
}

}  // namespace glshrink

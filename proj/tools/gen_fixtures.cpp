// Regenerates tests/fixtures from the oracle and estimator modules.
//   gen_fixtures <fixture-dir>

#include <cstdio>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "glshrink/estimator.hpp"
#include "glshrink/oracle.hpp"
#include "glshrink/priors.hpp"
#include "glshrink/report.hpp"
#include "glshrink/rng.hpp"

using namespace glshrink;

namespace {

nlohmann::json oracle_reference() {
  GlobalLocal hs;
  hs.a = 0.5;
  hs.tau = 0.05;
  const PriorSpec prior = hs;
  const OracleValue grid = grid_weight(prior, 1, 9.0);
  const OracleValue norm = grid_normalizer(prior, 1, 9.0);
  const McWeight mc = mc_weight(prior, 1, 9.0);

  OracleConfig qcfg;
  qcfg.mc_draws = 200'000;
  const McQuantile median = mc_distance_quantile(0.5, Vector::Zero(1), Covariance::identity(1), prior, qcfg);

  nlohmann::json j;
  j["horseshoe_k1_tau0.05_s9"] = {{"grid_weight", grid.value},      {"grid_weight_error", grid.error},
                                  {"grid_normalizer", norm.value},  {"grid_normalizer_error", norm.error},
                                  {"mc_weight", mc.value},          {"mc_weight_se", mc.se}};
  j["horseshoe_k1_tau0.05_s0_median"] = {
      {"value", median.value}, {"ci_lo", median.ci_lo}, {"ci_hi", median.ci_hi}, {"draws", qcfg.mc_draws}};
  return j;
}

// 40 observations in k = 2 spanning noise and signal rows, with a header.
std::pair<std::string, std::string> estimate_golden() {
  Stream stream = derive_stream(7, 0, "estimate-golden");
  GlobalLocal hs;
  hs.a = 0.5;
  hs.tau = 1e-3;
  const PriorSpec prior = hs;
  const Covariance cov = Covariance::identity(2);
  std::ostringstream in, out;
  in << "x1,x2\n";
  out << "estimate_1,estimate_2,weight,s\n";
  for (int i = 0; i < 40; ++i) {
    const double scale = i < 30 ? 1.0 : 0.5 * (i - 28);
    Vector x(2);
    x << scale * stream.normal(), scale * stream.normal();
    in << format_double(x(0)) << ',' << format_double(x(1)) << '\n';
    const PointEstimate pe = posterior_mean(x, cov, prior);
    out << format_double(pe.estimate(0)) << ',' << format_double(pe.estimate(1)) << ',' << format_double(pe.weight)
        << ',' << format_double(pe.s) << '\n';
  }
  return {in.str(), out.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gen_fixtures <fixture-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  try {
    write_file_atomic(dir + "/oracle_reference.json", oracle_reference().dump(2) + "\n");
    const auto [input, golden] = estimate_golden();
    write_file_atomic(dir + "/estimate_input.csv", input);
    write_file_atomic(dir + "/estimate_golden.csv", golden);
  } catch (const std::exception& e) {
    std::cerr << "gen_fixtures: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

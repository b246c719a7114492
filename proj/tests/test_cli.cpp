#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "glshrink/cli.hpp"
#include "test_util.hpp"

using namespace glshrink;

namespace {

const std::string kFixtures = GLSHRINK_FIXTURE_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Runs the CLI in-process with stdout and stderr captured.
struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

// Drops the trailing wall_ms column from every CSV line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("load_observations: well-formed, header, ragged, bad number") {
    std::istringstream a("1,2\n3,4\n5,6\n");
    const auto m = parse_observations(a);
    CHECK(m.values.rows() == 3);
    CHECK(m.values.cols() == 2);
    CHECK(m.values(2, 1) == 6.0);
    CHECK_FALSE(m.had_header);

    std::istringstream h("x1,x2\n1,2\n\n3,4\n");
    const auto mh = parse_observations(h);
    CHECK(mh.had_header);
    CHECK(mh.values.rows() == 2);

    std::istringstream r("1,2\n3\n");
    try {
      parse_observations(r);
      FAIL("expected RaggedRows");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RaggedRows);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    std::istringstream b("1,2\n3,abc\n");
    try {
      parse_observations(b);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
    }
    std::istringstream empty("x1,x2\n");
    CHECK_ERROR_CODE(parse_observations(empty), ErrorCode::ParseError);
    CHECK_ERROR_CODE(load_observations("no-such-file.csv"), ErrorCode::IoError);

    std::istringstream exact("0.30000000000000004,-1e-300\n");
    const auto me = parse_observations(exact);
    CHECK(me.values(0, 0) == 0.1 + 0.2);
  }

  TEST_CASE("estimate reproduces the estimator golden file") {
    const auto res = run({"estimate", "-i", kFixtures + "/estimate_input.csv", "--family", "gl", "--tau", "1e-3",
                          "-o", "cli_estimate_test.csv"});
    CHECK(res.code == 0);
    CHECK(res.out.empty());
    std::istringstream got(slurp("cli_estimate_test.csv")), want(slurp(kFixtures + "/estimate_golden.csv"));
    std::string gl, wl;
    std::getline(got, gl);
    std::getline(want, wl);
    CHECK(gl == wl);
    int rows = 0;
    while (std::getline(want, wl)) {
      REQUIRE(std::getline(got, gl));
      std::istringstream gs(gl), ws(wl);
      std::string gv, wv;
      while (std::getline(ws, wv, ',')) {
        REQUIRE(std::getline(gs, gv, ','));
        CHECK(test::close_rel(std::stod(gv), std::stod(wv), 1e-12));
      }
      ++rows;
    }
    CHECK(rows == 40);
    std::remove("cli_estimate_test.csv");
  }

  TEST_CASE("validate-prior on a constant L exits 2 with a propriety message") {
    write("cli_const_prior.json", R"({"prior":{"type":"global_local","a":0.5,"L":"constant","tau":0.01}})");
    const auto res = run({"validate-prior", "--config", "cli_const_prior.json"});
    CHECK(res.code == 2);
    CHECK(res.err.find("improper") != std::string::npos);
    CHECK(res.out.empty());
    CHECK(run({"validate-prior", "--family", "gl", "--a", "0.5"}).code == 0);
    std::remove("cli_const_prior.json");
  }

  TEST_CASE("risk-sim with the same seed twice gives identical statistics") {
    write("cli_risk.json", R"({"experiment":{"kind":"risk","dims":[1],"n_grid":[100],"replicates":10}})");
    CHECK(run({"risk-sim", "--config", "cli_risk.json", "--seed", "42", "-o", "cli_risk_a.csv"}).code == 0);
    CHECK(run({"risk-sim", "--config", "cli_risk.json", "--seed", "42", "--threads", "1", "-o", "cli_risk_b.csv",
               "--json-output", "cli_risk_b.json"})
              .code == 0);
    const std::string a = slurp("cli_risk_a.csv"), b = slurp("cli_risk_b.csv");
    CHECK(!a.empty());
    CHECK(without_timing(a) == without_timing(b));
    CHECK(slurp("cli_risk_b.json").find("\"schema_version\": 1") != std::string::npos);
    CHECK(run({"risk-sim", "--config", "cli_risk.json", "--seed", "43", "-o", "cli_risk_b.csv"}).code == 0);
    CHECK(without_timing(a) != without_timing(slurp("cli_risk_b.csv")));
    for (const char* f : {"cli_risk.json", "cli_risk_a.csv", "cli_risk_b.csv", "cli_risk_b.json"}) std::remove(f);
  }

  TEST_CASE("precedence: flag over config over default") {
    write("cli_prec.json", R"({"alpha":0.1,"prior":{"type":"eig","d":0.3,"c":0.01}})");
    auto j = [](const Run& r) { return nlohmann::json::parse(r.out); };
    CHECK(j(run({"radius", "--print-config"})).at("alpha") == 0.05);
    CHECK(j(run({"radius", "--config", "cli_prec.json", "--print-config"})).at("alpha") == 0.1);
    const auto both = j(run({"radius", "--config", "cli_prec.json", "--alpha", "0.2", "--c", "0.5", "--print-config"}));
    CHECK(both.at("alpha") == 0.2);
    CHECK(both.at("prior").at("c") == 0.5);
    CHECK(both.at("prior").at("d") == 0.3);
    const auto switched = j(run({"radius", "--config", "cli_prec.json", "--family", "gl", "--tau", "0.02", "--print-config"}));
    CHECK(switched.at("prior").at("type") == "global_local");
    std::remove("cli_prec.json");
  }

  TEST_CASE("exit codes and help") {
    CHECK(run({"--help"}).code == 0);
    const auto help = run({"estimate", "--help"});
    CHECK(help.code == 0);
    for (const char* flag : {"--config", "--input", "--output", "--threads", "--seed", "--tau", "--alpha"}) {
      CHECK(help.out.find(flag) != std::string::npos);
    }
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"estimate", "--family", "gl", "--tau", "0.01"}).code == 2);
    CHECK(run({"estimate", "-i", "missing.csv", "--family", "gl", "--tau", "0.01"}).code == 2);
    write("cli_ragged.csv", "1,2\n3\n");
    const auto rag = run({"estimate", "-i", "cli_ragged.csv", "--family", "gl", "--tau", "0.01"});
    CHECK(rag.code == 2);
    CHECK(rag.err.find("row 2") != std::string::npos);
    CHECK(run({"estimate", "-i", "cli_ragged.csv", "--family", "gl", "--d", "0.5"}).code == 2);
    std::remove("cli_ragged.csv");
  }

  TEST_CASE("radius writes one row per observation") {
    write("cli_radius_in.csv", "0,0\n1,2\n5,0\n");
    const auto res = run({"radius", "-i", "cli_radius_in.csv", "--family", "eig", "--d", "0.5", "--c", "0.01"});
    CHECK(res.code == 0);
    std::istringstream in(res.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "s,weight,raw_radius,adjusted_radius");
    int n = 0;
    while (std::getline(in, line)) ++n;
    CHECK(n == 3);
    std::remove("cli_radius_in.csv");
  }

  TEST_CASE("interrupted writes leave no partial target") {
    // The output directory does not exist, so the temp file cannot be created.
    const auto res = run({"estimate", "-i", kFixtures + "/estimate_input.csv", "--family", "gl", "--tau", "1e-3", "-o",
                          "no-such-dir/out.csv"});
    CHECK(res.code == 2);
    std::ifstream in("no-such-dir/out.csv");
    CHECK_FALSE(in.good());
  }
}

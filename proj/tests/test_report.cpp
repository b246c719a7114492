#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "glshrink/report.hpp"
#include "test_util.hpp"

using namespace glshrink;

namespace {

Report sample_report() {
  Report r;
  r.config = {{"kind", "risk"}};
  ReportRow row{"risk", "gl:horseshoe:a=0.5", 1000, 6, 2, 1.0 / 3.0, "", 0.05, "risk_ratio", 0.1 + 0.2, 1e-17, 200, 42, 12.5};
  r.rows.push_back(row);
  row.statistic = "zero_block";
  row.value = NAN;
  r.rows.push_back(row);
  return r;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("CSV header and 17-digit round trip") {
    const std::string csv = report_csv(sample_report());
    std::istringstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "experiment,prior,n,q,k,tau_or_c,regime,alpha,statistic,value,se,replicates,seed,wall_ms");
    std::getline(in, line);
    CHECK(line.find("0.30000000000000004") != std::string::npos);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    std::getline(in, line);
    CHECK(line.find(",nan,") != std::string::npos);
  }

  TEST_CASE("JSON mirror round trips") {
    const Report r = sample_report();
    const Report back = report_from_json(report_json(r));
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].value == r.rows[0].value);
    CHECK(back.rows[0].tau_or_c == r.rows[0].tau_or_c);
    CHECK(std::isnan(back.rows[1].value));
    auto j = report_json(r);
    j["schema_version"] = 99;
    CHECK_ERROR_CODE(report_from_json(j), ErrorCode::ConfigError);
  }

  TEST_CASE("find matches on the key columns") {
    const Report r = sample_report();
    CHECK(r.find("risk_ratio", "gl:horseshoe:a=0.5", 1000, 2) == &r.rows[0]);
    CHECK(r.find("risk_ratio", "gl:horseshoe:a=0.5", 1000, 1) == nullptr);
  }

  TEST_CASE("atomic writes replace the target and leave no temp file") {
    const std::string path = "report_atomic_test.csv";
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "second");
    std::remove(path.c_str());
    CHECK_ERROR_CODE(write_file_atomic("/nonexistent-dir/x.csv", "x"), ErrorCode::IoError);
  }
}

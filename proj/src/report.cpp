#include "glshrink/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "glshrink/error.hpp"

namespace glshrink {

namespace {

constexpr const char* kHeader =
    "experiment,prior,n,q,k,tau_or_c,regime,alpha,statistic,value,se,replicates,seed,wall_ms";

// Labels never contain commas today, but quote defensively.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Report::append(const Report& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }

const ReportRow* Report::find(const std::string& statistic, const std::string& prior, std::int64_t n, int k,
                              double tau_or_c, const std::string& regime) const {
  for (const auto& r : rows) {
    if (r.statistic != statistic || r.prior != prior || r.n != n || r.k != k) continue;
    if (tau_or_c >= 0.0 && r.tau_or_c != tau_or_c) continue;
    if (!regime.empty() && r.regime != regime) continue;
    return &r;
  }
  return nullptr;
}

std::string report_csv(const Report& report) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& r : report.rows) {
    out << csv_field(r.experiment) << ',' << csv_field(r.prior) << ',' << r.n << ',' << r.q << ',' << r.k << ','
        << format_double(r.tau_or_c) << ',' << csv_field(r.regime) << ',' << format_double(r.alpha) << ','
        << csv_field(r.statistic) << ',' << format_double(r.value) << ',' << format_double(r.se) << ','
        << r.replicates << ',' << r.seed << ',' << format_double(r.wall_ms) << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const Report& report) {
  nlohmann::json j;
  j["schema_version"] = report.schema_version;
  j["config"] = report.config;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"experiment", r.experiment}, {"prior", r.prior}, {"n", r.n}, {"q", r.q}, {"k", r.k},
                    {"tau_or_c", r.tau_or_c}, {"regime", r.regime}, {"alpha", r.alpha},
                    {"statistic", r.statistic}, {"value", r.value}, {"se", r.se}, {"replicates", r.replicates},
                    {"seed", r.seed}, {"wall_ms", r.wall_ms}});
  }
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report rep;
  try {
    rep.schema_version = j.at("schema_version").get<int>();
    if (rep.schema_version != kReportSchemaVersion) {
      throw Error(ErrorCode::ConfigError, "unsupported report schema_version " + std::to_string(rep.schema_version));
    }
    rep.config = j.value("config", nlohmann::json::object());
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.experiment = r.at("experiment").get<std::string>();
      row.prior = r.at("prior").get<std::string>();
      row.n = r.at("n").get<std::int64_t>();
      row.q = r.at("q").get<std::int64_t>();
      row.k = r.at("k").get<int>();
      row.tau_or_c = r.at("tau_or_c").get<double>();
      row.regime = r.at("regime").get<std::string>();
      row.alpha = r.at("alpha").get<double>();
      row.statistic = r.at("statistic").get<std::string>();
      row.value = r.at("value").is_null() ? NAN : r.at("value").get<double>();
      row.se = r.at("se").is_null() ? NAN : r.at("se").get<double>();
      row.replicates = r.at("replicates").get<std::int64_t>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.wall_ms = r.at("wall_ms").get<double>();
      rep.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed report: ") + e.what());
  }
  return rep;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::IoError, "failed writing " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::IoError, "cannot rename to " + path);
  }
}

void write_report(const Report& report, const std::string& csv_path, const std::string& json_path) {
  write_file_atomic(csv_path, report_csv(report));
  if (!json_path.empty()) write_file_atomic(json_path, report_json(report).dump(2) + "\n");
}

}  // namespace glshrink

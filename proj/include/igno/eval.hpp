#pragma once

#include <string>
#include <vector>

#include "igno/array.hpp"
#include "igno/store.hpp"

namespace igno {

// Relative recovery error sqrt(sum (rec - true)^2 / sum true^2).
double rmse(const GridField& rec, const GridField& truth);

// Cross-correlation indicator for phase recoveries. Both fields are first
// rescaled to [0, 1]; the score is
//
//   sum(rec~^2 true~^2) / (sqrt(sum true~^2) sqrt(sum rec~^2)),
//
// which for binary fields counts the phase-1 overlap against the geometric
// mean of the phase-1 sizes.
double icorr(const GridField& rec, const GridField& truth);

// Absolute pointwise recovery error, for error-map exports.
GridField pointwise_error(const GridField& rec, const GridField& truth);

// One metric observation; report files aggregate these across runs.
struct ReportRow {
  std::string problem;
  std::string method;        // igno | pidions
  std::string distribution;  // in | out
  double snr_db = 0.0;       // infinity marks noise-free data
  std::string metric;        // rmse | icorr
  double value = 0.0;
  std::string run_id;
};

void write_report(const std::vector<ReportRow>& rows, const std::string& path);
std::vector<ReportRow> read_report(const std::string& path);

}  // namespace igno

#include "igno/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "igno/error.hpp"

namespace igno {

namespace {

void check_match(const GridField& rec, const GridField& truth, const char* where) {
  if (rec.nx != truth.nx || rec.ny != truth.ny)
    throw ShapeError(std::string(where) + ": grid mismatch");
  if (rec.values.size() == 0) throw ShapeError(std::string(where) + ": empty field");
}

Vector rescale_unit(const Vector& v, const char* where) {
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (hi <= lo)
    throw DomainError(std::string(where) + ": constant field cannot be rescaled");
  return (v.array() - lo) / (hi - lo);
}

}  // namespace

double rmse(const GridField& rec, const GridField& truth) {
  check_match(rec, truth, "rmse");
  const double denom = truth.values.squaredNorm();
  if (denom == 0.0) throw DomainError("rmse: reference field is identically zero");
  return std::sqrt((rec.values - truth.values).squaredNorm() / denom);
}

double icorr(const GridField& rec, const GridField& truth) {
  check_match(rec, truth, "icorr");
  Vector r = rescale_unit(rec.values, "icorr");
  Vector t = rescale_unit(truth.values, "icorr");
  const double num = (r.array().square() * t.array().square()).sum();
  const double denom = std::sqrt(t.array().square().sum()) *
                       std::sqrt(r.array().square().sum());
  return num / denom;
}

GridField pointwise_error(const GridField& rec, const GridField& truth) {
  check_match(rec, truth, "pointwise_error");
  GridField out(rec.nx, rec.ny);
  out.values = (rec.values - truth.values).cwiseAbs();
  return out;
}

void write_report(const std::vector<ReportRow>& rows, const std::string& path) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const ReportRow& r : rows)
    cells.push_back({r.problem, r.method, r.distribution, csv_number(r.snr_db),
                     r.metric, csv_number(r.value), r.run_id});
  write_csv(path, {"problem", "method", "distribution", "snr_db", "metric", "value",
                   "run_id"},
            cells);
}

std::vector<ReportRow> read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_report: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw IoError("read_report: " + path + " is empty");
  if (line != "problem,method,distribution,snr_db,metric,value,run_id")
    throw IoError("read_report: " + path + " has an unexpected header");

  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> parts;
    while (std::getline(ss, field, ',')) parts.push_back(field);
    if (parts.size() != 7)
      throw IoError("read_report: malformed row '" + line + "'");
    ReportRow r;
    r.problem = parts[0];
    r.method = parts[1];
    r.distribution = parts[2];
    r.snr_db = std::stod(parts[3]);
    r.metric = parts[4];
    r.value = std::stod(parts[5]);
    r.run_id = parts[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace igno

#pragma once

#include <string>

#include "splitsqp/splitting.hpp"

namespace splitsqp {

/// A solve report plus the instance it came from, as written by the CLI and
/// consumed by `verify`.
struct ReportDocument {
  SolveReport report;
  SolverConfig config;
  std::string instance_kind;  // "ed", "problem" or "none"
  std::string instance_json;  // embedded instance document ("" when none)
};

std::string report_document_to_json(const ReportDocument& doc, int indent = 2);
ReportDocument report_document_from_json(const std::string& text);
void save_report_document(const ReportDocument& doc, const std::string& path);
ReportDocument load_report_document(const std::string& path);

/// Relative error between two terminal objectives, in percent:
/// (f_split - f_baseline) / f_baseline * 100. Throws on a zero baseline.
double compute_re(double f_split, double f_baseline);

/// Benchmark-table CSV: iterations, objective, equality residual, seconds, RE.
std::string table_csv_header();
std::string table_csv_row(int instance_no, const std::string& algorithm,
                          const SolveReport& rep, double re_percent);

}  // namespace splitsqp

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "l2tri/batch.hpp"

namespace l2tri {

enum class ReportFormat { table, json, csv };

/// Throws InvalidConfig for an unknown name.
ReportFormat parse_report_format(std::string_view name);

/// Table output uses 13 significant digits; json and csv print every double
/// with enough digits to read back exactly. Non-finite values are written as
/// "inf", "-inf" or "nan".
std::string emit_report(const BatchReport& report, ReportFormat format);

/// Inverse of emit_report(..., json). Throws ParseError.
BatchReport parse_report_json(std::string_view text);

/// One line of the synthetic-example table.
struct ExampleRow {
  std::string name;
  std::string method;
  ScenePoint point = ScenePoint::Zero();
  double cost = 0.0;
  std::string status;
};

std::string emit_examples(const std::vector<ExampleRow>& rows, ReportFormat format);

/// printf-style %.<digits>g, with inf/nan spelled as in the reports.
std::string format_number(double value, int digits = 13);

}  // namespace l2tri

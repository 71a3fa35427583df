#include "l2tri/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "l2tri/dataset.hpp"

namespace l2tri {

namespace {

using nlohmann::json;

constexpr int kRoundTripDigits = std::numeric_limits<double>::max_digits10;

json number_to_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError("expected a number, got " + j.dump());
}

json row_to_json(const BatchRow& row) {
  return {{"views", row.views},
          {"points", row.points},
          {"total_seconds", number_to_json(row.total_seconds)},
          {"average_seconds", number_to_json(row.average_seconds())},
          {"total_cost", number_to_json(row.total_cost)},
          {"optimal", row.optimal}};
}

BatchRow row_from_json(const json& j) {
  BatchRow row;
  row.views = j.at("views").get<std::size_t>();
  row.points = j.at("points").get<std::size_t>();
  row.total_seconds = number_from_json(j.at("total_seconds"));
  row.total_cost = number_from_json(j.at("total_cost"));
  row.optimal = j.at("optimal").get<std::size_t>();
  return row;
}

json track_to_json(const TrackResult& r) {
  json out = {{"id", r.id},
              {"views", r.views},
              {"solution", json::array({number_to_json(r.solution.x()), number_to_json(r.solution.y()),
                                        number_to_json(r.solution.z())})},
              {"cost", number_to_json(r.cost)},
              {"initial_cost", number_to_json(r.initial_cost)},
              {"status", std::string(to_string(r.status))},
              {"iterations", r.iterations},
              {"kantorovich_distance", number_to_json(r.kantorovich_distance)},
              {"rho_squared", number_to_json(r.rho_squared)},
              {"gamma_squared", number_to_json(r.gamma_squared)},
              {"optimal", r.optimal},
              {"seconds", number_to_json(r.seconds)}};
  if (!r.error.empty()) out["error"] = r.error;
  return out;
}

TrackResult track_from_json(const json& j) {
  TrackResult r;
  r.id = j.at("id").get<std::string>();
  r.views = j.at("views").get<std::size_t>();
  const json& s = j.at("solution");
  if (!s.is_array() || s.size() != 3) throw ParseError("solution must hold 3 numbers");
  r.solution = ScenePoint(number_from_json(s[0]), number_from_json(s[1]), number_from_json(s[2]));
  r.cost = number_from_json(j.at("cost"));
  r.initial_cost = number_from_json(j.at("initial_cost"));
  r.status = parse_status(j.at("status").get<std::string>());
  r.iterations = j.at("iterations").get<int>();
  r.kantorovich_distance = number_from_json(j.at("kantorovich_distance"));
  r.rho_squared = number_from_json(j.at("rho_squared"));
  r.gamma_squared = number_from_json(j.at("gamma_squared"));
  r.optimal = j.at("optimal").get<bool>();
  r.seconds = number_from_json(j.at("seconds"));
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string emit_table(const BatchReport& report) {
  std::ostringstream out;
  out << "method " << report.method << ", " << report.tracks_processed() << " tracks solved, "
      << report.tracks_skipped << " skipped\n";
  out << pad("n", 4) << pad("# points", 10) << pad("ACT(s)", 22) << pad("time(s)", 22) << pad("R.E.", 22)
      << pad("optimal", 9) << '\n';
  const auto line = [&](const std::string& label, const BatchRow& row) {
    out << pad(label, 4) << pad(std::to_string(row.points), 10) << pad(format_number(row.average_seconds()), 22)
        << pad(format_number(row.total_seconds), 22) << pad(format_number(row.total_cost), 22)
        << pad(std::to_string(row.optimal), 9) << '\n';
  };
  for (const BatchRow& row : report.rows) line(std::to_string(row.views), row);
  if (!report.rows.empty()) line("all", report.totals);
  return out.str();
}

std::string emit_csv(const BatchReport& report) {
  std::ostringstream out;
  out << "id,views,x,y,z,cost,initial_cost,status,iterations,kantorovich_distance,rho_squared,"
         "gamma_squared,optimal,seconds,error\n";
  for (const TrackResult& r : report.details) {
    out << csv_field(r.id) << ',' << r.views;
    for (double v : {r.solution.x(), r.solution.y(), r.solution.z(), r.cost, r.initial_cost})
      out << ',' << format_number(v, kRoundTripDigits);
    out << ',' << to_string(r.status) << ',' << r.iterations;
    for (double v : {r.kantorovich_distance, r.rho_squared, r.gamma_squared})
      out << ',' << format_number(v, kRoundTripDigits);
    out << ',' << (r.optimal ? "true" : "false") << ',' << format_number(r.seconds, kRoundTripDigits) << ','
        << csv_field(r.error) << '\n';
  }
  return out.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::table;
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw InvalidConfig("unknown report format '" + std::string(name) + "' (expected table, json or csv)");
}

std::string format_number(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return buffer;
}

std::string emit_report(const BatchReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::table:
      return emit_table(report);
    case ReportFormat::csv:
      return emit_csv(report);
    case ReportFormat::json: {
      json rows = json::array();
      for (const BatchRow& row : report.rows) rows.push_back(row_to_json(row));
      json details = json::array();
      for (const TrackResult& r : report.details) details.push_back(track_to_json(r));
      const json out = {{"method", report.method},
                        {"tracks_in_file", report.tracks_in_file},
                        {"tracks_skipped", report.tracks_skipped},
                        {"rows", rows},
                        {"totals", row_to_json(report.totals)},
                        {"details", details}};
      return out.dump(2) + '\n';
    }
  }
  return {};
}

BatchReport parse_report_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    std::vector<TrackResult> details;
    for (const json& d : j.at("details")) details.push_back(track_from_json(d));
    BatchReport out;
    out.method = j.at("method").get<std::string>();
    out.tracks_in_file = j.at("tracks_in_file").get<std::size_t>();
    out.tracks_skipped = j.at("tracks_skipped").get<std::size_t>();
    for (const json& r : j.at("rows")) out.rows.push_back(row_from_json(r));
    out.totals = row_from_json(j.at("totals"));
    out.details = std::move(details);
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string emit_examples(const std::vector<ExampleRow>& rows, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::table:
      out << pad("example", 8) << pad("method", 16) << pad("x", 22) << pad("y", 22) << pad("z", 22)
          << pad("reprojection error", 22) << pad("status", 22) << '\n';
      for (const ExampleRow& r : rows)
        out << pad(r.name, 8) << pad(r.method, 16) << pad(format_number(r.point.x()), 22)
            << pad(format_number(r.point.y()), 22) << pad(format_number(r.point.z()), 22)
            << pad(format_number(r.cost), 22) << pad(r.status, 22) << '\n';
      break;
    case ReportFormat::csv:
      out << "example,method,x,y,z,cost,status\n";
      for (const ExampleRow& r : rows) {
        out << csv_field(r.name) << ',' << r.method;
        for (double v : {r.point.x(), r.point.y(), r.point.z(), r.cost})
          out << ',' << format_number(v, kRoundTripDigits);
        out << ',' << r.status << '\n';
      }
      break;
    case ReportFormat::json: {
      json list = json::array();
      for (const ExampleRow& r : rows)
        list.push_back({{"example", r.name},
                        {"method", r.method},
                        {"solution", json::array({number_to_json(r.point.x()), number_to_json(r.point.y()),
                                                  number_to_json(r.point.z())})},
                        {"cost", number_to_json(r.cost)},
                        {"status", r.status}});
      out << list.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

}  // namespace l2tri

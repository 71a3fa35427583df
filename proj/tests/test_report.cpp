#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "l2tri/report.hpp"

using namespace l2tri;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

TrackResult sample_track(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrackResult r;
  r.id = "t" + std::to_string(index);
  r.views = 2 + static_cast<std::size_t>(index % 3);
  r.solution = ScenePoint(u(rng), u(rng) * 1e-7, u(rng) * 1e9);
  r.cost = std::abs(u(rng)) / 3.0;
  r.initial_cost = r.cost + 1.0 / 7.0;
  r.status = index % 2 ? SolveStatus::converged : SolveStatus::max_iterations;
  r.iterations = index;
  r.kantorovich_distance = std::abs(u(rng)) * 1e-13;
  r.rho_squared = std::exp(40.0 * u(rng));
  r.gamma_squared = r.cost;
  r.optimal = index % 2 == 1;
  r.seconds = 1e-5 * std::abs(u(rng));
  return r;
}

}  // namespace

TEST_CASE("report format names") {
  CHECK(parse_report_format("table") == ReportFormat::table);
  CHECK(parse_report_format("json") == ReportFormat::json);
  CHECK(parse_report_format("csv") == ReportFormat::csv);
  CHECK_THROWS_AS(parse_report_format("xml"), InvalidConfig);
  CHECK_THROWS_AS(parse_report_format(""), InvalidConfig);
}

TEST_CASE("format_number") {
  CHECK(format_number(0.05555555555555555) == "0.05555555555556");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(kNaN) == "nan");
  CHECK(format_number(1.0 / 3.0, 17) == "0.33333333333333331");
  CHECK(std::stod(format_number(0.1 + 0.2, 17)) == 0.1 + 0.2);
}

TEST_CASE("empty batch prints only headers") {
  const BatchReport r = aggregate({}, "newton_raphson", 0, 0);
  const auto table = lines_of(emit_report(r, ReportFormat::table));
  REQUIRE(table.size() == 2);
  CHECK(table[0] == "method newton_raphson, 0 tracks solved, 0 skipped");
  CHECK(table[1].find("ACT(s)") != std::string::npos);
  CHECK(lines_of(emit_report(r, ReportFormat::csv)).size() == 1);
  const BatchReport back = parse_report_json(emit_report(r, ReportFormat::json));
  CHECK(back.details.empty());
  CHECK(back.rows.empty());
  CHECK(back.method == "newton_raphson");
}

TEST_CASE("table rows use 13 significant digits and end with the totals") {
  TrackResult a;
  a.views = 2;
  a.cost = 1.0 / 3.0;
  a.seconds = 0.25;
  a.status = SolveStatus::converged;
  a.optimal = true;
  TrackResult b = a;
  b.views = 3;
  b.cost = 2.0 / 3.0;
  const BatchReport r = aggregate({a, b, b}, "gn_line_search", 4, 1);
  const auto table = lines_of(emit_report(r, ReportFormat::table));
  REQUIRE(table.size() == 5);
  CHECK(table[0] == "method gn_line_search, 3 tracks solved, 1 skipped");
  CHECK(table[2].find("0.3333333333333 ") != std::string::npos);
  CHECK(table[3].rfind("   3         2", 0) == 0);
  CHECK(table[3].find("1.333333333333") != std::string::npos);
  CHECK(table[4].rfind(" all         3", 0) == 0);
  CHECK(table[4].find(" 0.75 ") != std::string::npos);
  CHECK(table[4].find("1.666666666667") != std::string::npos);
}

TEST_CASE("json round trip keeps every field exactly") {
  std::mt19937_64 rng(17);
  std::vector<TrackResult> details;
  for (int i = 0; i < 40; ++i) details.push_back(sample_track(rng, i));
  details[3].cost = kInf;
  details[3].rho_squared = kNaN;
  details[4].solution.x() = -kInf;
  details[5].error = "rays \"coincide\"";
  details[5].status = SolveStatus::degenerate_geometry;
  details[6].status = SolveStatus::depth_degenerate;
  const BatchReport r = aggregate(details, "levenberg_marquardt", 50, 10);

  const BatchReport back = parse_report_json(emit_report(r, ReportFormat::json));
  CHECK(back.method == r.method);
  CHECK(back.tracks_in_file == 50);
  CHECK(back.tracks_skipped == 10);
  REQUIRE(back.details.size() == r.details.size());
  for (std::size_t i = 0; i < r.details.size(); ++i) {
    const TrackResult& x = r.details[i];
    const TrackResult& y = back.details[i];
    CHECK(x.id == y.id);
    CHECK(x.views == y.views);
    for (int k = 0; k < 3; ++k) CHECK(same(x.solution[k], y.solution[k]));
    CHECK(same(x.cost, y.cost));
    CHECK(x.initial_cost == y.initial_cost);
    CHECK(x.status == y.status);
    CHECK(x.iterations == y.iterations);
    CHECK(x.kantorovich_distance == y.kantorovich_distance);
    CHECK(same(x.rho_squared, y.rho_squared));
    CHECK(x.gamma_squared == y.gamma_squared);
    CHECK(x.optimal == y.optimal);
    CHECK(x.error == y.error);
  }
  REQUIRE(back.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(back.rows[i].views == r.rows[i].views);
    CHECK(back.rows[i].points == r.rows[i].points);
    CHECK(back.rows[i].total_cost == r.rows[i].total_cost);
    CHECK(back.rows[i].optimal == r.rows[i].optimal);
  }
  CHECK(back.totals.points == r.totals.points);
  CHECK(back.totals.total_cost == r.totals.total_cost);
}

TEST_CASE("malformed json reports") {
  CHECK_THROWS_AS(parse_report_json("{"), ParseError);
  CHECK_THROWS_AS(parse_report_json("[]"), ParseError);
  CHECK_THROWS_AS(parse_report_json("{\"method\": \"x\"}"), ParseError);
  const BatchReport r = aggregate({TrackResult{}}, "m", 1, 0);
  std::string text = emit_report(r, ReportFormat::json);
  const auto at = text.find("\"max_iterations\"");
  REQUIRE(at != std::string::npos);
  CHECK_THROWS_AS(parse_report_json(text.replace(at, 16, "\"sideways\"")), ParseError);
  text = emit_report(r, ReportFormat::json);
  const auto cost = text.find("\"cost\": 0.0");
  REQUIRE(cost != std::string::npos);
  CHECK_THROWS_AS(parse_report_json(text.replace(cost, 11, "\"cost\": \"big\"")), ParseError);
}

TEST_CASE("csv quotes awkward ids and errors") {
  TrackResult t;
  t.id = "a,b";
  t.views = 2;
  t.error = "say \"no\"";
  t.cost = kNaN;
  const auto lines = lines_of(emit_report(aggregate({t}, "m", 1, 0), ReportFormat::csv));
  REQUIRE(lines.size() == 2);
  CHECK(lines[1].rfind("\"a,b\",2,", 0) == 0);
  CHECK(lines[1].find(",nan,") != std::string::npos);
  CHECK(lines[1].size() >= 12);
  CHECK(lines[1].substr(lines[1].size() - 12) == "\"say \"\"no\"\"\"");
}

TEST_CASE("csv numbers read back exactly") {
  std::mt19937_64 rng(2);
  const TrackResult t = sample_track(rng, 1);
  const auto lines = lines_of(emit_report(aggregate({t}, "m", 1, 0), ReportFormat::csv));
  REQUIRE(lines.size() == 2);
  std::vector<std::string> fields;
  std::istringstream in(lines[1]);
  for (std::string f; std::getline(in, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() >= 14);
  CHECK(std::stod(fields[2]) == t.solution.x());
  CHECK(std::stod(fields[3]) == t.solution.y());
  CHECK(std::stod(fields[4]) == t.solution.z());
  CHECK(std::stod(fields[5]) == t.cost);
  CHECK(fields[7] == "converged");
  CHECK(std::stod(fields[10]) == t.rho_squared);
}

TEST_CASE("example table, csv and json") {
  const std::vector<ExampleRow> rows{{"SA2", "newton_raphson", ScenePoint(-3.0 / 11, -2.0 / 11, 7.0 / 11), 1.0 / 18,
                                      "converged"}};
  const auto table = lines_of(emit_examples(rows, ReportFormat::table));
  REQUIRE(table.size() == 2);
  CHECK(table[1].find("-0.2727272727273") != std::string::npos);
  CHECK(table[1].find("0.05555555555556") != std::string::npos);
  const auto csv = lines_of(emit_examples(rows, ReportFormat::csv));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "example,method,x,y,z,cost,status");
  CHECK(csv[1].rfind("SA2,newton_raphson,", 0) == 0);
  const std::string json = emit_examples(rows, ReportFormat::json);
  CHECK(json.find("\"example\": \"SA2\"") != std::string::npos);
  CHECK(lines_of(emit_examples({}, ReportFormat::table)).size() == 1);
}

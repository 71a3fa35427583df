#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "l2tri/batch.hpp"
#include "l2tri/dataset.hpp"
#include "l2tri/derivative_check.hpp"
#include "l2tri/examples.hpp"
#include "l2tri/initializer.hpp"
#include "l2tri/report.hpp"
#include "l2tri/solver.hpp"

namespace {

constexpr int kSuccess = 0;
constexpr int kTrackFailure = 1;
constexpr int kInputError = 2;

struct Options {
  std::string method = "gn_line_search";
  std::string report = "table";
  std::string out;
  std::string problem;
  std::string cameras;
  std::string points;
  unsigned jobs = 1;
  int repeats = 1;
  double sentinel = -1.0;
  int max_iterations = 50;
};

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw l2tri::InvalidConfig("cannot write '" + path + "'");
  out << text;
}

l2tri::BatchOptions batch_options(const Options& o) {
  l2tri::BatchOptions b;
  b.solver.method = l2tri::parse_method(o.method);
  b.solver.max_iterations = o.max_iterations;
  b.jobs = o.jobs;
  b.timing_repeats = o.repeats;
  return b;
}

int finish_batch(const l2tri::BatchReport& report, const Options& o) {
  write_output(l2tri::emit_report(report, l2tri::parse_report_format(o.report)), o.out);
  const std::size_t failures = report.failures();
  if (failures > 0) std::cerr << failures << " track(s) did not converge\n";
  return failures > 0 ? kTrackFailure : kSuccess;
}

int run_solve(const Options& o) {
  const l2tri::Dataset dataset = l2tri::load_native_problem(o.problem);
  const auto options = batch_options(o);
  return finish_batch(l2tri::run_batch(dataset, options), o);
}

int run_batch(const Options& o) {
  const auto camera_files = l2tri::expand_glob(o.cameras);
  if (camera_files.empty()) throw l2tri::ParseError("no camera files match '" + o.cameras + "'");
  l2tri::MeasurementOptions measurement;
  measurement.missing_sentinel = o.sentinel;
  const l2tri::Dataset dataset = l2tri::parse_vgg_dataset(camera_files, o.points, measurement);
  const auto options = batch_options(o);
  if (dataset.tracks_skipped > 0)
    std::cerr << "warning: skipped " << dataset.tracks_skipped << " track(s) with fewer than 2 views\n";
  return finish_batch(l2tri::run_batch(dataset, options), o);
}

int run_examples(const Options& o) {
  l2tri::SolverConfig config;
  config.method = l2tri::parse_method(o.method);
  config.max_iterations = o.max_iterations;
  const auto format = l2tri::parse_report_format(o.report);
  std::vector<l2tri::ExampleRow> rows;
  bool failed = false;
  for (const auto& example : l2tri::synthetic_examples()) {
    const auto report = l2tri::solve(example.problem, config);
    failed = failed || report.status != l2tri::SolveStatus::converged;
    rows.push_back({example.name, std::string(l2tri::to_string(config.method)), report.solution, report.cost,
                    std::string(l2tri::to_string(report.status))});
  }
  write_output(l2tri::emit_examples(rows, format), o.out);
  return failed ? kTrackFailure : kSuccess;
}

int run_check(const Options& o) {
  const l2tri::Dataset dataset = l2tri::load_native_problem(o.problem);
  bool failed = false;
  std::cout << "track  point  jacobian_error  hessian_error  result\n";
  for (const auto& track : dataset.tracks) {
    const auto problem = l2tri::make_problem(dataset, track);
    const auto report = l2tri::solve(problem);
    const std::pair<const char*, l2tri::ScenePoint> points[] = {{"start", report.initial_point},
                                                                {"solution", report.solution}};
    for (const auto& [label, point] : points) {
      try {
        const auto audit = l2tri::audit_derivatives(problem, point);
        failed = failed || !audit.passed;
        std::cout << track.id << "  " << label << "  " << l2tri::format_number(audit.jacobian_error, 3) << "  "
                  << l2tri::format_number(audit.hessian_error, 3) << "  " << (audit.passed ? "ok" : "FAIL")
                  << '\n';
      } catch (const l2tri::DepthNearZero&) {
        failed = true;
        std::cout << track.id << "  " << label << "  -  -  undefined\n";
      }
    }
  }
  return failed ? kTrackFailure : kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view L2 triangulation"};
  app.require_subcommand(1);
  Options o;

  const auto add_method = [&](CLI::App* cmd) {
    cmd->add_option("--method", o.method,
                    "newton_raphson | gauss_newton | levenberg_marquardt | gn_line_search | gn_trust_region")
        ->capture_default_str();
    cmd->add_option("--max-iterations", o.max_iterations)->capture_default_str();
  };
  const auto add_report = [&](CLI::App* cmd) {
    cmd->add_option("--report", o.report, "table | json | csv")->capture_default_str();
    cmd->add_option("--out", o.out, "Write the report here instead of stdout");
  };

  auto* solve = app.add_subcommand("solve", "Solve every track of a native problem file");
  solve->add_option("--problem", o.problem)->required()->check(CLI::ExistingFile);
  add_method(solve);
  add_report(solve);
  solve->add_option("--repeats", o.repeats, "Median-of-N timing")->check(CLI::PositiveNumber);

  auto* batch = app.add_subcommand("batch", "Triangulate a camera-file + measurement-matrix dataset");
  batch->add_option("--cameras", o.cameras, "Camera file glob, taken in sorted order")->required();
  batch->add_option("--points", o.points, "Measurement matrix file")->required()->check(CLI::ExistingFile);
  batch->add_option("--jobs", o.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  batch->add_option("--repeats", o.repeats, "Median-of-N timing")->check(CLI::PositiveNumber);
  batch->add_option("--missing", o.sentinel, "Coordinate marking a missing view")->capture_default_str();
  add_method(batch);
  add_report(batch);

  auto* examples = app.add_subcommand("examples", "Solve the four synthetic benchmark examples");
  add_method(examples);
  add_report(examples);

  auto* check = app.add_subcommand("check-derivatives", "Compare analytic derivatives with finite differences");
  check->add_option("--problem", o.problem)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*solve) return run_solve(o);
    if (*batch) return run_batch(o);
    if (*examples) return run_examples(o);
    return run_check(o);
  } catch (const l2tri::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const l2tri::DimensionMismatch& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const l2tri::InvalidCamera& e) {
    std::cerr << "invalid camera: " << e.what() << '\n';
  } catch (const l2tri::InvalidConfig& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
  } catch (const l2tri::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kInputError;
}

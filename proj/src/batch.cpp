#include "l2tri/batch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "l2tri/verification.hpp"

namespace l2tri {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::size_t BatchReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(details.begin(), details.end(), [](const TrackResult& r) { return r.failed(); }));
}

TrackResult solve_track(const Dataset& dataset, const Track& track, const BatchOptions& options) {
  TrackResult out;
  out.id = track.id;
  out.views = track.observations.size();
  out.rho_squared = out.gamma_squared = out.kantorovich_distance = kNaN;
  try {
    const TriangulationProblem problem = make_problem(dataset, track);
    SolverConfig config = options.solver;
    config.record_trace = false;

    const int repeats = std::max(1, options.timing_repeats);
    std::vector<double> times;
    SolveReport report;
    for (int i = 0; i < repeats; ++i) {
      const auto start = std::chrono::steady_clock::now();
      report = solve(problem, config);
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::nth_element(times.begin(), times.begin() + repeats / 2, times.end());
    out.seconds = times[static_cast<std::size_t>(repeats / 2)];

    out.solution = report.solution;
    out.cost = report.cost;
    out.initial_cost = report.initial_cost;
    out.status = report.status;
    out.iterations = report.iterations;
    out.kantorovich_distance = report.kantorovich_distance;
    if (options.diagnostics && std::isfinite(report.cost)) {
      try {
        const OptimalityReport check = verify(problem, report.solution, report.initial_cost);
        out.rho_squared = check.rho_squared;
        out.gamma_squared = check.gamma_squared;
        out.optimal = check.numerically_l2_optimal;
      } catch (const Error&) {
        out.optimal = false;
      }
    } else {
      out.gamma_squared = report.cost;
      out.optimal = optimality_verdict(report.kantorovich_distance, report.cost, report.initial_cost);
    }
  } catch (const Error& e) {
    out.error = e.what();
    out.status = SolveStatus::degenerate_geometry;
    out.cost = kNaN;
  }
  return out;
}

BatchReport run_batch(const Dataset& dataset, const BatchOptions& options) {
  options.solver.validate();
  std::vector<TrackResult> details(dataset.tracks.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(details.size())));

  if (jobs <= 1) {
    for (std::size_t i = 0; i < details.size(); ++i) details[i] = solve_track(dataset, dataset.tracks[i], options);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < details.size(); i = next++)
          details[i] = solve_track(dataset, dataset.tracks[i], options);
      });
    }
    for (std::thread& t : workers) t.join();
  }

  return aggregate(std::move(details), std::string(to_string(options.solver.method)), dataset.tracks_in_file,
                   dataset.tracks_skipped);
}

BatchReport aggregate(std::vector<TrackResult> details, std::string method, std::size_t tracks_in_file,
                      std::size_t tracks_skipped) {
  BatchReport out;
  out.method = std::move(method);
  out.tracks_in_file = tracks_in_file;
  out.tracks_skipped = tracks_skipped;

  std::map<std::size_t, BatchRow> by_views;
  for (const TrackResult& r : details) {
    BatchRow& row = by_views[r.views];
    row.views = r.views;
    ++row.points;
    row.total_seconds += r.seconds;
    if (std::isfinite(r.cost)) row.total_cost += r.cost;
    if (r.optimal) ++row.optimal;
  }
  for (const auto& [views, row] : by_views) {
    out.rows.push_back(row);
    out.totals.points += row.points;
    out.totals.total_seconds += row.total_seconds;
    out.totals.total_cost += row.total_cost;
    out.totals.optimal += row.optimal;
  }
  out.details = std::move(details);
  return out;
}

}  // namespace l2tri

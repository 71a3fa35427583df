#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "l2tri/dataset.hpp"
#include "l2tri/solver.hpp"

namespace l2tri {

struct TrackResult {
  std::string id;
  std::size_t views = 0;
  ScenePoint solution = ScenePoint::Zero();
  double cost = 0.0;
  double initial_cost = 0.0;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double kantorovich_distance = 0.0;
  double rho_squared = 0.0;
  double gamma_squared = 0.0;
  bool optimal = false;
  /// Wall-clock solve time, parsing and diagnostics excluded.
  double seconds = 0.0;
  /// Exception text when the track could not be solved at all.
  std::string error;

  bool failed() const noexcept { return !error.empty() || status != SolveStatus::converged; }
};

/// Aggregate over all tracks seen by the same number of cameras.
struct BatchRow {
  std::size_t views = 0;
  std::size_t points = 0;
  double total_seconds = 0.0;
  double total_cost = 0.0;  ///< finite costs only
  std::size_t optimal = 0;

  double average_seconds() const noexcept {
    return points == 0 ? 0.0 : total_seconds / static_cast<double>(points);
  }
};

struct BatchReport {
  std::string method;
  std::vector<BatchRow> rows;  ///< ascending view count
  BatchRow totals;             ///< views is 0
  std::vector<TrackResult> details;
  std::size_t tracks_in_file = 0;
  std::size_t tracks_skipped = 0;

  std::size_t tracks_processed() const noexcept { return details.size(); }
  std::size_t failures() const;
};

struct BatchOptions {
  SolverConfig solver;
  unsigned jobs = 1;
  /// Time each solve this many times and keep the median.
  int timing_repeats = 1;
  /// Compute the curvature and Kantorovich diagnostics for every track.
  bool diagnostics = true;
};

TrackResult solve_track(const Dataset& dataset, const Track& track, const BatchOptions& options);

/// Solves every track independently; results keep the dataset's track order
/// regardless of `jobs`.
BatchReport run_batch(const Dataset& dataset, const BatchOptions& options = {});

/// Groups details by view count. Totals are the column sums of the rows.
BatchReport aggregate(std::vector<TrackResult> details, std::string method, std::size_t tracks_in_file,
                      std::size_t tracks_skipped);

}  // namespace l2tri

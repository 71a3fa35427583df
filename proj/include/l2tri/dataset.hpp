#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "l2tri/core.hpp"

namespace l2tri {

/// Malformed input text. Line and column are one-based; column 0 means the
/// whole line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0);
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Point-file column count does not match the number of cameras.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

struct TrackObservation {
  std::size_t camera = 0;
  double u = 0.0;
  double v = 0.0;
};

struct Track {
  std::string id;
  std::vector<TrackObservation> observations;
};

struct Dataset {
  std::vector<CameraMatrix> cameras;
  std::vector<Track> tracks;
  std::size_t tracks_in_file = 0;
  std::size_t tracks_skipped = 0;
};

/// Line-oriented native format:
///
///   camera <label>
///   <4 numbers>
///   <4 numbers>
///   <4 numbers>
///   track <id>
///   <camera label> <u> <v>
///   ...
///
/// `#` starts a comment. LF and CRLF line endings are accepted.
Dataset parse_native_problem(std::string_view text);
Dataset load_native_problem(const std::filesystem::path& file);

/// One whitespace-separated 3x4 camera matrix.
Mat34 parse_camera_matrix(std::string_view text);

struct MeasurementOptions {
  /// A (u, v) pair with either value exactly equal to this is a missing view.
  double missing_sentinel = -1.0;
};

/// Measurement matrix: one row per scene point, a (u, v) pair per camera.
/// Tracks keep their zero-based row number as id; rows with fewer than two
/// surviving views are counted in tracks_skipped.
Dataset parse_measurements(std::vector<CameraMatrix> cameras, std::string_view text,
                           const MeasurementOptions& options = {});

/// Cameras in the given file order followed by the measurement file.
Dataset parse_vgg_dataset(const std::vector<std::filesystem::path>& camera_files,
                          const std::filesystem::path& point_file, const MeasurementOptions& options = {});

/// Sorted matches of a shell wildcard pattern. Empty when nothing matches.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

TriangulationProblem make_problem(const Dataset& dataset, const Track& track);

std::string read_text_file(const std::filesystem::path& file);

}  // namespace l2tri

#include "l2tri/dataset.hpp"

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>

#include <Eigen/LU>

namespace l2tri {

namespace {

std::string format_location(const std::string& message, std::size_t line, std::size_t column) {
  if (line == 0) return message;
  std::string out = "line " + std::to_string(line);
  if (column != 0) out += ", column " + std::to_string(column);
  return out + ": " + message;
}

struct Token {
  std::string_view text;
  std::size_t column = 0;  // one-based
};

struct Line {
  std::size_t number = 0;
  std::vector<Token> tokens;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<Token> tokenize(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

// Non-blank lines of the text, comments stripped.
std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++number;
    auto tokens = tokenize(text.substr(pos, end - pos));
    if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

double number(const Token& token, std::size_t line) {
  if (const auto v = to_double(token.text)) return *v;
  throw ParseError("expected a finite number, got '" + std::string(token.text) + "'", line, token.column);
}

// Rejects cameras whose left block is numerically singular for its scale.
CameraMatrix checked_camera(const Mat34& p, std::string label, std::size_t index) {
  try {
    CameraMatrix camera(p, label);
    const Mat3 m = camera.left_block();
    const double scale = m.norm();
    if (!(std::abs(Eigen::FullPivLU<Mat3>(m).determinant()) > 1e-14 * scale * scale * scale))
      throw InvalidCamera("left 3x3 block is singular", index);
    return camera;
  } catch (const InvalidCamera& e) {
    throw InvalidCamera("camera " + std::to_string(index) + (label.empty() ? "" : " ('" + label + "')") +
                            ": " + e.what(),
                        index);
  }
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(format_location(message, line, column)), message_(message), line_(line), column_(column) {}

Dataset parse_native_problem(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  Dataset out;
  std::map<std::string, std::size_t, std::less<>> camera_index;
  std::vector<std::size_t> track_lines;

  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& head = lines[i];
    const std::string_view keyword = head.tokens[0].text;
    if (keyword == "camera") {
      if (head.tokens.size() != 2) throw ParseError("expected 'camera <label>'", head.number, 1);
      const std::string label(head.tokens[1].text);
      if (camera_index.count(label))
        throw ParseError("duplicate camera label '" + label + "'", head.number, head.tokens[1].column);
      Mat34 p;
      for (int r = 0; r < 3; ++r) {
        if (i + 1 + r >= lines.size())
          throw ParseError("camera '" + label + "' needs 3 rows of 4 numbers", head.number, 0);
        const Line& row = lines[i + 1 + r];
        if (row.tokens.size() != 4)
          throw ParseError("camera row needs 4 numbers, got " + std::to_string(row.tokens.size()), row.number,
                           row.tokens.front().column);
        for (int c = 0; c < 4; ++c) p(r, c) = number(row.tokens[c], row.number);
      }
      const std::size_t index = out.cameras.size();
      out.cameras.push_back(checked_camera(p, label, index));
      camera_index.emplace(label, index);
      i += 4;
    } else if (keyword == "track") {
      if (head.tokens.size() != 2) throw ParseError("expected 'track <id>'", head.number, 1);
      Track track{std::string(head.tokens[1].text), {}};
      ++i;
      while (i < lines.size() && lines[i].tokens[0].text != "camera" && lines[i].tokens[0].text != "track") {
        const Line& obs = lines[i];
        if (obs.tokens.size() != 3)
          throw ParseError("expected '<camera label> <u> <v>'", obs.number, obs.tokens.front().column);
        const auto found = camera_index.find(obs.tokens[0].text);
        if (found == camera_index.end())
          throw ParseError("unknown camera '" + std::string(obs.tokens[0].text) + "'", obs.number,
                           obs.tokens[0].column);
        for (const TrackObservation& seen : track.observations)
          if (seen.camera == found->second)
            throw ParseError("camera '" + found->first + "' observed twice in track '" + track.id + "'",
                             obs.number, obs.tokens[0].column);
        track.observations.push_back(
            {found->second, number(obs.tokens[1], obs.number), number(obs.tokens[2], obs.number)});
        ++i;
      }
      if (track.observations.size() < 2)
        throw ParseError("track requires >= 2 views", head.number, head.tokens[1].column);
      out.tracks.push_back(std::move(track));
    } else {
      throw ParseError("unexpected '" + std::string(keyword) + "'", head.number, head.tokens[0].column);
    }
  }

  if (out.tracks.empty()) throw ParseError("no tracks");
  out.tracks_in_file = out.tracks.size();
  return out;
}

Dataset load_native_problem(const std::filesystem::path& file) {
  return parse_native_problem(read_text_file(file));
}

Mat34 parse_camera_matrix(std::string_view text) {
  std::vector<double> values;
  for (const Line& line : split_lines(text))
    for (const Token& token : line.tokens) values.push_back(number(token, line.number));
  if (values.size() != 12)
    throw ParseError("camera file needs 12 numbers, got " + std::to_string(values.size()));
  Mat34 p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) p(r, c) = values[static_cast<std::size_t>(4 * r + c)];
  return p;
}

Dataset parse_measurements(std::vector<CameraMatrix> cameras, std::string_view text,
                           const MeasurementOptions& options) {
  Dataset out;
  out.cameras = std::move(cameras);
  const std::size_t columns = 2 * out.cameras.size();
  std::size_t row = 0;
  for (const Line& line : split_lines(text)) {
    if (line.tokens.size() != columns)
      throw DimensionMismatch("line " + std::to_string(line.number) + ": expected " + std::to_string(columns) +
                              " values for " + std::to_string(out.cameras.size()) + " cameras, got " +
                              std::to_string(line.tokens.size()));
    Track track{std::to_string(row++), {}};
    for (std::size_t c = 0; c < out.cameras.size(); ++c) {
      const double u = number(line.tokens[2 * c], line.number);
      const double v = number(line.tokens[2 * c + 1], line.number);
      if (u == options.missing_sentinel || v == options.missing_sentinel) continue;
      track.observations.push_back({c, u, v});
    }
    ++out.tracks_in_file;
    if (track.observations.size() < 2) {
      ++out.tracks_skipped;
      continue;
    }
    out.tracks.push_back(std::move(track));
  }
  return out;
}

Dataset parse_vgg_dataset(const std::vector<std::filesystem::path>& camera_files,
                          const std::filesystem::path& point_file, const MeasurementOptions& options) {
  std::vector<CameraMatrix> cameras;
  cameras.reserve(camera_files.size());
  for (std::size_t i = 0; i < camera_files.size(); ++i) {
    const Mat34 p = [&] {
      try {
        return parse_camera_matrix(read_text_file(camera_files[i]));
      } catch (const ParseError& e) {
        throw ParseError(camera_files[i].string() + ": " + e.message(), e.line(), e.column());
      }
    }();
    cameras.push_back(checked_camera(p, camera_files[i].filename().string(), i));
  }
  return parse_measurements(std::move(cameras), read_text_file(point_file), options);
}

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  glob_t matches{};
  std::vector<std::filesystem::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &matches) == 0) {
    for (std::size_t i = 0; i < matches.gl_pathc; ++i) out.emplace_back(matches.gl_pathv[i]);
  }
  ::globfree(&matches);
  std::sort(out.begin(), out.end());
  return out;
}

TriangulationProblem make_problem(const Dataset& dataset, const Track& track) {
  std::vector<CameraMatrix> cameras;
  std::vector<ImageObservation> observations;
  cameras.reserve(track.observations.size());
  observations.reserve(track.observations.size());
  for (const TrackObservation& obs : track.observations) {
    if (obs.camera >= dataset.cameras.size())
      throw InvalidProblem("track '" + track.id + "' references camera " + std::to_string(obs.camera) +
                           " of " + std::to_string(dataset.cameras.size()));
    cameras.push_back(dataset.cameras[obs.camera]);
    observations.push_back({obs.u, obs.v});
  }
  return TriangulationProblem(std::move(cameras), std::move(observations));
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace l2tri

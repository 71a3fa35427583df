#pragma once

#include <string>
#include <vector>

#include "l2tri/core.hpp"

namespace l2tri {

/// The four synthetic cameras used by the classic small-scale benchmarks.
std::vector<CameraMatrix> synthetic_cameras();

struct SyntheticExample {
  std::string name;
  TriangulationProblem problem;
  ScenePoint published_point;
  double published_cost;
};

/// SA2, SA3, SA4 (first 2/3/4 cameras, every image at the origin) and the
/// conservative case Con (first three cameras, scattered images), each with
/// its published globally optimal point and cost.
std::vector<SyntheticExample> synthetic_examples();

/// Cost reported for Con by the LMI-based benchmark method, which is not the
/// global optimum.
inline constexpr double kConBenchmarkCost = 1.265349079248799;
/// The point that method returns for Con.
ScenePoint con_benchmark_point();

/// The same four examples in the native problem-file format.
std::string synthetic_examples_text();

}  // namespace l2tri

#include "l2tri/examples.hpp"

namespace l2tri {

std::vector<CameraMatrix> synthetic_cameras() {
  Mat34 p1, p2, p3, p4;
  p1 << 1, 0, 0, 0,
        0, 1, 0, 0,
        0, 0, 1, 1;
  p2 << -1, -1, -1, 0,
         1,  0, -1, 1,
         0,  0,  1, 1;
  p3 <<  0, -1,  0, 0,
         0,  0, -1, 1,
        -1, -1,  0, 1;
  p4 <<  0, -1, -1, 0,
         0,  1, -1, 1,
         1,  0,  1, 1;
  return {CameraMatrix(p1, "P1"), CameraMatrix(p2, "P2"), CameraMatrix(p3, "P3"), CameraMatrix(p4, "P4")};
}

std::vector<SyntheticExample> synthetic_examples() {
  const auto cams = synthetic_cameras();
  auto first = [&](std::size_t n) { return std::vector<CameraMatrix>(cams.begin(), cams.begin() + n); };
  auto origin = [](std::size_t n) { return std::vector<ImageObservation>(n, ImageObservation{0.0, 0.0}); };

  std::vector<SyntheticExample> out;
  out.push_back({"SA2", TriangulationProblem(first(2), origin(2)),
                 ScenePoint(-0.272727272727273, -0.181818181818182, 0.636363636363636), 0.055555555555556});
  out.push_back({"SA3", TriangulationProblem(first(3), origin(3)),
                 ScenePoint(-0.302506061882800, -0.160909312731383, 0.799090767385097), 0.105211035962142});
  out.push_back({"SA4", TriangulationProblem(first(4), origin(4)),
                 ScenePoint(-0.232284268136407, -0.334519054968205, 0.696806894375664), 0.209906166263248});
  out.push_back({"Con",
                 TriangulationProblem(first(3), {{0.9, -0.9}, {0.6, 2.0}, {2.0, 1.3}}),
                 ScenePoint(1.424098078272550, -1.238341159147880, 0.115482211291935), 1.223123745015136});
  return out;
}

ScenePoint con_benchmark_point() { return {1.314094728910344, -1.106491029764633, 0.043599248387159}; }

std::string synthetic_examples_text() {
  return R"(# Four synthetic cameras and the SA2/SA3/SA4/Con tracks.
camera P1
 1  0  0  0
 0  1  0  0
 0  0  1  1
camera P2
-1 -1 -1  0
 1  0 -1  1
 0  0  1  1
camera P3
 0 -1  0  0
 0  0 -1  1
-1 -1  0  1
camera P4
 0 -1 -1  0
 0  1 -1  1
 1  0  1  1

track SA2
P1 0 0
P2 0 0
track SA3
P1 0 0
P2 0 0
P3 0 0
track SA4
P1 0 0
P2 0 0
P3 0 0
P4 0 0
track Con
P1 0.9 -0.9
P2 0.6 2
P3 2 1.3
)";
}

}  // namespace l2tri

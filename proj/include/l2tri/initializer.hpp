#pragma once

#include <span>
#include <vector>

#include "l2tri/core.hpp"

namespace l2tri {

class SingularCamera : public Error {
 public:
  using Error::Error;
};

/// All rays are (numerically) parallel; the symmedian system is ill-posed.
class ParallelRays : public Error {
 public:
  using Error::Error;
};

/// Back-projected viewing ray: camera center and unit direction, oriented so
/// that the observed point has positive projective depth along the ray.
struct Ray {
  Vec3 anchor = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

/// Condition-number bound on sum(P_i) beyond which rays count as parallel.
inline constexpr double kParallelRayCondition = 1e12;

/// S = -M^{-1} p4, W = normalize(M^{-1} (u, v, 1)). Throws SingularCamera when
/// |det M| <= 1e-14 ||M||_F^3.
Ray factor_camera(const CameraMatrix& camera, const ImageObservation& obs);

/// I - W W^T.
Mat3 ray_projection(const Ray& ray);

/// Point minimizing the summed squared distances to the rays, from
/// (sum P_i) X = sum P_i S_i. Throws ParallelRays.
ScenePoint symmedian_point(std::span<const Ray> rays);

struct Initialization {
  ScenePoint point = ScenePoint::Zero();
  /// True when the rays were parallel and the closest-anchor midpoint was used.
  bool fallback = false;
};

/// Factors every view and returns the symmedian point, or the midpoint of the
/// two closest camera centers when the rays are parallel.
Initialization initialize(const TriangulationProblem& problem);

std::vector<Ray> back_project(const TriangulationProblem& problem);

}  // namespace l2tri

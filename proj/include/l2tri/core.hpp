#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace l2tri {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// A 3D scene point in world units. The homogeneous lift (x, y, z, 1) is
/// produced on demand by homogeneous().
using ScenePoint = Vec3;

inline Vec4 homogeneous(const ScenePoint& x) { return Vec4(x.x(), x.y(), x.z(), 1.0); }

/// Projective depths at or below this magnitude make a projection undefined.
inline constexpr double kDepthEpsilon = 1e-12;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The point lies on (or numerically at) a camera's principal plane.
class DepthNearZero : public Error {
 public:
  explicit DepthNearZero(std::size_t camera_index);
  std::size_t camera_index() const noexcept { return camera_index_; }

 private:
  std::size_t camera_index_;
};

/// Non-finite entries or a singular left 3x3 block.
class InvalidCamera : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit InvalidCamera(const std::string& what, std::size_t camera_index = npos)
      : Error(what), camera_index_(camera_index) {}
  /// Position of the camera in its file, or npos when unknown.
  std::size_t camera_index() const noexcept { return camera_index_; }

 private:
  std::size_t camera_index_;
};

class InvalidProblem : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// 3x4 pinhole projection matrix P = [M | p4] with an opaque label.
///
/// Construction rejects non-finite entries and an exactly singular M; the
/// initializer applies its own, scale-aware, conditioning test on M.
class CameraMatrix {
 public:
  explicit CameraMatrix(const Mat34& p, std::string label = {});

  const Mat34& matrix() const noexcept { return p_; }
  const std::string& label() const noexcept { return label_; }

  /// Zero-based entry access.
  double operator()(int row, int col) const { return p_(row, col); }

  Mat3 left_block() const { return p_.leftCols<3>(); }
  Vec3 last_column() const { return p_.col(3); }

  CameraMatrix scaled(double s) const;

 private:
  Mat34 p_;
  std::string label_;
};

struct ImageObservation {
  double u = 0.0;
  double v = 0.0;
};

/// n >= 2 cameras and the index-aligned observations of one scene point.
class TriangulationProblem {
 public:
  TriangulationProblem(std::vector<CameraMatrix> cameras, std::vector<ImageObservation> observations);

  std::size_t size() const noexcept { return cameras_.size(); }
  const CameraMatrix& camera(std::size_t i) const { return cameras_[i]; }
  const ImageObservation& observation(std::size_t i) const { return observations_[i]; }
  const std::vector<CameraMatrix>& cameras() const noexcept { return cameras_; }
  const std::vector<ImageObservation>& observations() const noexcept { return observations_; }

 private:
  std::vector<CameraMatrix> cameras_;
  std::vector<ImageObservation> observations_;
};

/// Residual vector (u and v rows of camera 1, then camera 2, ...), the
/// projective depth of every camera, and the sum of squared residuals.
struct ResidualEvaluation {
  VecX residuals;
  VecX depths;
  double cost = 0.0;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Throws DepthNearZero (index 0) if |depth| <= kDepthEpsilon.
Projection project(const CameraMatrix& camera, const ScenePoint& point);

/// Throws DepthNearZero(i) for the first camera with a degenerate depth.
/// Negative depths are accepted.
ResidualEvaluation evaluate_residual(const TriangulationProblem& problem, const ScenePoint& point);

/// Same as evaluate_residual but reports degenerate depths by returning false.
bool try_evaluate_residual(const TriangulationProblem& problem, const ScenePoint& point,
                           ResidualEvaluation& out);

/// Cost f(X), or +infinity where the residual is undefined.
double cost_or_infinity(const TriangulationProblem& problem, const ScenePoint& point);

}  // namespace l2tri

#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "pedrecon/error.hpp"

namespace pedrecon {

/// Similarity transform x -> scale * rotation * x + translation.
template <typename Scalar>
struct Similarity {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Scalar scale = Scalar(1);
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& points) const {
    return ((scale * rotation) * points).colwise() + translation;
  }
};

/// Closed-form least-squares similarity mapping the columns of `src` onto
/// the columns of `dst` (Umeyama's solution). Reflections are excluded by
/// flipping the sign of the weakest singular direction. When `fixed_scale`
/// is set only rotation and translation are estimated.
///
/// Throws ErrorKind::invalid_input for fewer than 3 columns and
/// ErrorKind::degenerate when the points are (numerically) collinear.
template <typename DerivedSrc, typename DerivedDst>
Similarity<typename DerivedSrc::Scalar> similarity_align(
    const Eigen::MatrixBase<DerivedSrc>& src, const Eigen::MatrixBase<DerivedDst>& dst,
    std::optional<typename DerivedSrc::Scalar> fixed_scale = std::nullopt) {
  using Scalar = typename DerivedSrc::Scalar;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  static_assert(DerivedSrc::RowsAtCompileTime == 3, "points are stored as 3xN columns");

  const Eigen::Index n = src.cols();
  require(dst.cols() == n, "procrustes: point sets differ in size");
  require(n >= 3, "procrustes: at least 3 correspondences are required");

  const Vector3 src_mean = src.rowwise().mean();
  const Vector3 dst_mean = dst.rowwise().mean();
  const auto src_centered = (src.colwise() - src_mean).eval();
  const auto dst_centered = (dst.colwise() - dst_mean).eval();

  const Matrix3 covariance = dst_centered * src_centered.transpose() / Scalar(n);
  Eigen::JacobiSVD<Matrix3> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3 sigma = svd.singularValues();
  // Rank 2 suffices (planar sets are fine); rank 1 means collinear.
  if (!(sigma(1) > Scalar(1e-12) * sigma(0)))
    fail(ErrorKind::degenerate, "procrustes: correspondences are collinear");

  Vector3 signs = Vector3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < Scalar(0)) signs(2) = Scalar(-1);

  Similarity<Scalar> out;
  out.rotation = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  if (fixed_scale) {
    require(*fixed_scale > Scalar(0), "procrustes: scale must be positive");
    out.scale = *fixed_scale;
  } else {
    const Scalar src_variance = src_centered.squaredNorm() / Scalar(n);
    out.scale = sigma.dot(signs) / src_variance;
  }
  out.translation = dst_mean - out.scale * out.rotation * src_mean;
  return out;
}

}  // namespace pedrecon

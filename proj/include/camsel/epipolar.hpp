#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "camsel/error.hpp"

namespace camsel {

/// A point seen in the first image (`a`) and its counterpart in the second (`b`).
template <typename Scalar>
struct Correspondence {
  Eigen::Matrix<Scalar, 2, 1> a;
  Eigen::Matrix<Scalar, 2, 1> b;
};

/// Rank-2, unit-Frobenius 3x3 matrix satisfying b^T F a = 0 for true
/// correspondences. The sign is fixed so that the entry of largest magnitude
/// is positive.
template <typename Scalar>
class FundamentalMatrix {
 public:
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

  FundamentalMatrix() = default;

  /// Projects an arbitrary 3x3 matrix onto the rank-2, unit-norm set.
  static FundamentalMatrix from_matrix(const Matrix3& raw) {
    Eigen::JacobiSVD<Matrix3> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix<Scalar, 3, 1> sv = svd.singularValues();
    sv(2) = Scalar(0);
    FundamentalMatrix f;
    f.m_ = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    f.normalize();
    return f;
  }

  const Matrix3& matrix() const { return m_; }

 private:
  void normalize() {
    const Scalar norm = m_.norm();
    if (norm > Scalar(0)) m_ /= norm;
    Eigen::Index r = 0, c = 0;
    m_.cwiseAbs().maxCoeff(&r, &c);
    if (m_(r, c) < Scalar(0)) m_ = -m_;
  }

  Matrix3 m_ = Matrix3::Zero();
};

using Fundamental = FundamentalMatrix<double>;

namespace detail {

/// Isotropic normalisation: centroid to origin, mean distance sqrt(2).
template <typename Scalar, typename Getter>
Eigen::Matrix<Scalar, 3, 3> normalising_transform(std::span<const Correspondence<Scalar>> pairs, Getter get) {
  Eigen::Matrix<Scalar, 2, 1> centroid = Eigen::Matrix<Scalar, 2, 1>::Zero();
  for (const auto& p : pairs) centroid += get(p);
  centroid /= Scalar(pairs.size());
  Scalar mean_dist(0);
  for (const auto& p : pairs) mean_dist += (get(p) - centroid).norm();
  mean_dist /= Scalar(pairs.size());
  if (!(mean_dist > std::numeric_limits<Scalar>::epsilon()))
    throw DegenerateConfiguration("all points coincide");
  const Scalar s = std::sqrt(Scalar(2)) / mean_dist;
  Eigen::Matrix<Scalar, 3, 3> t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

}  // namespace detail

/// Numerical rank below which the design matrix is rejected. Rank 6 is what
/// homography-related views (identity, planar motion) produce; those still
/// admit a consistent rank-2 solution.
inline constexpr int kMinDesignRank = 6;

/// Normalised eight-point estimate from >= 8 correspondences. Throws
/// DegenerateConfiguration when the design matrix has numerical rank below
/// kMinDesignRank.
template <typename Scalar>
FundamentalMatrix<Scalar> eight_point(std::span<const Correspondence<Scalar>> pairs) {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  if (pairs.size() < 8) throw DegenerateConfiguration("eight_point needs at least 8 correspondences");

  const Matrix3 ta = detail::normalising_transform<Scalar>(pairs, [](const auto& p) { return p.a; });
  const Matrix3 tb = detail::normalising_transform<Scalar>(pairs, [](const auto& p) { return p.b; });

  Eigen::Matrix<Scalar, Eigen::Dynamic, 9> design(static_cast<Eigen::Index>(pairs.size()), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vector3 a = ta * pairs[i].a.homogeneous();
    const Vector3 b = tb * pairs[i].b.homogeneous();
    design.row(static_cast<Eigen::Index>(i)) << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(),
        b.y() * a.y(), b.y(), a.x(), a.y(), Scalar(1);
  }

  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(design, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Scalar tol = std::sqrt(std::numeric_limits<Scalar>::epsilon()) * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > tol ? 1 : 0;
  if (rank < kMinDesignRank)
    throw DegenerateConfiguration("design matrix has rank " + std::to_string(rank));

  const Eigen::Matrix<Scalar, 9, 1> f = svd.matrixV().col(8);
  Matrix3 fn;
  fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

  // Rank-2 in normalised coordinates, then undo the normalisation.
  const FundamentalMatrix<Scalar> normalised = FundamentalMatrix<Scalar>::from_matrix(fn);
  return FundamentalMatrix<Scalar>::from_matrix(tb.transpose() * normalised.matrix() * ta);
}

template <typename Scalar>
FundamentalMatrix<Scalar> eight_point(const std::vector<Correspondence<Scalar>>& pairs) {
  return eight_point<Scalar>(std::span<const Correspondence<Scalar>>(pairs));
}

/// Symmetric epipolar distance: mean of the distance from b to the line F a
/// and from a to the line F^T b, in pixels. +inf when a line is degenerate.
template <typename Scalar>
Scalar epipolar_error(const FundamentalMatrix<Scalar>& f, const Correspondence<Scalar>& pair) {
  const Eigen::Matrix<Scalar, 3, 1> a = pair.a.homogeneous();
  const Eigen::Matrix<Scalar, 3, 1> b = pair.b.homogeneous();
  const Eigen::Matrix<Scalar, 3, 1> line_b = f.matrix() * a;
  const Eigen::Matrix<Scalar, 3, 1> line_a = f.matrix().transpose() * b;
  const Scalar nb = std::hypot(line_b.x(), line_b.y());
  const Scalar na = std::hypot(line_a.x(), line_a.y());
  if (nb == Scalar(0) || na == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar algebraic = std::abs(b.dot(line_b));
  return (algebraic / nb + algebraic / na) / Scalar(2);
}

}  // namespace camsel

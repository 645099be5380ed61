#ifndef MDOOD_LINALG_HPP
#define MDOOD_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "mdood/error.hpp"

/**
 * @file linalg.hpp
 *
 * @brief Gaussian statistics over the rows of a dense matrix: mean, sample
 * covariance, ridge-guarded Cholesky factorization and the squared
 * Mahalanobis distance evaluated by forward substitution.
 *
 * Everything is templated on the scalar type. Callers holding single
 * precision data are expected to `.cast<double>()` first; covariance
 * inversion in `float` is not reliable at the dimensions we care about.
 */

namespace mdood {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exact equality that tolerates operands of different shapes.
template <typename A, typename B>
bool same_values(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.derived().array() == b.derived().array()).all();
}

/// Default base of the ridge ladder, relative to the mean diagonal entry.
inline constexpr double kDefaultRidge0 = 1e-6;

/// Number of times the ridge is multiplied by ten before giving up.
inline constexpr int kRidgeEscalations = 8;

/**
 * @brief Lower Cholesky factor of `A + applied_ridge * I`.
 */
template <typename Scalar>
struct CholeskyFactor {
  Matrix<Scalar> chol_lower;
  Scalar applied_ridge = 0;
};

/**
 * @brief A multivariate Gaussian summarized by its mean and the lower
 * Cholesky factor of its (possibly scaled and regularized) covariance.
 */
template <typename Scalar>
struct GaussianFit {
  Vector<Scalar> mean;
  Matrix<Scalar> chol_lower;
  Scalar applied_ridge = 0;

  Eigen::Index dim() const { return mean.size(); }

  bool operator==(const GaussianFit& other) const {
    return same_values(mean, other.mean) && same_values(chol_lower, other.chol_lower) &&
           applied_ridge == other.applied_ridge;
  }
};

/**
 * @brief Column-wise arithmetic mean of the rows of `X`.
 */
template <typename Derived>
Vector<typename Derived::Scalar> sample_mean(const Eigen::MatrixBase<Derived>& X) {
  if (X.rows() < 1) {
    throw Error(ErrorCode::EmptyInput, "sample_mean needs at least one row");
  }
  return X.colwise().mean().transpose();
}

/**
 * @brief `scale / (n - 1)` times the scatter matrix of the rows of `X`
 * around `mean`.
 *
 * Only the lower triangle is accumulated and then mirrored, so the result is
 * symmetric bit for bit.
 */
template <typename Derived, typename MeanDerived>
Matrix<typename Derived::Scalar> sample_cov(const Eigen::MatrixBase<Derived>& X,
                                            const Eigen::MatrixBase<MeanDerived>& mean,
                                            typename Derived::Scalar scale = 1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "sample_cov needs at least two rows, got " + std::to_string(n));
  }
  if (mean.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "mean length does not match column count");
  }
  if (!(scale > 0)) {
    throw Error(ErrorCode::BadConfig, "covariance scale must be positive");
  }

  const Matrix<Scalar> centered = X.rowwise() - mean.derived().transpose();
  Matrix<Scalar> lower = Matrix<Scalar>::Zero(d, d);
  lower.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  Matrix<Scalar> cov = lower.template selfadjointView<Eigen::Lower>();
  cov *= scale / static_cast<Scalar>(n - 1);
  return cov;
}

namespace detail {

template <typename Scalar>
bool try_factor(const Matrix<Scalar>& A, Scalar ridge, Matrix<Scalar>& out) {
  Matrix<Scalar> shifted = A;
  shifted.diagonal().array() += ridge;
  Eigen::LLT<Matrix<Scalar>, Eigen::Lower> llt(shifted);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  out = llt.matrixL();

  // LLT only rejects non-positive pivots. Pivots this small relative to the
  // diagonal mean the matrix is singular to working precision.
  const Scalar max_diag = shifted.diagonal().cwiseAbs().maxCoeff();
  const Scalar floor = static_cast<Scalar>(A.rows()) * std::numeric_limits<Scalar>::epsilon() *
                       max_diag;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Scalar pivot = out(i, i);
    if (!std::isfinite(pivot) || !(pivot * pivot > floor)) {
      return false;
    }
  }
  return out.allFinite();
}

}  // namespace detail

/**
 * @brief Cholesky factorization of a symmetric matrix, adding the smallest
 * ridge from the ladder `{0, r, 10 r, 100 r, ...}` that makes it succeed.
 *
 * `r = ridge0 * trace(A) / d`. When the trace is zero (or negative) the base
 * falls back to `ridge0` itself so that the zero matrix still factors. After
 * `kRidgeEscalations` multiplications by ten the ladder is exhausted and
 * `NotFactorizable` is thrown.
 */
template <typename Derived>
CholeskyFactor<typename Derived::Scalar> cholesky_spd(const Eigen::MatrixBase<Derived>& A_in,
                                                      typename Derived::Scalar ridge0 = kDefaultRidge0) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> A = A_in;
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky_spd needs a non-empty square matrix");
  }
  if (!A.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "cholesky_spd input contains NaN or Inf");
  }
  const Scalar magnitude = A.cwiseAbs().maxCoeff();
  const Scalar asymmetry = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > Scalar(1e-9) * magnitude) {
    throw Error(ErrorCode::AsymmetricInput, "matrix is not symmetric within 1e-9 relative");
  }

  const Scalar d = static_cast<Scalar>(A.rows());
  Scalar base = ridge0 * A.trace() / d;
  if (!(base > 0) || !std::isfinite(base)) {
    base = ridge0;
  }

  CholeskyFactor<Scalar> result;
  if (detail::try_factor<Scalar>(A, Scalar(0), result.chol_lower)) {
    return result;
  }
  if (base > 0) {
    Scalar ridge = base;
    for (int step = 0; step < kRidgeEscalations; ++step, ridge *= Scalar(10)) {
      if (detail::try_factor<Scalar>(A, ridge, result.chol_lower)) {
        result.applied_ridge = ridge;
        return result;
      }
    }
  }
  throw Error(ErrorCode::NotFactorizable,
              "covariance could not be factored even with ridge " +
                  std::to_string(static_cast<double>(base) * 1e7));
}

/**
 * @brief Fits a Gaussian to the rows of `X`: mean, then the Cholesky factor of
 * `sample_cov(X, mean, scale)` through the ridge ladder.
 */
template <typename Derived>
GaussianFit<typename Derived::Scalar> fit_gaussian(const Eigen::MatrixBase<Derived>& X,
                                                   typename Derived::Scalar scale = 1,
                                                   typename Derived::Scalar ridge0 = kDefaultRidge0) {
  GaussianFit<typename Derived::Scalar> fit;
  fit.mean = sample_mean(X);
  auto factor = cholesky_spd(sample_cov(X, fit.mean, scale), ridge0);
  fit.chol_lower = std::move(factor.chol_lower);
  fit.applied_ridge = factor.applied_ridge;
  return fit;
}

/**
 * @brief Squared Mahalanobis distance `(x - mean)^T (L L^T)^{-1} (x - mean)`,
 * computed as `|z|^2` with `L z = x - mean`.
 */
template <typename Scalar, typename Derived>
Scalar maha_sq(const GaussianFit<Scalar>& fit, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != fit.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(x.size()) + " dims, fit has " +
                    std::to_string(fit.dim()));
  }
  Vector<Scalar> z = x.template cast<Scalar>() - fit.mean;
  fit.chol_lower.template triangularView<Eigen::Lower>().solveInPlace(z);
  return z.squaredNorm();
}

/// `maha_sq` of every row of `X`.
template <typename Scalar, typename Derived>
Vector<Scalar> maha_sq_rows(const GaussianFit<Scalar>& fit, const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != fit.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "row length does not match fit dimension");
  }
  Vector<Scalar> out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out(i) = maha_sq(fit, X.row(i).transpose());
  }
  return out;
}

}  // namespace mdood

#endif  // MDOOD_LINALG_HPP

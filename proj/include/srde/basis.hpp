#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace srde {

/// Dirichlet sine eigenbasis of the Laplacian on (0,1).
///
/// Eigenpairs are analytic: alpha_k = (k pi)^2, e_k(x) = sqrt(2) sin(k pi x),
/// orthonormal in L2(0,1). The spatial grid holds the M interior points
/// x_i = i/(M+1); composite-trapezoid quadrature with vanishing endpoint
/// values reduces to h * sum over interior nodes, which makes the discrete
/// modal transform exactly orthonormal for k <= M (discrete sine identity).
/// Construction demands M >= 2J so the top retained mode is well clear of
/// the aliasing limit.
///
/// to_modal/to_grid are the only transform entry points; they are direct
/// sine sums (a J x M matrix product), adequate at desk scale and swappable
/// for a fast transform behind the same signatures.
template <typename Scalar = double>
class SineBasis {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SineBasis(Eigen::Index mode_count, Eigen::Index grid_size)
      : modes_(mode_count), grid_points_(grid_size) {
    if (mode_count < 1) throw std::invalid_argument("SineBasis: mode_count must be >= 1");
    if (grid_size < 2 * mode_count)
      throw std::invalid_argument("SineBasis: grid_size must be >= 2*mode_count (aliasing)");
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    spacing_ = Scalar(1) / Scalar(grid_points_ + 1);
    x_ = Array::LinSpaced(grid_points_, spacing_, Scalar(grid_points_) * spacing_);
    alpha_ = Array::NullaryExpr(modes_, [pi](Eigen::Index k) {
      const Scalar kk = Scalar(k + 1) * pi;
      return kk * kk;
    });
    modes_on_grid_.resize(modes_, grid_points_);
    for (Eigen::Index k = 0; k < modes_; ++k)
      for (Eigen::Index i = 0; i < grid_points_; ++i)
        modes_on_grid_(k, i) = eigenfunction(k + 1, x_[i]);
  }

  Eigen::Index modes() const { return modes_; }
  Eigen::Index grid_size() const { return grid_points_; }
  Scalar spacing() const { return spacing_; }
  const Array& grid() const { return x_; }
  const Array& eigenvalues() const { return alpha_; }
  Scalar eigenvalue(Eigen::Index k) const { return alpha_[k - 1]; }

  /// e_k(x) = sqrt(2) sin(k pi x), k is 1-based; exactly zero at both endpoints.
  Scalar eigenfunction(Eigen::Index k, Scalar x) const {
    if (x == Scalar(0) || x == Scalar(1)) return Scalar(0);
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    return std::numbers::sqrt2_v<Scalar> * std::sin(Scalar(k) * pi * x);
  }

  /// sup-norm of e_k over (0,1); sqrt(2) for every mode of the sine basis.
  Scalar eigenfunction_sup(Eigen::Index) const { return std::numbers::sqrt2_v<Scalar>; }

  /// <v, e_k> by trapezoid quadrature on the grid (exact for band-limited v).
  Array to_modal(const Eigen::Ref<const Array>& grid_values) const {
    check_grid(grid_values.size());
    return (spacing_ * (modes_on_grid_ * grid_values.matrix())).array();
  }

  Array to_grid(const Eigen::Ref<const Array>& modal) const {
    check_modal(modal.size());
    return (modes_on_grid_.transpose() * modal.matrix()).array();
  }

  /// exp(-alpha_k t) for every retained mode
  Array semigroup_factors(Scalar t) const {
    if (t < Scalar(0)) throw std::domain_error("SineBasis: semigroup needs t >= 0");
    return (-alpha_ * t).exp();
  }

  /// Heat semigroup on grid data: decay each modal coefficient by exp(-alpha_k t).
  /// At t = 0 this is the band-limited projection.
  Array apply_semigroup(const Eigen::Ref<const Array>& grid_values, Scalar t) const {
    return to_grid(semigroup_factors(t) * to_modal(grid_values));
  }

  /// Truncated heat kernel sum_{k<=J} exp(-alpha_k t) e_k(x) e_k(y); t must be
  /// positive, the series has no truncation-stable meaning at t = 0.
  Scalar kernel(Scalar t, Scalar x, Scalar y) const {
    if (!(t > Scalar(0))) throw std::domain_error("SineBasis: kernel needs t > 0");
    Scalar acc = 0;
    for (Eigen::Index k = 1; k <= modes_; ++k)
      acc += std::exp(-eigenvalue(k) * t) * eigenfunction(k, x) * eigenfunction(k, y);
    return acc;
  }

 private:
  void check_grid(Eigen::Index n) const {
    if (n != grid_points_) throw std::invalid_argument("SineBasis: grid-size mismatch");
  }
  void check_modal(Eigen::Index n) const {
    if (n != modes_) throw std::invalid_argument("SineBasis: mode-count mismatch");
  }

  Eigen::Index modes_;
  Eigen::Index grid_points_;
  Scalar spacing_;
  Array x_;
  Array alpha_;
  Matrix modes_on_grid_;  // J x M, e_k(x_i)
};

/// Expression-friendly wrappers: accept any Eigen array expression.
template <typename Scalar, typename Derived>
typename SineBasis<Scalar>::Array apply_semigroup(const SineBasis<Scalar>& basis,
                                                  const Eigen::ArrayBase<Derived>& v, Scalar t) {
  typename SineBasis<Scalar>::Array tmp = v;
  return basis.apply_semigroup(tmp, t);
}

template <typename Scalar, typename Derived>
typename SineBasis<Scalar>::Array to_modal(const SineBasis<Scalar>& basis,
                                           const Eigen::ArrayBase<Derived>& v) {
  typename SineBasis<Scalar>::Array tmp = v;
  return basis.to_modal(tmp);
}

using SineBasisd = SineBasis<double>;

}  // namespace srde

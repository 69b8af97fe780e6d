#pragma once

#include <Eigen/Core>

#include "srde/basis.hpp"

namespace srde {

/// A noise path frozen on a uniform time grid for convolution cross-checks:
/// scalar noise-amplitude evaluations sigma_j at the left endpoints and the
/// lambda-scaled modal Brownian increments actually consumed (column j holds
/// lambda_k dB_k over step j). Times are s_j = j * dt, j = 0..steps-1.
struct FrozenPath {
  double dt = 0.0;
  Eigen::ArrayXd sigma;   // length S
  Eigen::MatrixXd modal_increments;  // J x S

  Eigen::Index steps() const { return sigma.size(); }
  bool empty() const { return sigma.size() == 0; }
};

/// Merge adjacent step pairs: increments add, sigma keeps the left value.
/// The coarse path discretizes the same underlying noise at 2x the step.
FrozenPath coarsen(const FrozenPath& fine);

/// Left-point discrete stochastic convolution, modal and exact per step:
///   Z_k(t_{m}) = sum_{j<m} exp(-alpha_k (t_m - s_j)) sigma_j [lambda dB]_{k,j}
/// Column m holds Z(t_m) for m = 0..S (so S+1 columns, Z(0) = 0).
Eigen::MatrixXd convolution_direct(const SineBasis<double>& basis, const FrozenPath& path);

/// The same object through the factorization route: the fractional-integral
/// process Z_alpha(s) = sum_{j<l} (s_l-s_j)^(-alpha) exp(-alpha_k (s_l-s_j)) sigma_j [lambda dB]_{k,j}
/// reconstructed by sin(pi alpha)/pi * int_0^t (t-s)^(alpha-1) S(t-s) Z_alpha(s) ds,
/// the singular time integral evaluated by product integration (the weight
/// (t-s)^(alpha-1) integrated exactly against a piecewise-linear integrand).
/// Requires alpha in (0, (1-eta)/2); pass the spectrum's eta.
Eigen::MatrixXd convolution_factorized(const SineBasis<double>& basis, const FrozenPath& path,
                                       double alpha, double eta);

/// max over times of the grid sup-norm of the difference between two modal
/// time series (columns are compared through to_grid).
double sup_discrepancy(const SineBasis<double>& basis, const Eigen::MatrixXd& a,
                       const Eigen::MatrixXd& b);

}  // namespace srde

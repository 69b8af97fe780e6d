#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

#include "srde/basis.hpp"

namespace srde {

/// Solution snapshot at one time: band-limited grid values, their sine
/// coefficients, and the distance gap = 1 - sup|u| to the forbidden boundary.
/// Grid values and coefficients are kept consistent by constructing every
/// state through make_state / from_modal.
struct FieldState {
  double time = 0.0;
  Eigen::ArrayXd values;  // on the interior grid
  Eigen::ArrayXd modal;   // sine coefficients, length J
  double sup = 0.0;       // max_i |values_i|
  double gap = 1.0;       // 1 - sup

  static FieldState from_modal(const SineBasis<double>& basis, const Eigen::ArrayXd& modal,
                               double t) {
    FieldState s;
    s.time = t;
    s.modal = modal;
    s.values = basis.to_grid(modal);
    s.sup = s.values.abs().maxCoeff();
    s.gap = 1.0 - s.sup;
    return s;
  }
};

/// Band-limit arbitrary grid data (project onto the retained modes).
inline FieldState make_state(const SineBasis<double>& basis, const Eigen::ArrayXd& grid_values,
                             double t = 0.0) {
  return FieldState::from_modal(basis, basis.to_modal(grid_values), t);
}

/// First eigenfunction profile rescaled so the grid sup-norm equals amplitude
/// exactly (the analytic peak at x = 1/2 need not be a grid point).
inline FieldState profile_eigenmode(const SineBasis<double>& basis, double amplitude) {
  if (!(std::abs(amplitude) < 1.0))
    throw std::invalid_argument("profile_eigenmode: |amplitude| must be < 1");
  Eigen::ArrayXd modal = Eigen::ArrayXd::Zero(basis.modes());
  modal[0] = 1.0;
  FieldState s = FieldState::from_modal(basis, modal, 0.0);
  if (amplitude != 0.0) {
    const double scale = amplitude / s.values.abs().maxCoeff();
    s.modal *= scale;
    s.values *= scale;
    s.sup = std::abs(amplitude);
    s.gap = 1.0 - s.sup;
  } else {
    s.modal.setZero();
    s.values.setZero();
    s.sup = 0.0;
    s.gap = 1.0;
  }
  return s;
}

/// Trapezoidal plateau: flat at the centre over the given width, linear ramps
/// to the boundary, band-limited and rescaled to the exact grid sup-norm.
inline FieldState profile_plateau(const SineBasis<double>& basis, double amplitude,
                                  double width = 0.5) {
  if (!(std::abs(amplitude) < 1.0))
    throw std::invalid_argument("profile_plateau: |amplitude| must be < 1");
  if (!(width > 0.0 && width < 1.0))
    throw std::invalid_argument("profile_plateau: width must be in (0,1)");
  const double lo = 0.5 - width / 2.0, hi = 0.5 + width / 2.0;
  Eigen::ArrayXd raw(basis.grid_size());
  for (Eigen::Index i = 0; i < basis.grid_size(); ++i) {
    const double x = basis.grid()[i];
    double v;
    if (x < lo)
      v = x / lo;
    else if (x > hi)
      v = (1.0 - x) / (1.0 - hi);
    else
      v = 1.0;
    raw[i] = v;
  }
  FieldState s = make_state(basis, raw);
  if (amplitude == 0.0) {
    s.modal.setZero();
    s.values.setZero();
    s.sup = 0.0;
    s.gap = 1.0;
    return s;
  }
  const double scale = amplitude / s.values.abs().maxCoeff();
  s.modal *= scale;
  s.values *= scale;
  s.sup = std::abs(amplitude);
  s.gap = 1.0 - s.sup;
  return s;
}

}  // namespace srde

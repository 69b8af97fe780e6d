#include "srde/convolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace srde {

FrozenPath coarsen(const FrozenPath& fine) {
  if (fine.steps() % 2 != 0)
    throw std::invalid_argument("coarsen: step count must be even");
  FrozenPath out;
  out.dt = 2.0 * fine.dt;
  const Eigen::Index S = fine.steps() / 2;
  out.sigma.resize(S);
  out.modal_increments.resize(fine.modal_increments.rows(), S);
  for (Eigen::Index j = 0; j < S; ++j) {
    out.sigma[j] = fine.sigma[2 * j];
    out.modal_increments.col(j) =
        fine.modal_increments.col(2 * j) + fine.modal_increments.col(2 * j + 1);
  }
  return out;
}

Eigen::MatrixXd convolution_direct(const SineBasis<double>& basis, const FrozenPath& path) {
  if (path.modal_increments.rows() != basis.modes())
    throw std::invalid_argument("convolution_direct: path does not match basis");
  const Eigen::Index J = basis.modes();
  const Eigen::Index S = path.steps();
  Eigen::MatrixXd z(J, S + 1);
  z.col(0).setZero();
  // exact one-step recursion on the uniform grid:
  // Z(t_{m+1}) = e^{-alpha dt} (Z(t_m) + sigma_m dW_m)
  const Eigen::ArrayXd decay = basis.semigroup_factors(path.dt);
  for (Eigen::Index m = 0; m < S; ++m)
    z.col(m + 1) = (decay *
                    (z.col(m).array() + path.sigma[m] * path.modal_increments.col(m).array()))
                       .matrix();
  return z;
}

Eigen::MatrixXd convolution_factorized(const SineBasis<double>& basis, const FrozenPath& path,
                                       double alpha, double eta) {
  if (path.modal_increments.rows() != basis.modes())
    throw std::invalid_argument("convolution_factorized: path does not match basis");
  if (!(alpha > 0.0 && alpha < (1.0 - eta) / 2.0))
    throw std::invalid_argument("convolution_factorized: alpha must lie in (0, (1-eta)/2)");
  const Eigen::Index J = basis.modes();
  const Eigen::Index S = path.steps();
  const double dt = path.dt;

  // Z_alpha(s_l), left-point Ito sums with the (s_l - s_j)^(-alpha) kernel.
  // za.col(l) accumulates recursively: each older increment gains one more
  // decay factor per step, the kernel power is recomputed by distance.
  Eigen::MatrixXd za(J, S + 1);
  za.col(0).setZero();
  const Eigen::ArrayXd decay = basis.semigroup_factors(dt);
  Eigen::ArrayXd pow_neg(S + 1);   // d^(-alpha)
  Eigen::ArrayXd pow_pos(S + 1);   // d^alpha
  Eigen::ArrayXd pow_pos1(S + 1);  // d^(alpha+1)
  pow_neg[0] = 0.0;
  pow_pos[0] = 0.0;
  pow_pos1[0] = 0.0;
  for (Eigen::Index d = 1; d <= S; ++d) {
    pow_neg[d] = std::pow(double(d), -alpha);
    pow_pos[d] = std::pow(double(d), alpha);
    pow_pos1[d] = std::pow(double(d), alpha + 1.0);
  }
  const double dt_neg = std::pow(dt, -alpha);
  for (Eigen::Index l = 1; l <= S; ++l) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(J);
    Eigen::ArrayXd dk = Eigen::ArrayXd::Ones(J);
    for (Eigen::Index j = l - 1; j >= 0; --j) {
      dk *= decay;  // exp(-alpha_k (s_l - s_j)), distance l - j
      acc += dk * (dt_neg * pow_neg[l - j]) * path.sigma[j] *
             path.modal_increments.col(j).array();
    }
    za.col(l) = acc.matrix();
  }

  // Reconstruction: c_alpha * int_0^{t_m} (t_m - s)^(alpha-1) S(t_m - s) Z_alpha(s) ds
  // by product integration: on each cell the smooth factor S(t_m-s) Z_alpha(s)
  // is linearized between its endpoint values and the singular weight is
  // integrated exactly. With x = distance to t_m in steps:
  //   I0(d) = int_{(d-1)dt}^{d dt} x^(a-1) dx = dt^a (d^a - (d-1)^a)/a
  //   I1(d) = int x^a dx            = dt^(a+1) (d^(a+1) - (d-1)^(a+1))/(a+1)
  const double c_alpha = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  const double dt_pos = std::pow(dt, alpha);
  Eigen::MatrixXd z(J, S + 1);
  z.col(0).setZero();
  for (Eigen::Index m = 1; m <= S; ++m) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(J);
    Eigen::ArrayXd dk_l = Eigen::ArrayXd::Ones(J);       // decay at distance m - l
    for (Eigen::Index l = m - 1; l >= 0; --l) {
      const Eigen::Index d = m - l;                      // cell (s_l, s_{l+1}), distances (d-1, d)
      const double i0 = dt_pos * (pow_pos[d] - pow_pos[d - 1]) / alpha;
      const double i1 = dt_pos * dt * (pow_pos1[d] - pow_pos1[d - 1]) / (alpha + 1.0);
      // g(s) = S(t_m - s) Z_alpha(s); endpoints g_l (distance d) and g_{l+1} (distance d-1)
      const double w_right = (double(d) * dt * i0 - i1) / dt;  // weight on g_{l+1}
      const double w_left = i0 - w_right;
      acc += w_right * dk_l * za.col(l + 1).array();  // dk_l = decay^(d-1) here
      dk_l *= decay;
      acc += w_left * dk_l * za.col(l).array();
    }
    z.col(m) = (c_alpha * acc).matrix();
  }
  return z;
}

double sup_discrepancy(const SineBasis<double>& basis, const Eigen::MatrixXd& a,
                       const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("sup_discrepancy: shape mismatch");
  double worst = 0.0;
  for (Eigen::Index m = 0; m < a.cols(); ++m) {
    const Eigen::ArrayXd diff = basis.to_grid((a.col(m) - b.col(m)).array());
    worst = std::max(worst, diff.abs().maxCoeff());
  }
  return worst;
}

}  // namespace srde

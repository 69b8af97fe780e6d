#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "srde/basis.hpp"
#include "srde/rng.hpp"

namespace srde {

/// Roughness exponent eta = theta (rho - 2) / rho, with the limit convention
/// eta = theta at rho = infinity. Configurations with eta >= 1 are rejected:
/// the operator smoothing is then too weak for function-valued solutions.
inline double compute_eta(double theta, double rho) {
  if (!(theta > 0)) throw std::invalid_argument("compute_eta: theta must be > 0");
  if (!(rho >= 2)) throw std::invalid_argument("compute_eta: rho must be >= 2");
  const double eta = std::isinf(rho) ? theta : theta * (rho - 2.0) / rho;
  if (eta >= 1.0)
    throw std::invalid_argument("compute_eta: eta = " + std::to_string(eta) +
                                " >= 1, solutions would not be function-valued");
  return eta;
}

/// Gaussian noise diagonal in the eigenbasis: W(t,x) = sum_j lambda_j e_j(x) B_j(t).
/// lambda_j >= 0 together with exponents (theta, rho) describing the balance of
/// noise roughness against operator smoothing. rho = infinity is stored as the
/// IEEE infinity, not as a large finite float.
class NoiseSpectrum {
 public:
  enum class Preset { trace_class, white, custom, off };

  static constexpr double rho_infinity = std::numeric_limits<double>::infinity();

  static NoiseSpectrum trace_class(Eigen::Index modes) {
    Eigen::ArrayXd lam =
        Eigen::ArrayXd::NullaryExpr(modes, [](Eigen::Index j) { return 1.0 / double(j + 1); });
    return NoiseSpectrum(std::move(lam), 1.0, 2.0, Preset::trace_class);
  }

  /// space-time white noise surrogate: flat lambda, rho = inf, theta just above 1/2
  static NoiseSpectrum white(Eigen::Index modes, double theta = 0.51) {
    return NoiseSpectrum(Eigen::ArrayXd::Ones(modes), theta, rho_infinity, Preset::white);
  }

  /// noise disabled; increments are exactly zero
  static NoiseSpectrum off(Eigen::Index modes) {
    return NoiseSpectrum(Eigen::ArrayXd::Zero(modes), 1.0, 2.0, Preset::off);
  }

  static NoiseSpectrum custom(Eigen::ArrayXd lambda, double theta, double rho) {
    return NoiseSpectrum(std::move(lambda), theta, rho, Preset::custom);
  }

  Eigen::Index modes() const { return lambda_.size(); }
  const Eigen::ArrayXd& lambda() const { return lambda_; }
  double theta() const { return theta_; }
  double rho() const { return rho_; }
  double eta() const { return eta_; }
  Preset preset() const { return preset_; }
  bool zero() const { return preset_ == Preset::off || (lambda_ == 0.0).all(); }

  static const char* preset_name(Preset p) {
    switch (p) {
      case Preset::trace_class: return "trace";
      case Preset::white: return "white";
      case Preset::custom: return "custom";
      case Preset::off: return "off";
    }
    return "?";
  }

 private:
  NoiseSpectrum(Eigen::ArrayXd lambda, double theta, double rho, Preset preset)
      : lambda_(std::move(lambda)), theta_(theta), rho_(rho), preset_(preset) {
    if (lambda_.size() < 1) throw std::invalid_argument("NoiseSpectrum: needs >= 1 mode");
    if ((lambda_ < 0.0).any()) throw std::invalid_argument("NoiseSpectrum: lambda_j must be >= 0");
    eta_ = compute_eta(theta_, rho_);
  }

  Eigen::ArrayXd lambda_;
  double theta_;
  double rho_;
  double eta_;
  Preset preset_;
};

/// Truncated summability diagnostics for a spectrum against a basis.
///
/// lambda_sum is (sum_j lambda_j^rho |e_j|_inf^2)^(2/rho), or sup_j lambda_j at
/// rho = inf; theta_sum is sum_k alpha_k^(-theta) |e_k|_inf^2. Convergence is
/// judged by the ratio of the last two dyadic tail blocks (Cauchy condensation:
/// power-law terms k^-p give block ratio 2^(1-p)): ratio >= 1 is divergent,
/// [0.95, 1) is flagged slow/indeterminate at this truncation.
struct SpectrumDiagnostics {
  double lambda_sum = 0;
  double theta_sum = 0;
  double lambda_block_ratio = 0;
  double theta_block_ratio = 0;
  bool lambda_diverging = false;
  bool theta_diverging = false;
  bool lambda_slow = false;
  bool theta_slow = false;

  bool ok() const { return !(lambda_diverging || theta_diverging); }
  bool clean() const { return ok() && !(lambda_slow || theta_slow); }
};

namespace detail {
inline void classify_blocks(double head, double mid, double full, bool& diverging, bool& slow,
                            double& ratio) {
  const double b1 = mid - head;
  const double b2 = full - mid;
  if (b1 <= 0.0) {  // no tail mass left at this truncation
    ratio = 0.0;
    return;
  }
  ratio = b2 / b1;
  diverging = ratio >= 1.0;
  slow = !diverging && ratio >= 0.95;
}
}  // namespace detail

template <typename Scalar>
SpectrumDiagnostics validate_spectrum(const SineBasis<Scalar>& basis, const NoiseSpectrum& spec) {
  if (basis.modes() != spec.modes())
    throw std::invalid_argument("validate_spectrum: basis and spectrum disagree on mode count");
  const Eigen::Index J = basis.modes();
  const Eigen::Index q2 = J / 2, q4 = J / 4;

  SpectrumDiagnostics d;
  const double rho = spec.rho();
  double lam_head = 0, lam_mid = 0, lam_full = 0;
  double th_head = 0, th_mid = 0, th_full = 0;
  for (Eigen::Index j = 1; j <= J; ++j) {
    const double sup2 = double(basis.eigenfunction_sup(j)) * double(basis.eigenfunction_sup(j));
    const double lam = spec.lambda()[j - 1];
    const double lam_term =
        std::isinf(rho) ? lam : std::pow(lam, rho) * sup2;  // sup at rho=inf handled below
    const double th_term = std::pow(double(basis.eigenvalue(j)), -spec.theta()) * sup2;
    if (std::isinf(rho)) {
      lam_full = std::max(lam_full, lam_term);
      if (j <= q2) lam_mid = std::max(lam_mid, lam_term);
      if (j <= q4) lam_head = std::max(lam_head, lam_term);
    } else {
      lam_full += lam_term;
      if (j <= q2) lam_mid += lam_term;
      if (j <= q4) lam_head += lam_term;
    }
    th_full += th_term;
    if (j <= q2) th_mid += th_term;
    if (j <= q4) th_head += th_term;
  }
  d.lambda_sum = std::isinf(rho) ? lam_full : std::pow(lam_full, 2.0 / rho);
  d.theta_sum = th_full;
  detail::classify_blocks(lam_head, lam_mid, lam_full, d.lambda_diverging, d.lambda_slow,
                          d.lambda_block_ratio);
  detail::classify_blocks(th_head, th_mid, th_full, d.theta_diverging, d.theta_slow,
                          d.theta_block_ratio);
  return d;
}

/// Per-trajectory noise stream. Each call hands out the modal Gaussian
/// increments for one time step, standard deviation lambda_j sqrt(dt), and
/// advances the step counter. Values are a pure function of
/// (key, step index, mode), so identical keys replay identical paths.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t step_index() const { return step_; }

  friend Eigen::ArrayXd sample_increment(const NoiseSpectrum& spec, double dt,
                                         NoiseStream& stream) {
    if (!(dt > 0)) throw std::invalid_argument("sample_increment: dt must be > 0");
    const std::uint64_t s = stream.step_++;
    if (spec.zero()) return Eigen::ArrayXd::Zero(spec.modes());
    const double root_dt = std::sqrt(dt);
    return Eigen::ArrayXd::NullaryExpr(spec.modes(), [&](Eigen::Index j) {
      return spec.lambda()[j] * root_dt * rng::normal(stream.key_, s, std::uint64_t(j));
    });
  }

 private:
  std::uint64_t key_;
  std::uint64_t step_ = 0;
};

}  // namespace srde

#pragma once

#include <cmath>
#include <stdexcept>

namespace srde {

/// Singular constraining forcing on the state interval (-1,1).
///
/// Outside the core |w| > c0 the canonical saturating forms apply:
///   drift(w) = -sign(w) * K * (1-|w|)^(-beta)
///   sigma(w) =            C * (1-|w|)^(-gamma)
/// Inside |w| <= c0 the drift is the odd cubic matching value and slope of the
/// canonical branch at +-c0 with drift(0) = 0, and sigma is constant-extended
/// by its value at c0. Both stay locally Lipschitz on (-1,1).
///
/// drift_cutoff/sigma_cutoff are the globally Lipschitz level-n truncations:
/// the argument is clamped to |w| <= 1 - 3^(-n) before evaluation, so they are
/// defined for every real w and agree with the raw forms on the clamp band.
template <typename Scalar = double>
class Forcing {
 public:
  Forcing(Scalar beta, Scalar gamma, Scalar c0 = Scalar(0.5), Scalar sigma_scale = Scalar(1),
          Scalar drift_scale = Scalar(1))
      : beta_(beta), gamma_(gamma), c0_(c0), C_(sigma_scale), K_(drift_scale) {
    if (!(beta_ > 0)) throw std::invalid_argument("Forcing: beta must be > 0");
    if (!(gamma_ >= 0)) throw std::invalid_argument("Forcing: gamma must be >= 0");
    if (!(c0_ > 0 && c0_ < 1)) throw std::invalid_argument("Forcing: c0 must be in (0,1)");
    // zero scales are the degenerate disabled branches; the growth bounds
    // then hold with the same constants
    if (!(C_ >= 0)) throw std::invalid_argument("Forcing: sigma_scale must be >= 0");
    if (!(K_ >= 0)) throw std::invalid_argument("Forcing: drift_scale must be >= 0");
    const Scalar u = Scalar(1) - c0_;
    const Scalar value = -K_ * std::pow(u, -beta_);           // canonical drift at +c0
    const Scalar slope = -K_ * beta_ * std::pow(u, -beta_ - 1);
    core_c3_ = (slope * c0_ - value) / (2 * c0_ * c0_ * c0_);
    core_c1_ = slope - 3 * core_c3_ * c0_ * c0_;
    core_sigma_ = C_ * std::pow(u, -gamma_);
  }

  Scalar beta() const { return beta_; }
  Scalar gamma() const { return gamma_; }
  Scalar c0() const { return c0_; }
  Scalar sigma_scale() const { return C_; }
  Scalar drift_scale() const { return K_; }

  Scalar drift(Scalar w) const {
    check_domain(w);
    return drift_unchecked(w);
  }

  Scalar sigma(Scalar w) const {
    check_domain(w);
    return sigma_unchecked(w);
  }

  /// 1 - 3^(-n), the saturation bound of the level-n cutoff
  static Scalar cutoff_bound(int level) {
    if (level < 1) throw std::invalid_argument("Forcing: cutoff level must be >= 1");
    return Scalar(1) - std::pow(Scalar(3), Scalar(-level));
  }

  Scalar drift_cutoff(Scalar w, int level) const { return drift_unchecked(clamp_to(w, level)); }
  Scalar sigma_cutoff(Scalar w, int level) const { return sigma_unchecked(clamp_to(w, level)); }

 private:
  static void check_domain(Scalar w) {
    if (!(std::abs(w) < Scalar(1)))
      throw std::domain_error("Forcing: forcing undefined for |w| >= 1");
  }

  static Scalar clamp_to(Scalar w, int level) {
    const Scalar b = cutoff_bound(level);
    return w < -b ? -b : (w > b ? b : w);
  }

  Scalar drift_unchecked(Scalar w) const {
    const Scalar a = std::abs(w);
    if (a <= c0_) return core_c1_ * w + core_c3_ * w * w * w;
    const Scalar mag = K_ * std::pow(Scalar(1) - a, -beta_);
    return w > 0 ? -mag : mag;
  }

  Scalar sigma_unchecked(Scalar w) const {
    const Scalar a = std::abs(w);
    if (a <= c0_) return core_sigma_;
    return C_ * std::pow(Scalar(1) - a, -gamma_);
  }

  Scalar beta_, gamma_, c0_, C_, K_;
  Scalar core_c1_, core_c3_, core_sigma_;
};

/// Level-n truncation bundled as a plain callable pair defined on all of R.
template <typename Scalar = double>
struct CutoffForcing {
  Forcing<Scalar> base;
  int level;

  Scalar drift(Scalar w) const { return base.drift_cutoff(w, level); }
  Scalar sigma(Scalar w) const { return base.sigma_cutoff(w, level); }
};

template <typename Scalar>
CutoffForcing<Scalar> cutoff(const Forcing<Scalar>& f, int level) {
  if (level < 1) throw std::invalid_argument("cutoff: level must be >= 1");
  return CutoffForcing<Scalar>{f, level};
}

/// The global-existence test gamma + 1 < (1-eta)(beta+1)/2, with its margin.
/// margin > 0 means satisfied (strict inequality); margin is affine in gamma
/// (slope -1) and in beta (slope (1-eta)/2).
struct ConditionReport {
  bool satisfied;
  double margin;
};

inline ConditionReport check_condition(double beta, double gamma, double eta) {
  if (!(beta > 0)) throw std::invalid_argument("check_condition: beta must be > 0");
  if (!(gamma >= 0)) throw std::invalid_argument("check_condition: gamma must be >= 0");
  if (!(eta >= 0 && eta < 1)) throw std::invalid_argument("check_condition: eta must be in [0,1)");
  const double margin = (1.0 - eta) * (beta + 1.0) / 2.0 - (gamma + 1.0);
  return ConditionReport{margin > 0.0, margin};
}

using Forcingd = Forcing<double>;

}  // namespace srde

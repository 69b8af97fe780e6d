#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace srde {

struct TrajectoryRecord;  // solver.hpp

/// Deterministic lower envelope for the boundary gap while the noise term is
/// small (sup|Z| <= gap/3) and the state is deep (gap <= 3^-N):
///
///   envelope(t) = (3/4) (e0^(b+1) + K (2/5)^b (1+b) t)^(1/(b+1))
///
/// N is the minimal integer with 2 * 3^-N < 1 - c0. The t -> infinity shape is
/// tail_coefficient() * t^(1/(b+1)), a strict lower bound once the e0 term is
/// dropped.
template <typename Scalar = double>
struct GapEnvelope {
  Scalar initial_gap;
  Scalar beta;
  Scalar drift_scale;
  int level;  // N

  GapEnvelope(Scalar e0, Scalar beta_, Scalar drift_scale_, Scalar c0)
      : initial_gap(e0), beta(beta_), drift_scale(drift_scale_), level(minimal_level(c0)) {
    if (!(e0 > 0)) throw std::invalid_argument("GapEnvelope: initial gap must be > 0");
    if (!(beta > 0)) throw std::invalid_argument("GapEnvelope: beta must be > 0");
    if (!(drift_scale > 0)) throw std::invalid_argument("GapEnvelope: drift scale must be > 0");
  }

  static int minimal_level(Scalar c0) {
    if (!(c0 > 0 && c0 < 1)) throw std::invalid_argument("GapEnvelope: c0 must be in (0,1)");
    Scalar p = Scalar(1) / Scalar(3);
    for (int n = 1; n <= 64; ++n, p /= Scalar(3))
      if (2 * p < Scalar(1) - c0) return n;
    throw std::runtime_error("GapEnvelope: no admissible level below 3^-64");
  }

  Scalar growth_rate() const {
    return drift_scale * std::pow(Scalar(2) / Scalar(5), beta) * (Scalar(1) + beta);
  }

  Scalar operator()(Scalar t) const {
    if (!(t >= 0)) throw std::domain_error("GapEnvelope: t must be >= 0");
    return Scalar(0.75) *
           std::pow(std::pow(initial_gap, beta + 1) + growth_rate() * t, Scalar(1) / (beta + 1));
  }

  /// K_beta with the e0 term dropped: envelope(t) > tail_coefficient * t^(1/(b+1))
  Scalar tail_coefficient() const {
    return Scalar(0.75) * std::pow(growth_rate(), Scalar(1) / (beta + 1));
  }
};

using GapEnveloped = GapEnvelope<double>;

/// One maximal stretch of samples on which both envelope hypotheses held.
struct AuditWindow {
  std::size_t first = 0;   // sample indices, inclusive
  std::size_t last = 0;
  double start_time = 0;
  double start_gap = 0;
  long violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
};

struct EnvelopeAudit {
  std::vector<AuditWindow> windows;
  int skipped_short = 0;  // qualifying stretches of fewer than 2 samples
  long violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();

  bool vacuous() const { return windows.empty(); }
  bool clean() const { return violations == 0; }
};

/// Scan a recorded trajectory for windows where sup|Z(t)| <= gap/3 and
/// gap <= 3^-N simultaneously; inside each window the envelope is re-based at
/// the window's first sample and every sample is checked against it.
/// margin = gap - envelope; a negative margin is a violation. Pure function of
/// the record. Declared here, defined in solver.cpp next to TrajectoryRecord.
EnvelopeAudit audit_envelope(const TrajectoryRecord& record, double beta, double drift_scale,
                             double c0);

}  // namespace srde

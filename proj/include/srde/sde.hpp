#pragma once

#include <cstdint>

namespace srde {

/// Scalar diffusion dX = X^(-beta) dt + X^(-gamma) dB on (eps_low, b_high),
/// the one-dimensional ground truth for the blow-up threshold: hitting the
/// lower barrier before the upper one plays the role of explosion.
struct SdeProblem {
  double beta = 1.0;
  double gamma = 0.0;
  double x0 = 0.5;
  double eps_low = 1e-2;
  double b_high = 1.0;

  void validate() const;
};

/// Exit probability from the scale function: the scale density is
/// s'(y) = exp(-2 int_{x0}^{y} z^(2 gamma - beta) dz) (inner integral in
/// closed form), the outer integrals are adaptive Simpson carried entirely in
/// log space so the barrier-side mass may reach exp(1e8) without overflow.
/// prob = (s(b) - s(x0)) / (s(b) - s(eps)); log_prob stays informative when
/// prob underflows to zero.
struct ScaleExitResult {
  double prob;
  double log_prob;
  long panels;  // adaptive subdivisions used
};

ScaleExitResult exit_prob_scale(const SdeProblem& problem, double log_tol = 1e-9);

struct McOptions {
  long max_steps_per_trial = 10'000'000;
  int threads = 1;
  double noise_scale = 1.0;  // 0 disables the diffusion term
};

/// Euler-Maruyama with absorption at both barriers. dt must satisfy
/// dt <= eps_low^max(beta, 2 gamma + 1); trials >= 100. Deterministic in key.
struct McExitResult {
  double prob;          // hit-low frequency among decided trials
  double std_err;       // binomial
  long hits_low;
  long hits_high;
  long undecided;       // step budget exhausted, excluded from prob
  long trials;
};

McExitResult exit_prob_mc(const SdeProblem& problem, double dt, long trials, std::uint64_t key,
                          const McOptions& options = {});

/// The solver's boundary-clamped step rule transplanted to the SDE.
double suggested_dt(const SdeProblem& problem, double kappa);

}  // namespace srde

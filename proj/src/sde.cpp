#include "srde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "srde/rng.hpp"

namespace srde {

void SdeProblem::validate() const {
  if (!(beta >= 0)) throw std::invalid_argument("SdeProblem: beta must be >= 0");
  if (!(gamma >= 0)) throw std::invalid_argument("SdeProblem: gamma must be >= 0");
  if (!(eps_low > 0)) throw std::invalid_argument("SdeProblem: eps_low must be > 0");
  if (!(eps_low < x0 && x0 < b_high))
    throw std::invalid_argument("SdeProblem: need 0 < eps_low < x0 < b_high");
}

namespace {

// exponent of the scale density: g(y) = -2 int_{x0}^{y} z^p dz, p = 2 gamma - beta
struct ScaleExponent {
  double p;
  double x0;

  double antiderivative(double z) const {
    if (p == -1.0) return std::log(z);
    return std::pow(z, p + 1.0) / (p + 1.0);
  }
  double operator()(double z) const { return -2.0 * (antiderivative(z) - antiderivative(x0)); }
};

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// log of the Simpson estimate of int_a^b exp(g)
double log_simpson(const ScaleExponent& g, double a, double b) {
  const double m = 0.5 * (a + b);
  const double w = std::log((b - a) / 6.0);
  double s = log_add(g(a), g(m) + std::log(4.0));
  s = log_add(s, g(b));
  return w + s;
}

struct LogQuad {
  const ScaleExponent& g;
  double tol;
  long panels = 0;
  long worst_depth = 0;
  double lead = -std::numeric_limits<double>::infinity();

  double adaptive(double a, double b, double whole, int depth) {
    // g is strictly decreasing, so g(a) + log(b-a) bounds the log mass of
    // [a,b]; stretches that cannot touch the leading contribution are kept at
    // their coarse estimate instead of being resolved to relative precision
    if (g(a) + std::log(b - a) < lead - 46.0) return whole;
    const double m = 0.5 * (a + b);
    const double left = log_simpson(g, a, m);
    const double right = log_simpson(g, m, b);
    const double combined = log_add(left, right);
    ++panels;
    worst_depth = std::max<long>(worst_depth, depth);
    // log values of size |g| carry O(|g| eps) rounding; do not chase below that
    const double tol_eff = tol + 64.0 * std::abs(combined) *
                                     std::numeric_limits<double>::epsilon();
    if (std::abs(combined - whole) < tol_eff || depth >= 48) {
      if (depth >= 48 && std::abs(combined - whole) > std::max(1e3 * tol, 1e6 * tol_eff))
        throw std::runtime_error("exit_prob_scale: quadrature stalled on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "], log error " +
                                 std::to_string(std::abs(combined - whole)));
      return combined;
    }
    return log_add(adaptive(a, m, left, depth + 1), adaptive(m, b, right, depth + 1));
  }

  // geometric pre-split toward the lower end, where the density may spike
  double integrate(double a, double b) {
    std::vector<double> knots{a};
    for (double k = 2.0 * a; k < b; k *= 2.0) knots.push_back(k);
    knots.push_back(b);
    lead = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      lead = std::max(lead, g(knots[i]) + std::log(knots[i + 1] - knots[i]));
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      acc = log_add(acc, adaptive(knots[i], knots[i + 1], log_simpson(g, knots[i], knots[i + 1]),
                                  0));
    return acc;
  }
};

}  // namespace

ScaleExitResult exit_prob_scale(const SdeProblem& pb, double log_tol) {
  pb.validate();
  const ScaleExponent g{2.0 * pb.gamma - pb.beta, pb.x0};
  LogQuad quad{g, log_tol};
  const double log_num = quad.integrate(pb.x0, pb.b_high);      // s(b) - s(x0)
  const double log_den = quad.integrate(pb.eps_low, pb.b_high); // s(b) - s(eps)
  const double log_prob = log_num - log_den;
  return ScaleExitResult{std::exp(log_prob), log_prob, quad.panels};
}

double suggested_dt(const SdeProblem& pb, double kappa) {
  return kappa * std::pow(pb.eps_low, std::max(pb.beta, 2.0 * pb.gamma + 1.0));
}

McExitResult exit_prob_mc(const SdeProblem& pb, double dt, long trials, std::uint64_t key,
                          const McOptions& opt) {
  pb.validate();
  if (trials < 100) throw std::invalid_argument("exit_prob_mc: trials must be >= 100");
  if (!(dt > 0) || dt > suggested_dt(pb, 1.0))
    throw std::invalid_argument(
        "exit_prob_mc: dt must be positive and <= eps_low^max(beta, 2*gamma+1)");

  const int workers = std::max(1, opt.threads);
  std::vector<long> low(workers, 0), high(workers, 0), undecided(workers, 0);

  auto run_range = [&](int w, long begin, long end) {
    const double root_dt = std::sqrt(dt);
    for (long trial = begin; trial < end; ++trial) {
      const std::uint64_t trial_key = rng::derive_key(key, 0, std::uint64_t(trial));
      double x = pb.x0;
      bool decided = false;
      for (long s = 0; s < opt.max_steps_per_trial; ++s) {
        if (x <= pb.eps_low) {
          ++low[w];
          decided = true;
          break;
        }
        if (x >= pb.b_high) {
          ++high[w];
          decided = true;
          break;
        }
        const double vol = opt.noise_scale * std::pow(x, -pb.gamma) * root_dt;
        double next = x + std::pow(x, -pb.beta) * dt;
        if (vol != 0.0) next += vol * rng::normal(trial_key, std::uint64_t(s), 0);
        // Brownian-bridge correction: the continuous path may graze a barrier
        // inside a step whose endpoints both stay interior
        if (vol != 0.0 && next > pb.eps_low && next < pb.b_high) {
          const double var = vol * vol;
          const double p_low =
              std::exp(-2.0 * (x - pb.eps_low) * (next - pb.eps_low) / var);
          if (rng::uniform(trial_key, std::uint64_t(s), 101) < p_low) {
            ++low[w];
            decided = true;
            break;
          }
          const double p_high = std::exp(-2.0 * (pb.b_high - x) * (pb.b_high - next) / var);
          if (rng::uniform(trial_key, std::uint64_t(s), 102) < p_high) {
            ++high[w];
            decided = true;
            break;
          }
        }
        x = next;
      }
      if (!decided) ++undecided[w];
    }
  };

  if (workers == 1) {
    run_range(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long begin = std::min<long>(trials, w * chunk);
      const long end = std::min<long>(trials, begin + chunk);
      pool.emplace_back(run_range, w, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  McExitResult r{};
  for (int w = 0; w < workers; ++w) {
    r.hits_low += low[w];
    r.hits_high += high[w];
    r.undecided += undecided[w];
  }
  r.trials = trials;
  const long decided = r.hits_low + r.hits_high;
  r.prob = decided > 0 ? double(r.hits_low) / double(decided) : 0.0;
  r.std_err = decided > 0 ? std::sqrt(std::max(r.prob * (1.0 - r.prob), 0.0) / double(decided))
                          : 0.0;
  return r;
}

}  // namespace srde

#include <doctest.h>

#include <cmath>

#include "srde/sde.hpp"
#include "srde/stats.hpp"

using namespace srde;

TEST_CASE("unit-drift Brownian case matches the closed-form scale ratio") {
  SdeProblem pb;
  pb.beta = 0.0;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 0.1;
  pb.b_high = 1.0;
  // scale density exp(-2y) up to a constant: ratio of exponential increments
  const double expected = (std::exp(-2.0 * 1.0) - std::exp(-2.0 * 0.5)) /
                          (std::exp(-2.0 * 1.0) - std::exp(-2.0 * 0.1));
  const auto r = exit_prob_scale(pb);
  CHECK(r.prob == doctest::Approx(expected).epsilon(1e-8));
  CHECK(r.prob == doctest::Approx(0.340277).epsilon(1e-4));
}

TEST_CASE("scale probability lives in [0,1] and is nonincreasing in x0") {
  SdeProblem pb;
  pb.beta = 0.7;
  pb.gamma = 0.3;
  pb.eps_low = 0.05;
  double prev = 1.1;
  for (double x0 : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    pb.x0 = x0;
    const auto r = exit_prob_scale(pb);
    CHECK(r.prob >= 0.0);
    CHECK(r.prob <= 1.0);
    CHECK(r.prob <= prev + 1e-12);
    prev = r.prob;
  }
  pb.x0 = 0.9999;
  CHECK(exit_prob_scale(pb).prob < 0.01);  // starting at the upper barrier
}

TEST_CASE("strong wall: lower-exit probability collapses as eps shrinks") {
  SdeProblem pb;
  pb.beta = 3.0;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  double prev_log = 1.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    pb.eps_low = eps;
    const auto r = exit_prob_scale(pb);
    CHECK(r.prob < 1e-3);
    CHECK(r.log_prob < prev_log);  // strictly decreasing toward -infinity
    prev_log = r.log_prob;
  }
  CHECK(prev_log < -1e6);  // the eps = 1e-4 barrier is astronomically unreachable
}

TEST_CASE("weak wall keeps the lower exit reachable") {
  SdeProblem pb;
  pb.beta = 0.5;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 1e-4;
  CHECK(exit_prob_scale(pb).prob > 0.05);
}

TEST_CASE("threshold signature at gamma = 0: beta above vs below 1") {
  SdeProblem pb;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  double above = 1.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    pb.eps_low = eps;
    pb.beta = 3.0;
    const double strong = exit_prob_scale(pb).prob;
    pb.beta = 0.5;
    const double weak = exit_prob_scale(pb).prob;
    CHECK(strong < above);
    CHECK(weak > 0.05);
    above = std::max(strong, 1e-300);
  }
}

TEST_CASE("problem validation") {
  SdeProblem pb;
  pb.eps_low = 0.6;  // above x0
  CHECK_THROWS_AS(exit_prob_scale(pb), std::invalid_argument);
  pb.eps_low = 0.0;
  CHECK_THROWS_AS(exit_prob_scale(pb), std::invalid_argument);
  pb = SdeProblem{};
  pb.beta = -1.0;
  CHECK_THROWS_AS(exit_prob_scale(pb), std::invalid_argument);
}

TEST_CASE("noise-free limit drifts up and never exits low") {
  SdeProblem pb;
  pb.beta = 1.0;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 0.05;
  McOptions opt;
  opt.noise_scale = 0.0;
  const auto r = exit_prob_mc(pb, 1e-3, 200, 1, opt);
  CHECK(r.prob == 0.0);
  CHECK(r.hits_low == 0);
  CHECK(r.hits_high == 200);
  CHECK(r.undecided == 0);
}

TEST_CASE("Monte Carlo agrees with the scale function within 3 standard errors") {
  SdeProblem pb;
  pb.beta = 0.5;
  pb.gamma = 0.25;
  pb.x0 = 0.5;
  pb.eps_low = 0.05;
  const double dt = std::min(suggested_dt(pb, 0.25), 2e-4);
  const auto scale = exit_prob_scale(pb);
  const auto mc = exit_prob_mc(pb, dt, 4000, 20240601, McOptions{.threads = 2});
  const double band = std::max({mc.std_err, adjusted_se(mc.hits_low, mc.trials),
                                1.0 / double(mc.trials)});
  CHECK(std::abs(mc.prob - scale.prob) <= 3.0 * band);
}

TEST_CASE("standard error shrinks like the square root of the trial count") {
  SdeProblem pb;
  pb.beta = 0.5;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 0.05;
  const double dt = std::min(suggested_dt(pb, 0.25), 2e-4);
  const auto small = exit_prob_mc(pb, dt, 1000, 7, McOptions{.threads = 2});
  const auto large = exit_prob_mc(pb, dt, 4000, 7, McOptions{.threads = 2});
  CHECK(large.std_err < small.std_err);
  // quadrupling the trials halves the error, modulo the p-hat wobble
  CHECK(large.std_err / small.std_err == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("Monte Carlo preconditions") {
  SdeProblem pb;
  pb.beta = 2.0;
  pb.gamma = 0.5;
  pb.eps_low = 0.05;
  pb.x0 = 0.5;
  CHECK_THROWS_AS(exit_prob_mc(pb, 0.5, 1000, 1), std::invalid_argument);  // dt too large
  CHECK_THROWS_AS(exit_prob_mc(pb, 1e-5, 50, 1), std::invalid_argument);   // too few trials
}

TEST_CASE("trials exceeding the step budget are reported, not decided") {
  SdeProblem pb;
  pb.beta = 0.5;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 0.05;
  McOptions opt;
  opt.max_steps_per_trial = 3;  // no trial can reach a barrier this fast
  const auto r = exit_prob_mc(pb, 1e-5, 200, 5, opt);
  CHECK(r.undecided == 200);
  CHECK(r.hits_low == 0);
  CHECK(r.hits_high == 0);
  CHECK(r.prob == 0.0);
}

TEST_CASE("mc threading does not change the counts") {
  SdeProblem pb;
  pb.beta = 0.5;
  pb.gamma = 0.0;
  pb.x0 = 0.5;
  pb.eps_low = 0.05;
  const double dt = std::min(suggested_dt(pb, 0.25), 2e-4);
  const auto serial = exit_prob_mc(pb, dt, 500, 99, McOptions{.threads = 1});
  const auto parallel = exit_prob_mc(pb, dt, 500, 99, McOptions{.threads = 2});
  CHECK(serial.hits_low == parallel.hits_low);
  CHECK(serial.hits_high == parallel.hits_high);
}

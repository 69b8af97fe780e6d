#include <doctest.h>

#include <cmath>
#include <vector>

#include "srde/convolution.hpp"
#include "srde/rng.hpp"
#include "srde/stats.hpp"

using namespace srde;
using Eigen::ArrayXd;
using Eigen::MatrixXd;

namespace {

FrozenPath brownian_path(const SineBasis<double>& basis, Eigen::Index steps, double horizon,
                         double sigma_level, std::uint64_t key) {
  FrozenPath p;
  p.dt = horizon / double(steps);
  p.sigma = ArrayXd::Constant(steps, sigma_level);
  p.modal_increments.resize(basis.modes(), steps);
  const double root_dt = std::sqrt(p.dt);
  for (Eigen::Index j = 0; j < steps; ++j)
    for (Eigen::Index k = 0; k < basis.modes(); ++k)
      p.modal_increments(k, j) =
          root_dt / double(k + 1) * rng::normal(key, std::uint64_t(j), std::uint64_t(k));
  return p;
}

}  // namespace

TEST_CASE("zero path gives a zero convolution through both routes") {
  SineBasis<double> basis(6, 16);
  FrozenPath p;
  p.dt = 0.01;
  p.sigma = ArrayXd::Ones(50);
  p.modal_increments = MatrixXd::Zero(6, 50);
  CHECK(convolution_direct(basis, p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(convolution_factorized(basis, p, 0.3, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single initial increment decays at the modal rate") {
  SineBasis<double> basis(4, 12);
  FrozenPath p;
  p.dt = 0.02;
  p.sigma = ArrayXd::Constant(5, 1.7);
  p.modal_increments = MatrixXd::Zero(4, 5);
  p.modal_increments(2, 0) = 0.25;  // one kick in mode 3 at s = 0
  const MatrixXd z = convolution_direct(basis, p);
  for (Eigen::Index m = 1; m <= 5; ++m) {
    const double t = double(m) * p.dt;
    const double expected = std::exp(-basis.eigenvalue(3) * t) * 1.7 * 0.25;
    CHECK(z(2, m) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(z(0, m) == 0.0);
    CHECK(z(1, m) == 0.0);
    CHECK(z(3, m) == 0.0);
  }
}

TEST_CASE("direct sums are Cauchy in dt on a smooth deterministic path") {
  SineBasis<double> basis(6, 16);
  const double horizon = 0.5;
  // Riemann path: "increments" b_k(s) dt for a smooth modal density b
  auto smooth_path = [&](Eigen::Index steps) {
    FrozenPath p;
    p.dt = horizon / double(steps);
    p.sigma.resize(steps);
    p.modal_increments.resize(basis.modes(), steps);
    for (Eigen::Index j = 0; j < steps; ++j) {
      const double s = double(j) * p.dt;
      p.sigma[j] = 1.0 + 0.5 * std::sin(s);
      for (Eigen::Index k = 0; k < basis.modes(); ++k)
        p.modal_increments(k, j) = std::cos(2.0 * s + double(k)) / double(k + 1) * p.dt;
    }
    return p;
  };
  auto terminal_sup = [&](const MatrixXd& z) {
    return basis.to_grid(z.col(z.cols() - 1).array()).abs().maxCoeff();
  };
  const double z1 = terminal_sup(convolution_direct(basis, smooth_path(256)));
  const double z2 = terminal_sup(convolution_direct(basis, smooth_path(512)));
  const double z3 = terminal_sup(convolution_direct(basis, smooth_path(1024)));
  const double d12 = std::abs(z2 - z1), d23 = std::abs(z3 - z2);
  CHECK(d12 < 1e-3);          // stated Cauchy tolerance at this resolution
  CHECK(d23 < 0.75 * d12);    // first-order shrinkage under halving
}

TEST_CASE("factorization exponent must respect the roughness bound") {
  SineBasis<double> basis(4, 12);
  FrozenPath p = brownian_path(basis, 16, 0.1, 1.0, 5);
  CHECK_THROWS_AS(convolution_factorized(basis, p, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(convolution_factorized(basis, p, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(convolution_factorized(basis, p, 0.3, 0.5), std::invalid_argument);
  CHECK_NOTHROW(convolution_factorized(basis, p, 0.24, 0.5));
}

TEST_CASE("factorized route reproduces the direct sums on a frozen path") {
  SineBasis<double> basis(8, 16);
  const FrozenPath fine = brownian_path(basis, 4000, 0.1, 0.4, 99);
  const FrozenPath base = coarsen(fine);
  REQUIRE(base.steps() == 2000);

  const double disc_base =
      sup_discrepancy(basis, convolution_direct(basis, base),
                      convolution_factorized(basis, base, 0.3, 0.0));
  const double disc_fine =
      sup_discrepancy(basis, convolution_direct(basis, fine),
                      convolution_factorized(basis, fine, 0.3, 0.0));
  CHECK(disc_base < 1e-2);
  CHECK(disc_fine < disc_base);
}

TEST_CASE("factorization error decays with observed order at least alpha") {
  SineBasis<double> basis(6, 16);
  const double alpha = 0.3;
  // per-path orders wobble around the asymptotic rate, so the refinement
  // study averages the discrepancy over an ensemble of frozen paths
  const std::uint64_t seeds[] = {1234, 99, 777, 31};
  constexpr int levels = 4;  // 800, 1600, 3200, 6400 steps
  double mean_disc[levels] = {};
  for (std::uint64_t seed : seeds) {
    FrozenPath path = brownian_path(basis, 6400, 0.1, 0.5, seed);
    for (int lvl = levels - 1; lvl >= 0; --lvl) {
      mean_disc[lvl] += sup_discrepancy(basis, convolution_direct(basis, path),
                                        convolution_factorized(basis, path, alpha, 0.0)) /
                        double(std::size(seeds));
      if (lvl > 0) path = coarsen(path);
    }
  }
  std::vector<double> log_dt, log_disc;
  for (int lvl = 0; lvl < levels; ++lvl) {
    CHECK((lvl == 0 || mean_disc[lvl] < mean_disc[lvl - 1]));
    log_dt.push_back(std::log(0.1 / (800.0 * std::pow(2.0, lvl))));
    log_disc.push_back(std::log(mean_disc[lvl]));
  }
  const auto fit = fit_line(log_dt, log_disc);
  CHECK(fit.slope >= alpha);
}

TEST_CASE("coarsen merges pairs and keeps left sigma values") {
  SineBasis<double> basis(3, 8);
  FrozenPath p;
  p.dt = 0.1;
  p.sigma.resize(4);
  p.sigma << 1.0, 2.0, 3.0, 4.0;
  p.modal_increments.resize(3, 4);
  for (int j = 0; j < 4; ++j) p.modal_increments.col(j).setConstant(double(j + 1));
  const FrozenPath c = coarsen(p);
  CHECK(c.dt == doctest::Approx(0.2));
  CHECK(c.steps() == 2);
  CHECK(c.sigma[0] == 1.0);
  CHECK(c.sigma[1] == 3.0);
  CHECK(c.modal_increments(0, 0) == doctest::Approx(3.0));  // 1 + 2
  CHECK(c.modal_increments(0, 1) == doctest::Approx(7.0));  // 3 + 4
  FrozenPath odd;
  odd.dt = 0.1;
  odd.sigma = ArrayXd::Ones(3);
  odd.modal_increments = MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(coarsen(odd), std::invalid_argument);
}

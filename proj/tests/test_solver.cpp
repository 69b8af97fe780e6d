#include <doctest.h>

#include <cmath>

#include "srde/envelope.hpp"
#include "srde/solver.hpp"

using namespace srde;
using Eigen::ArrayXd;

namespace {

SolverSettings quick_settings() {
  SolverSettings s;
  s.cutoff_level = 8;
  s.t_end = 0.25;
  s.dt_base = 5e-4;
  s.sample_stride = 1;
  return s;
}

}  // namespace

TEST_CASE("with forcing disabled and zero noise, a step is the heat semigroup") {
  SineBasis<double> basis(8, 24);
  Forcing<double> none(1.0, 0.0, 0.5, 0.0, 0.0);
  const auto spec = NoiseSpectrum::off(8);
  const auto state = profile_eigenmode(basis, 0.6);
  NoiseStream stream(1);
  const double dt = 1e-3;
  const auto next = step(basis, none, 8, spec, state, dt, stream);
  const ArrayXd expected = basis.apply_semigroup(state.values, dt);
  CHECK((next.values - expected).abs().maxCoeff() < 1e-14);
  CHECK(next.sup <= state.sup);
  CHECK(next.time == doctest::Approx(state.time + dt));
}

TEST_CASE("canonical drift pushes the boundary gap up in one step") {
  SineBasis<double> basis(8, 24);
  Forcing<double> f(2.0, 0.0);
  const auto spec = NoiseSpectrum::off(8);
  const auto state = profile_eigenmode(basis, 0.9);
  NoiseStream stream(1);
  const auto next = step(basis, f, 8, spec, state, 1e-4, stream);
  CHECK(next.gap > state.gap);
}

TEST_CASE("step validates shapes and dt") {
  SineBasis<double> basis(8, 24);
  SineBasis<double> other(6, 24);
  Forcing<double> f(2.0, 0.0);
  const auto spec = NoiseSpectrum::off(8);
  const auto state = profile_eigenmode(basis, 0.5);
  NoiseStream stream(1);
  CHECK_THROWS_AS(step(basis, f, 8, spec, state, 0.0, stream), std::invalid_argument);
  CHECK_THROWS_AS(step(other, f, 8, spec, state, 1e-3, stream), std::invalid_argument);
  CHECK_THROWS_AS(step(basis, f, 8, NoiseSpectrum::off(6), state, 1e-3, stream),
                  std::invalid_argument);
}

TEST_CASE("zero state with zero noise is a fixed point, no crossings") {
  SineBasis<double> basis(8, 24);
  Forcing<double> f(2.0, 0.0);
  const auto rec = run_trajectory(basis, f, NoiseSpectrum::off(8),
                                  profile_eigenmode(basis, 0.0), quick_settings(), 5);
  CHECK(rec.status == TerminalStatus::completed);
  CHECK(rec.min_gap == 1.0);
  for (double t : rec.crossing_times) CHECK(std::isnan(t));
  CHECK(rec.ladder.empty());
  for (double g : rec.gaps) CHECK(g == 1.0);
}

TEST_CASE("same key gives bitwise-identical trajectories") {
  SineBasis<double> basis(12, 32);
  Forcing<double> f(1.5, 0.5, 0.5, 1.2, 1.0);
  const auto spec = NoiseSpectrum::trace_class(12);
  auto settings = quick_settings();
  settings.record_fields = true;
  const auto initial = profile_eigenmode(basis, 0.7);
  const auto a = run_trajectory(basis, f, spec, initial, settings, 424242);
  const auto b = run_trajectory(basis, f, spec, initial, settings, 424242);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.gaps[i] == b.gaps[i]);
    CHECK((a.fields[i] == b.fields[i]).all());
  }
  CHECK(a.steps == b.steps);
}

TEST_CASE("initial data beyond a level records the crossing at t = 0") {
  SineBasis<double> basis(8, 24);
  Forcing<double> f(2.0, 0.0);
  auto settings = quick_settings();
  settings.cutoff_level = 3;
  // sup above 26/27 from the start: T_1..T_3 all at time zero, immediate floor
  const auto rec = run_trajectory(basis, f, NoiseSpectrum::off(8),
                                  profile_eigenmode(basis, 0.97), settings, 9);
  CHECK(rec.status == TerminalStatus::blew_up);
  CHECK(rec.final_time == 0.0);
  for (int n = 1; n <= 3; ++n) CHECK(rec.crossing_times[n - 1] == 0.0);
}

TEST_CASE("noisy run: crossings are monotone and consistent with the running minimum") {
  SineBasis<double> basis(12, 32);
  Forcing<double> f(1.0, 0.5, 0.5, 2.2, 0.5);
  const auto spec = NoiseSpectrum::trace_class(12);
  auto settings = quick_settings();
  settings.cutoff_level = 6;
  settings.t_end = 1.0;
  int crossed_some = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rec = run_trajectory(basis, f, spec, profile_eigenmode(basis, 0.8), settings, seed);
    double prev = 0.0;
    for (int n = 1; n <= settings.cutoff_level; ++n) {
      const double tn = rec.crossing_times[n - 1];
      if (std::isnan(tn)) {
        // deeper levels cannot have been crossed either
        for (int m = n + 1; m <= settings.cutoff_level; ++m)
          CHECK(std::isnan(rec.crossing_times[m - 1]));
        break;
      }
      CHECK(tn >= prev);
      CHECK(rec.min_gap < std::pow(3.0, -n));
      prev = tn;
      ++crossed_some;
    }
    if (rec.status == TerminalStatus::blew_up)
      CHECK(rec.min_gap <= std::pow(3.0, -settings.cutoff_level));
  }
  CHECK(crossed_some > 0);  // the configuration actually exercises crossings
}

TEST_CASE("ladder events step one level at a time with consistent direction") {
  SineBasis<double> basis(12, 32);
  Forcing<double> f(1.0, 0.5, 0.5, 2.5, 0.4);
  const auto spec = NoiseSpectrum::trace_class(12);
  auto settings = quick_settings();
  settings.cutoff_level = 8;
  settings.t_end = 1.5;
  long events = 0;
  for (std::uint64_t seed = 100; seed < 108; ++seed) {
    const auto rec = run_trajectory(basis, f, spec, profile_eigenmode(basis, 0.85), settings, seed);
    const int N = rec.ladder_base_level;
    for (std::size_t i = 0; i < rec.ladder.size(); ++i) {
      const auto& ev = rec.ladder[i];
      CHECK(ev.level >= N);
      CHECK(ev.nominal_gap == doctest::Approx(std::pow(3.0, -ev.level)).epsilon(1e-12));
      if (ev.down)
        CHECK(ev.actual_gap <= ev.nominal_gap);
      else
        CHECK(ev.actual_gap >= 3.0 * std::pow(3.0, -(ev.level + 1)));
      if (i > 0) {
        CHECK(rec.ladder[i].time >= rec.ladder[i - 1].time);
        const int diff = rec.ladder[i].level - rec.ladder[i - 1].level;
        CHECK((diff == 1 || diff == -1));
        CHECK(rec.ladder[i].down == (diff == 1));
        // consecutive nominal gaps differ by exactly a factor 3
        const double ratio = rec.ladder[i - 1].nominal_gap / rec.ladder[i].nominal_gap;
        CHECK((ratio == doctest::Approx(3.0).epsilon(1e-12) ||
               ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-12)));
      }
      ++events;
    }
  }
  CHECK(events > 10);
}

TEST_CASE("paired cutoff levels agree exactly until the shallower saturation") {
  SineBasis<double> basis(16, 32);
  const auto spec = NoiseSpectrum::trace_class(16);
  int crossings = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Forcing<double> f(1.0 + 0.3 * double(seed), 0.5, 0.5, 2.0, 0.6);
    auto low = quick_settings();
    low.cutoff_level = 4;
    low.t_end = 0.6;
    low.record_fields = true;
    auto high = low;
    high.cutoff_level = 8;
    const auto initial = profile_eigenmode(basis, 0.9);
    const auto a = run_trajectory(basis, f, spec, initial, low, seed);
    const auto b = run_trajectory(basis, f, spec, initial, high, seed);
    const std::size_t shared = std::min(a.times.size(), b.times.size());
    REQUIRE(shared > 0);
    for (std::size_t i = 0; i < shared; ++i) {
      CHECK(a.times[i] == b.times[i]);
      CHECK((a.fields[i] - b.fields[i]).abs().maxCoeff() <= 1e-10);
    }
    if (!std::isnan(a.crossing_times[3])) ++crossings;
  }
  CHECK(crossings > 0);  // at least some paths actually reached the shallow cutoff
}

TEST_CASE("without noise the gap never decreases") {
  SineBasis<double> basis(16, 48);
  for (double beta : {1.0, 2.0}) {
    Forcing<double> f(beta, 0.0);
    auto settings = quick_settings();
    settings.dt_base = 1e-4;
    // start inside the deep region gap < 3^-N
    const auto rec = run_trajectory(basis, f, NoiseSpectrum::off(16),
                                    profile_eigenmode(basis, 1.0 - 0.9 / 9.0), settings, 3);
    for (std::size_t i = 1; i < rec.gaps.size(); ++i) CHECK(rec.gaps[i] >= rec.gaps[i - 1]);
  }
}

TEST_CASE("states stay transform-consistent along a noisy run") {
  SineBasis<double> basis(10, 28);
  Forcing<double> f(1.5, 0.75, 0.5, 1.5, 0.8);
  const auto spec = NoiseSpectrum::trace_class(10);
  NoiseStream stream(88);
  FieldState state = profile_eigenmode(basis, 0.6);
  for (int i = 0; i < 50; ++i) {
    state = step(basis, f, 8, spec, state, 5e-4, stream);
    CHECK((basis.to_modal(state.values) - state.modal).abs().maxCoeff() < 1e-8);
    CHECK(state.gap == doctest::Approx(1.0 - state.sup).epsilon(1e-15));
  }
}

TEST_CASE("recorded noise replays a counter-driven trajectory exactly") {
  SineBasis<double> basis(8, 24);
  Forcing<double> f(1.5, 0.5, 0.5, 1.0, 1.0);
  const auto spec = NoiseSpectrum::trace_class(8);
  auto settings = quick_settings();
  settings.adaptive = false;
  settings.record_path = true;
  settings.record_fields = true;
  const auto initial = profile_eigenmode(basis, 0.5);
  const auto original = run_trajectory(basis, f, spec, initial, settings, 321);
  REQUIRE(original.path.steps() > 0);

  RecordedNoiseSource replay(original.path.dt, original.path.modal_increments);
  auto settings2 = settings;
  settings2.record_path = false;
  const auto copy = run_trajectory(basis, f, spec, initial, settings2, 321, replay);
  REQUIRE(copy.times.size() == original.times.size());
  for (std::size_t i = 0; i < copy.times.size(); ++i)
    CHECK((copy.fields[i] == original.fields[i]).all());
}

TEST_CASE("profiles hit their grid sup-norm exactly and stay band-limited") {
  SineBasis<double> basis(12, 32);
  for (double amp : {0.3, 0.85}) {
    const auto eig = profile_eigenmode(basis, amp);
    const auto plat = profile_plateau(basis, amp, 0.4);
    for (const auto& s : {eig, plat}) {
      CHECK(s.sup == amp);
      CHECK(s.gap == 1.0 - amp);
      CHECK(s.values.abs().maxCoeff() == doctest::Approx(amp).epsilon(1e-14));
      CHECK((basis.to_grid(s.modal) - s.values).abs().maxCoeff() < 1e-12);
    }
  }
  CHECK(profile_plateau(basis, 0.0, 0.4).gap == 1.0);
  CHECK_THROWS_AS(profile_plateau(basis, 1.0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(profile_plateau(basis, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(profile_eigenmode(basis, -1.0), std::invalid_argument);
}

TEST_CASE("run_trajectory rejects inadmissible inputs") {
  SineBasis<double> basis(8, 24);
  Forcing<double> f(2.0, 0.0);
  const auto spec = NoiseSpectrum::off(8);
  auto settings = quick_settings();
  FieldState bad = profile_eigenmode(basis, 0.5);
  bad.sup = 1.0;  // simulate invalid initial data
  CHECK_THROWS_AS(run_trajectory(basis, f, spec, bad, settings, 1), std::invalid_argument);
  settings.cutoff_level = 0;
  CHECK_THROWS_AS(run_trajectory(basis, f, spec, profile_eigenmode(basis, 0.5), settings, 1),
                  std::invalid_argument);
}

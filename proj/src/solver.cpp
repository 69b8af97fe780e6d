#include "srde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srde/envelope.hpp"

namespace srde {

namespace {

double pow3_neg(int n) { return std::pow(3.0, -double(n)); }

// deepest level n <= cap with gap <= 3^-n, robust against log rounding and
// nonpositive gaps (a saturated state counts as the deepest tracked level)
int deepest_level(double gap, int floor_hint, int cap) {
  if (!(gap > 0.0)) return cap;
  int n = std::max(floor_hint, int(std::floor(-std::log(gap) / std::log(3.0))));
  n = std::min(n, cap);
  while (n < cap && gap <= pow3_neg(n + 1)) ++n;
  while (n > floor_hint && gap > pow3_neg(n)) --n;
  return n;
}

struct Stepper {
  const SineBasis<double>& basis;
  const Forcing<double>& forcing;
  double clamp_bound;            // 1 - 3^-level, hoisted out of the grid loop
  Eigen::ArrayXd work_grid;      // u + f dt + sigma dW
  Eigen::ArrayXd work_modal;
  Eigen::ArrayXd noise_grid;
  Eigen::ArrayXd decay;
  double decay_dt = -1.0;

  Stepper(const SineBasis<double>& b, const Forcing<double>& f, int level)
      : basis(b), forcing(f), clamp_bound(Forcing<double>::cutoff_bound(level)) {
    work_grid.resize(b.grid_size());
    noise_grid.resize(b.grid_size());
  }

  double clamp(double u) const {
    return u < -clamp_bound ? -clamp_bound : (u > clamp_bound ? clamp_bound : u);
  }

  // u_{t+dt} = S(dt)[u + f_n(u) dt + sigma_n(u) dW]; dW already carries sqrt(dt)
  FieldState advance(const FieldState& state, double dt, const Eigen::ArrayXd& modal_increment) {
    const bool with_noise = (modal_increment.abs() != 0.0).any();
    if (with_noise) noise_grid = basis.to_grid(modal_increment);
    for (Eigen::Index i = 0; i < state.values.size(); ++i) {
      const double u = clamp(state.values[i]);
      double g = state.values[i] + dt * forcing.drift(u);
      if (with_noise) g += forcing.sigma(u) * noise_grid[i];
      work_grid[i] = g;
    }
    if (dt != decay_dt) {
      decay = basis.semigroup_factors(dt);
      decay_dt = dt;
    }
    work_modal = decay * basis.to_modal(work_grid);
    return FieldState::from_modal(basis, work_modal, state.time + dt);
  }
};

struct LadderTracker {
  int base_level;  // N
  int floor_level;
  bool active = false;
  int level = 0;

  void observe(double t, double gap, std::vector<LadderEvent>& events) {
    if (!active) {
      if (gap <= pow3_neg(base_level)) {
        const int deepest = deepest_level(gap, base_level, floor_level);
        for (int n = base_level; n <= deepest; ++n)
          events.push_back({t, n, pow3_neg(n), gap, true});
        level = deepest;
        active = true;
      }
      return;
    }
    if (level < floor_level && gap <= pow3_neg(level + 1)) {
      const int deepest = deepest_level(gap, level + 1, floor_level);
      for (int n = level + 1; n <= deepest; ++n)
        events.push_back({t, n, pow3_neg(n), gap, true});
      level = deepest;
    } else if (level >= base_level + 1 && gap >= 3.0 * pow3_neg(level)) {
      // exit upward: possibly through several levels, never above N
      int n = level - 1;
      while (n > base_level && gap >= 3.0 * pow3_neg(n)) --n;
      for (int m = level - 1; m >= n; --m)
        events.push_back({t, m, pow3_neg(m), gap, false});
      level = n;
    }
  }
};

void require_finite(const FieldState& s) {
  if (!s.values.isFinite().all())
    throw std::runtime_error("solver: non-finite state at t = " + std::to_string(s.time) +
                             " (cutoffs should prevent this; treat as a bug)");
}

}  // namespace

const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::completed: return "completed";
    case TerminalStatus::blew_up: return "blew_up";
    case TerminalStatus::cutoff_saturated: return "cutoff_saturated";
  }
  return "?";
}

FieldState step(const SineBasis<double>& basis, const Forcing<double>& forcing, int cutoff_level,
                const NoiseSpectrum& spectrum, const FieldState& state, double dt,
                NoiseStream& noise) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  if (state.values.size() != basis.grid_size() || state.modal.size() != basis.modes())
    throw std::invalid_argument("step: state does not match basis");
  if (spectrum.modes() != basis.modes())
    throw std::invalid_argument("step: spectrum does not match basis");
  Stepper st(basis, forcing, cutoff_level);
  FieldState next = st.advance(state, dt, sample_increment(spectrum, dt, noise));
  require_finite(next);
  return next;
}

Eigen::ArrayXd RecordedNoiseSource::increment(long, double dt) {
  const double ratio = dt / base_dt_;
  const auto r = static_cast<Eigen::Index>(std::llround(ratio));
  if (r < 1 || std::abs(ratio - double(r)) > 1e-6 * std::max(1.0, double(r)))
    throw std::invalid_argument("RecordedNoiseSource: dt is not a multiple of the base step");
  if (cursor_ + r > increments_.cols())
    throw std::out_of_range("RecordedNoiseSource: recorded path exhausted");
  Eigen::ArrayXd sum = increments_.middleCols(cursor_, r).rowwise().sum().array();
  cursor_ += r;
  return sum;
}

TrajectoryRecord run_trajectory(const SineBasis<double>& basis, const Forcing<double>& forcing,
                                const NoiseSpectrum& spectrum, const FieldState& initial,
                                const SolverSettings& settings, std::uint64_t key) {
  CounterNoiseSource source(spectrum, key);
  return run_trajectory(basis, forcing, spectrum, initial, settings, key, source);
}

TrajectoryRecord run_trajectory(const SineBasis<double>& basis, const Forcing<double>& forcing,
                                const NoiseSpectrum& spectrum, const FieldState& initial,
                                const SolverSettings& settings, std::uint64_t key,
                                NoiseSource& noise) {
  if (initial.values.size() != basis.grid_size() || initial.modal.size() != basis.modes())
    throw std::invalid_argument("run_trajectory: initial state does not match basis");
  if (spectrum.modes() != basis.modes())
    throw std::invalid_argument("run_trajectory: spectrum does not match basis");
  if (!(initial.sup < 1.0))
    throw std::invalid_argument("run_trajectory: initial sup-norm must be < 1");
  if (settings.cutoff_level < 1)
    throw std::invalid_argument("run_trajectory: cutoff_level must be >= 1");
  if (!(settings.dt_base > 0) || !(settings.t_end > 0) || !(settings.kappa > 0))
    throw std::invalid_argument("run_trajectory: dt_base, t_end, kappa must be > 0");

  const int n_max = settings.cutoff_level;
  const double floor_gap = pow3_neg(n_max);
  const double dt_exponent = std::max(double(forcing.beta()), 2.0 * double(forcing.gamma()) + 1.0);

  TrajectoryRecord rec;
  rec.key = key;
  rec.crossing_times.assign(n_max, std::numeric_limits<double>::quiet_NaN());
  rec.ladder_base_level = GapEnvelope<double>::minimal_level(forcing.c0());

  Stepper stepper(basis, forcing, n_max);
  LadderTracker ladder{rec.ladder_base_level, n_max};

  // running noise convolution Z(t): Z <- S(dt)[Z + sigma(u) dW], field-valued
  Eigen::ArrayXd conv_grid;
  if (settings.record_convolution) conv_grid = Eigen::ArrayXd::Zero(basis.grid_size());

  std::vector<double> path_sigma;
  std::vector<Eigen::ArrayXd> path_incs;

  FieldState state = initial;
  require_finite(state);

  int next_crossing = 1;
  const auto observe = [&](const FieldState& s) {
    rec.min_gap = std::min(rec.min_gap, s.gap);
    while (next_crossing <= n_max && s.gap < pow3_neg(next_crossing)) {
      rec.crossing_times[next_crossing - 1] = s.time;
      ++next_crossing;
    }
    ladder.observe(s.time, s.gap, rec.ladder);
  };
  const auto sample = [&](const FieldState& s) {
    rec.times.push_back(s.time);
    rec.gaps.push_back(s.gap);
    if (settings.record_convolution) rec.conv_sup.push_back(conv_grid.abs().maxCoeff());
    if (settings.record_fields) rec.fields.push_back(s.values);
  };

  observe(state);
  sample(state);

  long since_sample = 0;
  // a residual below dt_min counts as having reached the horizon
  while (state.gap > floor_gap && state.time < settings.t_end - settings.dt_min) {
    if (rec.steps >= settings.max_steps) {
      rec.budget_exhausted = true;
      break;
    }
    double dt = settings.dt_base;
    if (settings.adaptive)
      dt = std::min(dt, settings.kappa * std::pow(state.gap, dt_exponent));
    dt = std::max(dt, settings.dt_min);
    dt = std::min(dt, settings.t_end - state.time);

    const Eigen::ArrayXd dW = noise.increment(rec.steps, dt);
    if (settings.record_path) {
      double sig = 0.0;
      for (Eigen::Index i = 0; i < state.values.size(); ++i)
        sig = std::max(sig, std::abs(forcing.sigma_cutoff(state.values[i], n_max)));
      path_sigma.push_back(sig);
      path_incs.push_back(dW);
    }
    if (settings.record_convolution) {
      // Z <- S(dt)(Z + sigma(u) dW) with dW expanded on the grid
      Eigen::ArrayXd dW_grid = basis.to_grid(dW);
      for (Eigen::Index i = 0; i < state.values.size(); ++i)
        conv_grid[i] += forcing.sigma_cutoff(state.values[i], n_max) * dW_grid[i];
      conv_grid = basis.apply_semigroup(conv_grid, dt);
    }

    state = stepper.advance(state, dt, dW);
    require_finite(state);
    ++rec.steps;

    observe(state);
    if (++since_sample >= settings.sample_stride || state.gap <= floor_gap ||
        state.time >= settings.t_end) {
      sample(state);
      since_sample = 0;
    }
  }

  if (rec.times.empty() || rec.times.back() != state.time) sample(state);
  rec.final_time = state.time;
  if (state.gap <= floor_gap)
    rec.status = state.sup >= 1.0 ? TerminalStatus::cutoff_saturated : TerminalStatus::blew_up;

  if (settings.record_path && !path_incs.empty()) {
    rec.path.dt = settings.adaptive ? std::numeric_limits<double>::quiet_NaN() : settings.dt_base;
    rec.path.sigma = Eigen::Map<const Eigen::ArrayXd>(path_sigma.data(), long(path_sigma.size()));
    rec.path.modal_increments.resize(basis.modes(), long(path_incs.size()));
    for (long j = 0; j < long(path_incs.size()); ++j)
      rec.path.modal_increments.col(j) = path_incs[size_t(j)].matrix();
  }
  return rec;
}

EnvelopeAudit audit_envelope(const TrajectoryRecord& record, double beta, double drift_scale,
                             double c0) {
  if (record.conv_sup.size() != record.gaps.size())
    throw std::invalid_argument(
        "audit_envelope: record lacks convolution sup-norm samples (record_convolution off?)");
  const int N = GapEnvelope<double>::minimal_level(c0);
  const double deep = std::pow(3.0, -double(N));

  EnvelopeAudit audit;
  const std::size_t count = record.gaps.size();
  std::size_t i = 0;
  while (i < count) {
    const auto qualifies = [&](std::size_t k) {
      return record.gaps[k] > 0.0 && record.conv_sup[k] <= record.gaps[k] / 3.0 &&
             record.gaps[k] <= deep;
    };
    if (!qualifies(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < count && qualifies(j + 1)) ++j;
    if (j == i) {
      ++audit.skipped_short;
      i = j + 1;
      continue;
    }
    AuditWindow w;
    w.first = i;
    w.last = j;
    w.start_time = record.times[i];
    w.start_gap = record.gaps[i];
    GapEnvelope<double> env(w.start_gap, beta, drift_scale, c0);
    for (std::size_t k = i; k <= j; ++k) {
      const double margin = record.gaps[k] - env(record.times[k] - w.start_time);
      w.min_margin = std::min(w.min_margin, margin);
      if (margin < 0.0) ++w.violations;
    }
    audit.violations += w.violations;
    audit.min_margin = std::min(audit.min_margin, w.min_margin);
    audit.windows.push_back(w);
    i = j + 1;
  }
  return audit;
}

}  // namespace srde

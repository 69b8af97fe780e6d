#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "srde/basis.hpp"
#include "srde/convolution.hpp"
#include "srde/field.hpp"
#include "srde/forcing.hpp"
#include "srde/noise.hpp"

namespace srde {

/// Time-stepping controls. The step is exponential Euler on the mild form:
/// the semigroup is applied to state + drift*dt + sigma*dW, nonlinearity on
/// the grid, decay in modes. dt shrinks near the boundary as
/// kappa * gap^max(beta, 2 gamma + 1) because the explicit forcing increment
/// grows like gap^-beta there.
struct SolverSettings {
  int cutoff_level = 12;   // n_max: forcing truncation and the blow-up floor 3^-n_max
  double t_end = 5.0;
  double dt_base = 1e-3;
  double kappa = 0.1;
  double dt_min = 1e-9;
  bool adaptive = true;
  long max_steps = 20'000'000;
  int sample_stride = 1;      // record every k-th step
  bool record_convolution = false;  // track the running noise convolution sup-norm
  bool record_fields = false;       // store grid values at sample times
  bool record_path = false;         // freeze sigma evaluations + modal increments
};

enum class TerminalStatus { completed, blew_up, cutoff_saturated };

const char* to_string(TerminalStatus s);

/// One gap-level transition: the gap reached nominal level 3^-level at `time`,
/// arriving from above (down = true, gap shrank by 3) or below (up).
/// A single step that jumps several levels emits one event per level at the
/// same timestamp, so consecutive nominal gaps always differ by a factor 3.
struct LadderEvent {
  double time;
  int level;
  double nominal_gap;
  double actual_gap;
  bool down;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> gaps;
  std::vector<double> conv_sup;            // filled iff record_convolution
  std::vector<Eigen::ArrayXd> fields;      // filled iff record_fields
  std::vector<double> crossing_times;      // index n-1 holds T_n; NaN = never crossed
  std::vector<LadderEvent> ladder;
  TerminalStatus status = TerminalStatus::completed;
  bool budget_exhausted = false;
  long steps = 0;
  double min_gap = 1.0;
  double final_time = 0.0;
  std::uint64_t key = 0;
  std::string config_digest;               // set by harness-level runs
  int ladder_base_level = 0;               // N derived from c0
  FrozenPath path;                         // filled iff record_path

  bool blew_up() const { return status != TerminalStatus::completed; }
};

/// One exponential-Euler increment (standalone; run_trajectory uses the same
/// arithmetic internally with reused workspaces).
FieldState step(const SineBasis<double>& basis, const Forcing<double>& forcing, int cutoff_level,
                const NoiseSpectrum& spectrum, const FieldState& state, double dt,
                NoiseStream& noise);

/// Modal increments supplier; the counter-based default is deterministic in
/// (key, step index, mode), a recorded source replays a stored fine path.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual Eigen::ArrayXd increment(long step_index, double dt) = 0;
};

class CounterNoiseSource final : public NoiseSource {
 public:
  CounterNoiseSource(const NoiseSpectrum& spec, std::uint64_t key) : spec_(spec), stream_(key) {}
  Eigen::ArrayXd increment(long, double dt) override {
    return sample_increment(spec_, dt, stream_);
  }

 private:
  const NoiseSpectrum& spec_;
  NoiseStream stream_;
};

/// Replays increments recorded on a base grid of width base_dt; a consumer
/// stepping at r*base_dt receives r consecutive columns summed. Steps must
/// align with the base grid.
class RecordedNoiseSource final : public NoiseSource {
 public:
  RecordedNoiseSource(double base_dt, Eigen::MatrixXd increments)
      : base_dt_(base_dt), increments_(std::move(increments)) {}
  Eigen::ArrayXd increment(long, double dt) override;

 private:
  double base_dt_;
  Eigen::MatrixXd increments_;
  Eigen::Index cursor_ = 0;
};

/// Run one trajectory from u0 to t_end or the blow-up floor 3^-cutoff_level,
/// recording samples, first-crossing times T_n for every level up to
/// cutoff_level, and all ladder events. Throws std::invalid_argument on
/// inconsistent shapes or sup|u0| >= 1, std::runtime_error on a non-finite
/// state (a bug signal, the cutoffs bound everything).
TrajectoryRecord run_trajectory(const SineBasis<double>& basis, const Forcing<double>& forcing,
                                const NoiseSpectrum& spectrum, const FieldState& initial,
                                const SolverSettings& settings, std::uint64_t key);

/// Same, driving the noise from an external source (paired-path tests).
TrajectoryRecord run_trajectory(const SineBasis<double>& basis, const Forcing<double>& forcing,
                                const NoiseSpectrum& spectrum, const FieldState& initial,
                                const SolverSettings& settings, std::uint64_t key,
                                NoiseSource& noise);

}  // namespace srde

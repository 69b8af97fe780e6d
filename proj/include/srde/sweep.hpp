#pragma once

#include <cstdint>
#include <vector>

#include "srde/config.hpp"
#include "srde/io.hpp"
#include "srde/solver.hpp"

namespace srde {

struct CellParams {
  std::size_t index = 0;
  double beta = 0, gamma = 0, theta = 0;
  double eta = 0;
  double margin = 0;
  bool condition_ok = false;
};

struct CellStats {
  CellParams params;
  long trials = 0;
  long blowups = 0;     // blew_up + cutoff_saturated
  long saturated = 0;
  long exhausted = 0;   // step budget
  long failures = 0;    // trajectories that threw; recorded, never fatal
  double freq = 0, se = 0, ci_lo = 0, ci_hi = 0;
  double min_gap_mean = 0, min_gap_q10 = 0, min_gap_med = 0, min_gap_q90 = 0;
  std::vector<double> mean_crossing;  // index n-1: mean T_n over trials that crossed
  std::vector<long> crossing_count;
  long steps_total = 0;
};

struct SweepResult {
  std::vector<CellStats> cells;
  long trials_per_cell = 0;
  int cutoff_level = 0;
  double wall_ms = 0;
};

/// Cross product of the sweep grids; every cell pre-validated. Trajectory
/// keys are derived from (master seed, cell parameter values, trial index),
/// so a cell's numbers are independent of which other cells exist, and the
/// reduction order is fixed regardless of the worker count.
SweepResult run_sweep(const ExperimentConfig& config, int threads);

/// The sweep grid in row order, with eta and condition margin resolved.
std::vector<CellParams> enumerate_cells(const ExperimentConfig& config);

/// Rerun one trajectory of a sweep cell with custom solver settings (trace
/// emission, paired-path studies); uses exactly the key the sweep used.
TrajectoryRecord run_cell_trial(const ExperimentConfig& config, const CellParams& cell,
                                long trial, const SolverSettings& settings);

io::Table sweep_table(const SweepResult& result);

struct ProbeCell {
  double eps = 0;
  long qualifying = 0;   // ladder events at the level with a recorded successor
  long fast_drops = 0;   // successor is a drop and arrived within eps
  double p_hat = 0, se = 0, ci_lo = 0, ci_hi = 0;
  bool inconclusive = false;
};

struct ProbeResult {
  int level = 0;
  long events_at_level = 0;
  long censored = 0;        // events without a successor (run ended first)
  double drop_freq = 0;     // unconditional drop frequency at the level
  std::vector<ProbeCell> cells;
  bool slope_fitted = false;
  double slope = 0;               // log-log exponent over the scaling region
  long slope_points = 0;
  bool consistent_supercritical = false;  // slope > thresholds.slope_min
  double wall_ms = 0;
};

/// Empirical frequency, over ladder events sitting at gap level 3^-level, of
/// {next event is a drop AND it arrives within eps}, for each eps.
ProbeResult ladder_decay_probe(const ExperimentConfig& config, int level,
                               const std::vector<double>& eps, int threads);

io::Table probe_table(const ProbeResult& result);

}  // namespace srde

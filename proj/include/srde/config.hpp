#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srde/basis.hpp"
#include "srde/field.hpp"
#include "srde/forcing.hpp"
#include "srde/noise.hpp"
#include "srde/solver.hpp"

namespace srde {

/// Rejection of a bad experiment description; the CLI maps this to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BasisConfig {
  int modes = 64;
  int grid = 256;
};

struct NoiseConfig {
  std::string preset = "trace";  // trace | white | custom | off
  double theta = 0.0;            // 0 = preset default
  double rho = 2.0;              // custom only; "inf" accepted in JSON
  std::vector<double> lambda;    // custom only, length = basis modes
};

struct ForcingConfig {
  double beta = 2.0;
  double gamma = 0.0;
  double c0 = 0.5;
  double sigma_scale = 1.0;
  double drift_scale = 1.0;
};

struct InitialConfig {
  std::string profile = "eigenmode";  // eigenmode | plateau | custom
  double amplitude = 0.5;
  double width = 0.5;            // plateau only
  std::vector<double> values;    // custom only, length = basis grid
};

struct RunConfig {
  double t_end = 5.0;
  double dt_base = 1e-3;
  double kappa = 0.1;
  double dt_min = 1e-9;
  bool adaptive = true;
  int cutoff_level = 12;
  long max_steps = 20'000'000;
  int sample_stride = 10;
  bool record_convolution = false;
};

struct SweepConfig {
  std::vector<double> beta;   // empty -> singleton from forcing
  std::vector<double> gamma;
  std::vector<double> theta;  // empty -> singleton from noise
  long trials = 200;
};

struct ProbeConfig {
  int level = 3;
  std::vector<double> eps = {0.01, 0.02, 0.05, 0.1, 0.2};
};

struct SdeConfig {
  std::vector<double> beta = {0.5, 1.0, 2.0};
  std::vector<double> gamma = {0.0, 0.25, 0.5};
  double x0 = 0.5;
  double eps_low = 0.05;
  std::vector<double> eps_list;  // empty -> {eps_low}
  double b_high = 1.0;
  double kappa = 0.25;
  double dt_cap = 2e-4;
  long trials = 10'000;
};

/// Statistical acceptance knobs; thresholds live here, not in code.
struct ThresholdsConfig {
  double agreement_se = 3.0;  // MC vs scale-function consistency band
  double slope_min = 1.0;     // probe log-log slope consistent with q > 1
  long min_events = 5;        // per-epsilon floor below which a cell is inconclusive
  double phase_gap_se = 5.0;  // required separation between extreme sweep cells
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "csv";  // csv | jsonl
  bool traces = false;
};

struct ExperimentConfig {
  BasisConfig basis;
  NoiseConfig noise;
  ForcingConfig forcing;
  InitialConfig initial;
  RunConfig run;
  SweepConfig sweep;
  ProbeConfig probe;
  SdeConfig sde;
  ThresholdsConfig thresholds;
  OutputConfig output;
  std::uint64_t seed = 20240001;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;  // canonical: every field, resolved values
  std::string digest() const;     // FNV-1a hex of the canonical form

  /// throws ConfigError on anything a run could not honour
  void validate() const;

  /// non-fatal diagnostics (spectrum summability looks divergent or slow at
  /// this truncation); the CLI prints them, runs proceed
  std::vector<std::string> warnings() const;

  SineBasis<double> make_basis() const;
  NoiseSpectrum make_spectrum(double theta_override = 0.0) const;
  Forcing<double> make_forcing(double beta_override = 0.0, double gamma_override = -1.0) const;
  FieldState make_initial(const SineBasis<double>& basis) const;
  SolverSettings solver_settings() const;
};

/// CLI/env/hardware thread-count resolution (SRDE_THREADS, then hardware).
int resolve_threads(int requested);

}  // namespace srde

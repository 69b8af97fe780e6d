#include "srde/config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

namespace srde {

namespace {

double rho_from_json(const nlohmann::json& j, double fallback) {
  if (!j.is_object() || !j.contains("rho")) return fallback;
  const auto& v = j.at("rho");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return NoiseSpectrum::rho_infinity;
    throw ConfigError("noise.rho: unrecognised string '" + s + "'");
  }
  return v.get<double>();
}

nlohmann::json rho_to_json(double rho) {
  if (std::isinf(rho)) return "inf";
  return rho;
}

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.is_object()) return fallback;
  return j.value(key, fallback);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  const auto basis = j.value("basis", nlohmann::json::object());
  c.basis.modes = field(basis, "modes", c.basis.modes);
  c.basis.grid = field(basis, "grid", c.basis.grid);

  const auto noise = j.value("noise", nlohmann::json::object());
  c.noise.preset = field(noise, "preset", c.noise.preset);
  c.noise.theta = field(noise, "theta", c.noise.theta);
  c.noise.rho = rho_from_json(noise, c.noise.rho);
  c.noise.lambda = field(noise, "lambda", c.noise.lambda);

  const auto forcing = j.value("forcing", nlohmann::json::object());
  c.forcing.beta = field(forcing, "beta", c.forcing.beta);
  c.forcing.gamma = field(forcing, "gamma", c.forcing.gamma);
  c.forcing.c0 = field(forcing, "c0", c.forcing.c0);
  c.forcing.sigma_scale = field(forcing, "sigma_scale", c.forcing.sigma_scale);
  c.forcing.drift_scale = field(forcing, "drift_scale", c.forcing.drift_scale);

  const auto initial = j.value("initial", nlohmann::json::object());
  c.initial.profile = field(initial, "profile", c.initial.profile);
  c.initial.amplitude = field(initial, "amplitude", c.initial.amplitude);
  c.initial.width = field(initial, "width", c.initial.width);
  c.initial.values = field(initial, "values", c.initial.values);

  const auto run = j.value("run", nlohmann::json::object());
  c.run.t_end = field(run, "t_end", c.run.t_end);
  c.run.dt_base = field(run, "dt_base", c.run.dt_base);
  c.run.kappa = field(run, "kappa", c.run.kappa);
  c.run.dt_min = field(run, "dt_min", c.run.dt_min);
  c.run.adaptive = field(run, "adaptive", c.run.adaptive);
  c.run.cutoff_level = field(run, "cutoff_level", c.run.cutoff_level);
  c.run.max_steps = field(run, "max_steps", c.run.max_steps);
  c.run.sample_stride = field(run, "sample_stride", c.run.sample_stride);
  c.run.record_convolution = field(run, "record_convolution", c.run.record_convolution);

  const auto sweep = j.value("sweep", nlohmann::json::object());
  c.sweep.beta = field(sweep, "beta", c.sweep.beta);
  c.sweep.gamma = field(sweep, "gamma", c.sweep.gamma);
  c.sweep.theta = field(sweep, "theta", c.sweep.theta);
  c.sweep.trials = field(sweep, "trials", c.sweep.trials);

  const auto probe = j.value("probe", nlohmann::json::object());
  c.probe.level = field(probe, "level", c.probe.level);
  c.probe.eps = field(probe, "eps", c.probe.eps);

  const auto sde = j.value("sde", nlohmann::json::object());
  c.sde.beta = field(sde, "beta", c.sde.beta);
  c.sde.gamma = field(sde, "gamma", c.sde.gamma);
  c.sde.x0 = field(sde, "x0", c.sde.x0);
  c.sde.eps_low = field(sde, "eps_low", c.sde.eps_low);
  c.sde.eps_list = field(sde, "eps_list", c.sde.eps_list);
  c.sde.b_high = field(sde, "b_high", c.sde.b_high);
  c.sde.kappa = field(sde, "kappa", c.sde.kappa);
  c.sde.dt_cap = field(sde, "dt_cap", c.sde.dt_cap);
  c.sde.trials = field(sde, "trials", c.sde.trials);

  const auto thresholds = j.value("thresholds", nlohmann::json::object());
  c.thresholds.agreement_se = field(thresholds, "agreement_se", c.thresholds.agreement_se);
  c.thresholds.slope_min = field(thresholds, "slope_min", c.thresholds.slope_min);
  c.thresholds.min_events = field(thresholds, "min_events", c.thresholds.min_events);
  c.thresholds.phase_gap_se = field(thresholds, "phase_gap_se", c.thresholds.phase_gap_se);

  const auto output = j.value("output", nlohmann::json::object());
  c.output.dir = field(output, "dir", c.output.dir);
  c.output.format = field(output, "format", c.output.format);
  c.output.traces = field(output, "traces", c.output.traces);

  c.seed = j.value("seed", c.seed);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["basis"] = {{"modes", basis.modes}, {"grid", basis.grid}};
  j["noise"] = {{"preset", noise.preset},
                {"theta", noise.theta},
                {"rho", rho_to_json(noise.rho)},
                {"lambda", noise.lambda}};
  j["forcing"] = {{"beta", forcing.beta},
                  {"gamma", forcing.gamma},
                  {"c0", forcing.c0},
                  {"sigma_scale", forcing.sigma_scale},
                  {"drift_scale", forcing.drift_scale}};
  j["initial"] = {{"profile", initial.profile},
                  {"amplitude", initial.amplitude},
                  {"width", initial.width},
                  {"values", initial.values}};
  j["run"] = {{"t_end", run.t_end},
              {"dt_base", run.dt_base},
              {"kappa", run.kappa},
              {"dt_min", run.dt_min},
              {"adaptive", run.adaptive},
              {"cutoff_level", run.cutoff_level},
              {"max_steps", run.max_steps},
              {"sample_stride", run.sample_stride},
              {"record_convolution", run.record_convolution}};
  j["sweep"] = {{"beta", sweep.beta},
                {"gamma", sweep.gamma},
                {"theta", sweep.theta},
                {"trials", sweep.trials}};
  j["probe"] = {{"level", probe.level}, {"eps", probe.eps}};
  j["sde"] = {{"beta", sde.beta},       {"gamma", sde.gamma},     {"x0", sde.x0},
              {"eps_low", sde.eps_low}, {"eps_list", sde.eps_list}, {"b_high", sde.b_high},
              {"kappa", sde.kappa},     {"dt_cap", sde.dt_cap},   {"trials", sde.trials}};
  j["thresholds"] = {{"agreement_se", thresholds.agreement_se},
                     {"slope_min", thresholds.slope_min},
                     {"min_events", thresholds.min_events},
                     {"phase_gap_se", thresholds.phase_gap_se}};
  j["output"] = {{"dir", output.dir}, {"format", output.format}, {"traces", output.traces}};
  j["seed"] = seed;
  return j;
}

std::string ExperimentConfig::digest() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void ExperimentConfig::validate() const {
  try {
    const auto b = make_basis();
    const auto state = make_initial(b);
    if (!(state.sup < 1.0)) throw ConfigError("initial profile has sup-norm >= 1");

    // every sweep cell must be admissible before any trajectory runs
    const std::vector<double> betas = sweep.beta.empty() ? std::vector<double>{forcing.beta}
                                                         : sweep.beta;
    const std::vector<double> gammas = sweep.gamma.empty() ? std::vector<double>{forcing.gamma}
                                                           : sweep.gamma;
    const std::vector<double> thetas = sweep.theta.empty() ? std::vector<double>{0.0}
                                                           : sweep.theta;
    for (double th : thetas) {
      const auto spec = make_spectrum(th);
      if (spec.modes() != basis.modes) throw ConfigError("noise spectrum size mismatch");
    }
    for (double be : betas)
      for (double ga : gammas) (void)make_forcing(be, ga);

    if (run.cutoff_level < 1) throw ConfigError("run.cutoff_level must be >= 1");
    if (!(run.t_end > 0)) throw ConfigError("run.t_end must be > 0");
    if (!(run.dt_base > 0)) throw ConfigError("run.dt_base must be > 0");
    if (!(run.kappa > 0)) throw ConfigError("run.kappa must be > 0");
    if (run.sample_stride < 1) throw ConfigError("run.sample_stride must be >= 1");
    if (sweep.trials < 1) throw ConfigError("sweep.trials must be >= 1");
    if (output.format != "csv" && output.format != "jsonl")
      throw ConfigError("output.format must be csv or jsonl");
    if (probe.level < 1) throw ConfigError("probe.level must be >= 1");
    for (double e : probe.eps)
      if (!(e > 0)) throw ConfigError("probe.eps entries must be > 0");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  const auto b = make_basis();
  const std::vector<double> thetas = sweep.theta.empty() ? std::vector<double>{0.0}
                                                         : sweep.theta;
  for (double th : thetas) {
    const auto spectrum = make_spectrum(th);
    const auto diag = validate_spectrum(b, spectrum);
    char buf[160];
    if (!diag.ok()) {
      std::snprintf(buf, sizeof buf,
                    "noise spectrum (theta=%g) fails the summability check at this truncation "
                    "(tail-block ratios %.3f / %.3f)",
                    spectrum.theta(), diag.lambda_block_ratio, diag.theta_block_ratio);
      out.emplace_back(buf);
    } else if (!diag.clean()) {
      std::snprintf(buf, sizeof buf,
                    "noise spectrum (theta=%g) converges slowly at this truncation "
                    "(tail-block ratios %.3f / %.3f)",
                    spectrum.theta(), diag.lambda_block_ratio, diag.theta_block_ratio);
      out.emplace_back(buf);
    }
  }
  return out;
}

SineBasis<double> ExperimentConfig::make_basis() const {
  try {
    return SineBasis<double>(basis.modes, basis.grid);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

NoiseSpectrum ExperimentConfig::make_spectrum(double theta_override) const {
  const double th = theta_override > 0.0 ? theta_override : noise.theta;
  try {
    if (noise.preset == "trace") {
      auto s = NoiseSpectrum::trace_class(basis.modes);
      if (th > 0.0 && th != s.theta())
        return NoiseSpectrum::custom(s.lambda(), th, 2.0);
      return s;
    }
    if (noise.preset == "white") return NoiseSpectrum::white(basis.modes, th > 0.0 ? th : 0.51);
    if (noise.preset == "off") return NoiseSpectrum::off(basis.modes);
    if (noise.preset == "custom") {
      if (long(noise.lambda.size()) != long(basis.modes))
        throw ConfigError("noise.lambda must have one entry per basis mode");
      Eigen::ArrayXd lam =
          Eigen::Map<const Eigen::ArrayXd>(noise.lambda.data(), long(noise.lambda.size()));
      return NoiseSpectrum::custom(lam, th > 0.0 ? th : 1.0, noise.rho);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("noise.preset must be trace|white|custom|off, got '" + noise.preset + "'");
}

Forcing<double> ExperimentConfig::make_forcing(double beta_override, double gamma_override) const {
  const double be = beta_override > 0.0 ? beta_override : forcing.beta;
  const double ga = gamma_override >= 0.0 ? gamma_override : forcing.gamma;
  try {
    return Forcing<double>(be, ga, forcing.c0, forcing.sigma_scale, forcing.drift_scale);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

FieldState ExperimentConfig::make_initial(const SineBasis<double>& b) const {
  try {
    if (initial.profile == "eigenmode") return profile_eigenmode(b, initial.amplitude);
    if (initial.profile == "plateau")
      return profile_plateau(b, initial.amplitude, initial.width);
    if (initial.profile == "custom") {
      if (long(initial.values.size()) != long(b.grid_size()))
        throw ConfigError("initial.values must have one entry per grid point");
      Eigen::ArrayXd raw =
          Eigen::Map<const Eigen::ArrayXd>(initial.values.data(), long(initial.values.size()));
      return make_state(b, raw);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("initial.profile must be eigenmode|plateau|custom, got '" + initial.profile +
                    "'");
}

SolverSettings ExperimentConfig::solver_settings() const {
  SolverSettings s;
  s.cutoff_level = run.cutoff_level;
  s.t_end = run.t_end;
  s.dt_base = run.dt_base;
  s.kappa = run.kappa;
  s.dt_min = run.dt_min;
  s.adaptive = run.adaptive;
  s.max_steps = run.max_steps;
  s.sample_stride = run.sample_stride;
  s.record_convolution = run.record_convolution;
  return s;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SRDE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

}  // namespace srde

#include "srde/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "srde/config.hpp"
#include "srde/envelope.hpp"
#include "srde/io.hpp"
#include "srde/sde.hpp"
#include "srde/stats.hpp"
#include "srde/sweep.hpp"
#include "srde/version.hpp"

namespace srde {

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir;
  std::string format;
};

ExperimentConfig resolve_config(const GlobalOpts& g) {
  ExperimentConfig cfg =
      g.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
  if (!g.format.empty()) cfg.output.format = g.format;
  if (cfg.output.format != "csv" && cfg.output.format != "jsonl")
    throw ConfigError("--format must be csv or jsonl");
  for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
  return cfg;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command, double wall_ms,
                    int threads, const std::vector<std::string>& files) {
  nlohmann::json m;
  m["command"] = command;
  m["config"] = cfg.to_json();
  m["config_digest"] = cfg.digest();
  m["seed"] = cfg.seed;
  m["version"] = version_string;
  m["threads"] = threads;
  m["wall_ms"] = wall_ms;
  m["files"] = files;
  io::write_text(cfg.output.dir + "/manifest.json", m.dump(2) + "\n");
}

double wall_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_simulate(const ExperimentConfig& cfg, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  io::prepare_out_dir(cfg.output.dir);
  const auto basis = cfg.make_basis();
  auto rec = run_trajectory(basis, cfg.make_forcing(), cfg.make_spectrum(),
                            cfg.make_initial(basis), cfg.solver_settings(), cfg.seed);
  rec.config_digest = cfg.digest();

  io::Table trace;
  trace.columns = {"t", "gap", "sup"};
  if (!rec.conv_sup.empty()) trace.columns.push_back("conv_sup");
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    nlohmann::json row;
    row["t"] = rec.times[i];
    row["gap"] = rec.gaps[i];
    row["sup"] = 1.0 - rec.gaps[i];
    if (!rec.conv_sup.empty()) row["conv_sup"] = rec.conv_sup[i];
    trace.rows.push_back(std::move(row));
  }

  io::Table summary;
  summary.columns = {"status", "steps",         "final_time", "min_gap",
                     "seed",   "config_digest", "ladder_events", "samples"};
  for (std::size_t n = 0; n < rec.crossing_times.size(); ++n)
    summary.columns.push_back("T" + std::to_string(n + 1));
  nlohmann::json row;
  row["status"] = to_string(rec.status);
  row["steps"] = rec.steps;
  row["final_time"] = rec.final_time;
  row["min_gap"] = rec.min_gap;
  row["seed"] = rec.key;
  row["config_digest"] = rec.config_digest;
  row["ladder_events"] = long(rec.ladder.size());
  row["samples"] = long(rec.times.size());
  for (std::size_t n = 0; n < rec.crossing_times.size(); ++n)
    row["T" + std::to_string(n + 1)] = rec.crossing_times[n];
  summary.rows.push_back(std::move(row));

  std::vector<std::string> files;
  files.push_back(io::write_table(trace, cfg.output.dir, "trace", cfg.output.format));
  files.push_back(io::write_table(summary, cfg.output.dir, "trajectory", cfg.output.format));
  write_manifest(cfg, "simulate", wall_since(t0), threads, files);
  std::cout << "simulate: status=" << to_string(rec.status) << " steps=" << rec.steps
            << " min_gap=" << io::format_double(rec.min_gap) << " samples=" << rec.times.size()
            << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  io::prepare_out_dir(cfg.output.dir);
  const auto result = run_sweep(cfg, threads);
  std::vector<std::string> files;
  files.push_back(io::write_table(sweep_table(result), cfg.output.dir, "sweep", cfg.output.format));
  if (cfg.output.traces) {
    // one representative gap trace per cell (trial 0), for external plotting
    io::prepare_out_dir(cfg.output.dir + "/traces");
    auto settings = cfg.solver_settings();
    settings.sample_stride = std::max(settings.sample_stride, 10);
    for (const auto& cell : enumerate_cells(cfg)) {
      const auto rec = run_cell_trial(cfg, cell, 0, settings);
      io::Table trace;
      trace.columns = {"t", "gap"};
      for (std::size_t i = 0; i < rec.times.size(); ++i) {
        nlohmann::json row;
        row["t"] = rec.times[i];
        row["gap"] = rec.gaps[i];
        trace.rows.push_back(std::move(row));
      }
      files.push_back(io::write_table(trace, cfg.output.dir + "/traces",
                                      "cell_" + std::to_string(cell.index), cfg.output.format));
    }
  }
  write_manifest(cfg, "sweep", wall_since(t0), threads, files);
  for (const auto& c : result.cells)
    std::cout << "cell " << c.params.index << ": beta=" << io::format_double(c.params.beta)
              << " gamma=" << io::format_double(c.params.gamma)
              << " eta=" << io::format_double(c.params.eta)
              << " margin=" << io::format_double(c.params.margin) << " freq="
              << io::format_double(c.freq) << " (" << c.blowups << "/" << c.trials << ")\n";
  return 0;
}

int cmd_sde_exit(const ExperimentConfig& cfg, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  io::prepare_out_dir(cfg.output.dir);
  io::Table t;
  t.columns = {"beta", "gamma",   "x0",     "eps_low",  "b_high",    "dt",
               "trials", "scale_prob", "scale_log_prob", "mc_prob", "mc_se", "hits_low",
               "hits_high", "undecided", "abs_diff", "diff_over_se", "agree"};
  bool all_agree = true;
  std::size_t cell = 0;
  const std::vector<double> eps_grid =
      cfg.sde.eps_list.empty() ? std::vector<double>{cfg.sde.eps_low} : cfg.sde.eps_list;
  for (double eps : eps_grid)
    for (double ga : cfg.sde.gamma)
      for (double be : cfg.sde.beta) {
        SdeProblem pb;
        pb.beta = be;
        pb.gamma = ga;
        pb.x0 = cfg.sde.x0;
        pb.eps_low = eps;
        pb.b_high = cfg.sde.b_high;
        const double dt = std::min(suggested_dt(pb, cfg.sde.kappa), cfg.sde.dt_cap);
        const auto scale = exit_prob_scale(pb);
        McOptions opt;
        opt.threads = threads;
        const auto mc = exit_prob_mc(pb, dt, cfg.sde.trials, rng::derive_key(cfg.seed, 1, cell), opt);
        const double band =
            std::max({mc.std_err, adjusted_se(mc.hits_low, mc.trials), 1.0 / double(mc.trials)});
        const double diff = std::abs(mc.prob - scale.prob);
        const bool agree = diff <= cfg.thresholds.agreement_se * band;
        all_agree = all_agree && agree;
        nlohmann::json row;
        row["beta"] = be;
        row["gamma"] = ga;
        row["x0"] = pb.x0;
        row["eps_low"] = pb.eps_low;
        row["b_high"] = pb.b_high;
        row["dt"] = dt;
        row["trials"] = mc.trials;
        row["scale_prob"] = scale.prob;
        row["scale_log_prob"] = scale.log_prob;
        row["mc_prob"] = mc.prob;
        row["mc_se"] = mc.std_err;
        row["hits_low"] = mc.hits_low;
        row["hits_high"] = mc.hits_high;
        row["undecided"] = mc.undecided;
        row["abs_diff"] = diff;
        row["diff_over_se"] = band > 0 ? diff / band : 0.0;
        row["agree"] = agree;
        t.rows.push_back(std::move(row));
        std::cout << "sde-exit: beta=" << io::format_double(be) << " gamma=" << io::format_double(ga)
                  << " scale=" << io::format_double(scale.prob)
                  << " mc=" << io::format_double(mc.prob) << (agree ? " [agree]" : " [DISAGREE]")
                  << "\n";
        ++cell;
      }
  std::vector<std::string> files;
  files.push_back(io::write_table(t, cfg.output.dir, "sde_exit", cfg.output.format));
  write_manifest(cfg, "sde-exit", wall_since(t0), threads, files);
  return all_agree ? 0 : 2;
}

int cmd_check_condition(const ExperimentConfig& cfg, int threads, double beta, double gamma,
                        std::optional<double> eta_opt) {
  const auto t0 = std::chrono::steady_clock::now();
  io::prepare_out_dir(cfg.output.dir);
  const double eta = eta_opt ? *eta_opt : cfg.make_spectrum().eta();
  const auto rep = check_condition(beta, gamma, eta);
  io::Table t;
  t.columns = {"beta", "gamma", "eta", "margin", "satisfied"};
  nlohmann::json row;
  row["beta"] = beta;
  row["gamma"] = gamma;
  row["eta"] = eta;
  row["margin"] = rep.margin;
  row["satisfied"] = rep.satisfied;
  t.rows.push_back(std::move(row));
  std::vector<std::string> files;
  files.push_back(io::write_table(t, cfg.output.dir, "condition", cfg.output.format));
  write_manifest(cfg, "check-condition", wall_since(t0), threads, files);
  std::cout << "condition: gamma+1 < (1-eta)(beta+1)/2 is "
            << (rep.satisfied ? "satisfied" : "violated")
            << " (margin=" << io::format_double(rep.margin) << ")\n";
  return 0;
}

int cmd_verify_lemma(const ExperimentConfig& cfg, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  io::prepare_out_dir(cfg.output.dir);
  const auto basis = cfg.make_basis();
  const std::vector<double> betas =
      cfg.sweep.beta.empty() ? std::vector<double>{cfg.forcing.beta} : cfg.sweep.beta;

  io::Table t;
  t.columns = {"mode",        "beta",       "e0",      "samples", "violations",
               "min_margin",  "min_gap",    "next_floor", "windows", "skipped_short",
               "ok"};
  bool all_ok = true;
  const int N = GapEnvelope<double>::minimal_level(cfg.forcing.c0);
  const double e0 = std::pow(3.0, -double(N));
  const double next_floor = std::pow(3.0, -double(N + 1));

  for (double be : betas) {
    // noise-free: gap must dominate the envelope re-based at t = 0, compared
    // while the envelope itself stays inside the deep region gap <= 3^-N
    // (beyond that no instance of the bound can have its hypotheses hold)
    auto settings = cfg.solver_settings();
    settings.record_convolution = true;
    const auto forcing = cfg.make_forcing(be);
    const auto initial = profile_eigenmode(basis, 1.0 - e0);
    const auto spectrum = NoiseSpectrum::off(basis.modes());
    const auto rec = run_trajectory(basis, forcing, spectrum, initial, settings, cfg.seed);
    GapEnvelope<double> env(rec.gaps.front(), be, cfg.forcing.drift_scale, cfg.forcing.c0);
    long violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.gaps.size(); ++i) {
      const double env_value = env(rec.times[i]);
      if (env_value > e0) break;
      const double margin = rec.gaps[i] - env_value;
      min_margin = std::min(min_margin, margin);
      if (margin < 0.0) ++violations;
    }
    const bool ok = violations == 0 && rec.min_gap > next_floor;
    all_ok = all_ok && ok;
    nlohmann::json row;
    row["mode"] = "noise_free";
    row["beta"] = be;
    row["e0"] = rec.gaps.front();
    row["samples"] = long(rec.gaps.size());
    row["violations"] = violations;
    row["min_margin"] = min_margin;
    row["min_gap"] = rec.min_gap;
    row["next_floor"] = next_floor;
    row["ok"] = ok;
    t.rows.push_back(std::move(row));
    std::cout << "verify-lemma noise-free beta=" << io::format_double(be)
              << (ok ? " [ok]" : " [VIOLATED]") << " min_margin=" << io::format_double(min_margin)
              << "\n";

    // audited run with the configured noise: report window violations
    if (cfg.noise.preset != "off") {
      const auto noisy =
          run_trajectory(basis, forcing, cfg.make_spectrum(), cfg.make_initial(basis), settings,
                         cfg.seed);
      const auto audit = audit_envelope(noisy, be, cfg.forcing.drift_scale, cfg.forcing.c0);
      nlohmann::json arow;
      arow["mode"] = "audit";
      arow["beta"] = be;
      arow["e0"] = noisy.gaps.front();
      arow["samples"] = long(noisy.gaps.size());
      arow["violations"] = audit.violations;
      arow["min_margin"] = audit.windows.empty() ? 0.0 : audit.min_margin;
      arow["min_gap"] = noisy.min_gap;
      arow["next_floor"] = next_floor;
      arow["windows"] = long(audit.windows.size());
      arow["skipped_short"] = audit.skipped_short;
      arow["ok"] = audit.clean();
      t.rows.push_back(std::move(arow));
      std::cout << "verify-lemma audit beta=" << io::format_double(be) << " windows="
                << audit.windows.size() << " violations=" << audit.violations
                << (audit.vacuous() ? " (no qualifying window)" : "") << "\n";
    }
  }
  std::vector<std::string> files;
  files.push_back(io::write_table(t, cfg.output.dir, "lemma", cfg.output.format));
  write_manifest(cfg, "verify-lemma", wall_since(t0), threads, files);
  return all_ok ? 0 : 2;
}

int cmd_factorization(const ExperimentConfig& cfg, int threads, double alpha, long steps,
                      double horizon) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  io::prepare_out_dir(cfg.output.dir);
  if (steps < 2 || steps % 2 != 0) throw ConfigError("factorization-check: steps must be even");
  if (!(horizon > 0)) throw ConfigError("factorization-check: horizon must be > 0");

  const auto basis = cfg.make_basis();
  const auto spectrum = cfg.make_spectrum();
  auto settings = cfg.solver_settings();
  settings.adaptive = false;
  settings.record_path = true;
  settings.sample_stride = std::max<long>(1, steps / 4);
  settings.cutoff_level = std::max(settings.cutoff_level, 8);
  settings.t_end = horizon;

  // freeze the fine path (2x steps), coarsen for the base resolution
  const long fine_steps = 2 * steps;
  settings.dt_base = horizon / double(fine_steps);
  settings.max_steps = fine_steps + 8;
  const auto rec = run_trajectory(basis, cfg.make_forcing(), spectrum, cfg.make_initial(basis),
                                  settings, cfg.seed);
  if (rec.path.steps() != fine_steps)
    throw std::runtime_error("factorization-check: path ended early (blow-up before horizon)");
  const FrozenPath base = coarsen(rec.path);

  io::Table t;
  t.columns = {"steps", "dt", "alpha", "discrepancy"};
  double disc[2];
  const FrozenPath* paths[2] = {&base, &rec.path};
  for (int i = 0; i < 2; ++i) {
    const auto direct = convolution_direct(basis, *paths[i]);
    const auto fact = convolution_factorized(basis, *paths[i], alpha, spectrum.eta());
    disc[i] = sup_discrepancy(basis, direct, fact);
    nlohmann::json row;
    row["steps"] = paths[i]->steps();
    row["dt"] = paths[i]->dt;
    row["alpha"] = alpha;
    row["discrepancy"] = disc[i];
    t.rows.push_back(std::move(row));
    std::cout << "factorization: steps=" << paths[i]->steps()
              << " discrepancy=" << io::format_double(disc[i]) << "\n";
  }
  std::cout << "factorization: refinement " << (disc[1] < disc[0] ? "improves" : "DEGRADES")
            << " the identity\n";
  std::vector<std::string> files;
  files.push_back(io::write_table(t, cfg.output.dir, "factorization", cfg.output.format));
  write_manifest(cfg, "factorization-check", wall_since(t0), threads, files);
  return 0;
}

int cmd_ladder_probe(const ExperimentConfig& cfg, int threads, int level) {
  const auto t0 = std::chrono::steady_clock::now();
  io::prepare_out_dir(cfg.output.dir);
  const int lvl = level > 0 ? level : cfg.probe.level;
  const auto result = ladder_decay_probe(cfg, lvl, cfg.probe.eps, threads);
  std::vector<std::string> files;
  files.push_back(io::write_table(probe_table(result), cfg.output.dir, "ladder_probe",
                                  cfg.output.format));
  write_manifest(cfg, "ladder-probe", wall_since(t0), threads, files);
  std::cout << "ladder-probe: level=" << result.level << " events=" << result.events_at_level
            << " censored=" << result.censored << " drop_freq="
            << io::format_double(result.drop_freq);
  if (result.slope_fitted)
    std::cout << " slope=" << io::format_double(result.slope)
              << (result.consistent_supercritical ? " (consistent with q > 1)" : "");
  std::cout << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"srde-lab: constrained stochastic reaction-diffusion simulation laboratory"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON experiment description");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
  app.add_option("--threads", g.threads, "worker threads (default: SRDE_THREADS or hardware)");
  app.add_option("--out-dir", g.out_dir, "output directory override");
  app.add_option("--format", g.format, "table format: csv or jsonl");

  auto* simulate = app.add_subcommand("simulate", "run one trajectory and emit its trace");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the parameter grid");
  auto* sde = app.add_subcommand("sde-exit", "scalar-SDE exit probabilities, scale vs MC");
  auto* cond = app.add_subcommand("check-condition", "evaluate the growth condition");
  double cc_beta = 1.0, cc_gamma = 0.0, cc_eta = -1.0;
  cond->add_option("--beta", cc_beta, "drift blow-up exponent")->required();
  cond->add_option("--gamma", cc_gamma, "noise blow-up exponent")->required();
  cond->add_option("--eta", cc_eta, "roughness (default: from the configured noise)");
  auto* lemma = app.add_subcommand("verify-lemma", "noise-free and audited envelope checks");
  auto* fact = app.add_subcommand("factorization-check",
                                  "direct vs factorized stochastic convolution");
  double fc_alpha = 0.3;
  long fc_steps = 2000;
  double fc_horizon = 0.1;
  fact->add_option("--alpha", fc_alpha, "factorization exponent in (0,(1-eta)/2)");
  fact->add_option("--steps", fc_steps, "base time-grid resolution (even)");
  fact->add_option("--horizon", fc_horizon, "frozen-path time horizon");
  auto* probe = app.add_subcommand("ladder-probe", "fast-drop frequency decay across eps");
  int probe_level = 0;
  probe->add_option("--level", probe_level, "gap level 3^-n to condition on");

  std::vector<std::string> argv(args);
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (seed_opt->count() > 0) g.seed = seed_value;
    const ExperimentConfig cfg = resolve_config(g);
    const int threads = resolve_threads(g.threads);
    if (*simulate) return cmd_simulate(cfg, threads);
    if (*sweep) return cmd_sweep(cfg, threads);
    if (*sde) return cmd_sde_exit(cfg, threads);
    if (*cond)
      return cmd_check_condition(cfg, threads, cc_beta, cc_gamma,
                                 cc_eta >= 0 ? std::optional<double>(cc_eta) : std::nullopt);
    if (*lemma) return cmd_verify_lemma(cfg, threads);
    if (*fact) return cmd_factorization(cfg, threads, fc_alpha, fc_steps, fc_horizon);
    if (*probe) return cmd_ladder_probe(cfg, threads, probe_level);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace srde

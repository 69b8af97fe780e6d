#include "srde/sweep.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "srde/envelope.hpp"
#include "srde/stats.hpp"

namespace srde {

namespace {

struct CellSpec {
  CellParams params;
  Forcing<double> forcing;
  NoiseSpectrum spectrum;
};

// cells are keyed by their parameter values, not their grid position, so a
// cell's trajectories do not depend on which other cells exist
std::uint64_t cell_tag(std::uint64_t master, const CellParams& p) {
  const std::uint64_t h =
      rng::hash_at(rng::mix64(master), std::bit_cast<std::uint64_t>(p.beta),
                   std::bit_cast<std::uint64_t>(p.gamma));
  return rng::hash_at(h, std::bit_cast<std::uint64_t>(p.theta), 0);
}

std::vector<CellSpec> build_cells(const ExperimentConfig& cfg) {
  const std::vector<double> betas =
      cfg.sweep.beta.empty() ? std::vector<double>{cfg.forcing.beta} : cfg.sweep.beta;
  const std::vector<double> gammas =
      cfg.sweep.gamma.empty() ? std::vector<double>{cfg.forcing.gamma} : cfg.sweep.gamma;
  const std::vector<double> thetas =
      cfg.sweep.theta.empty() ? std::vector<double>{0.0} : cfg.sweep.theta;

  std::vector<CellSpec> cells;
  std::size_t index = 0;
  for (double th : thetas)
    for (double ga : gammas)
      for (double be : betas) {
        auto spectrum = cfg.make_spectrum(th);
        auto forcing = cfg.make_forcing(be, ga);
        CellParams p;
        p.index = index++;
        p.beta = be;
        p.gamma = ga;
        p.theta = spectrum.theta();
        p.eta = spectrum.eta();
        const auto cond = check_condition(be, ga, spectrum.eta());
        p.margin = cond.margin;
        p.condition_ok = cond.satisfied;
        cells.push_back(CellSpec{p, std::move(forcing), std::move(spectrum)});
      }
  return cells;
}

struct TrialOutcome {
  bool failed = false;
  bool exhausted = false;
  TerminalStatus status = TerminalStatus::completed;
  double min_gap = 1.0;
  long steps = 0;
  std::vector<double> crossings;
};

template <typename Work>
void parallel_tasks(long count, int threads, Work&& work) {
  if (threads <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<long> next{0};
  auto loop = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      work(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<long>(threads, count);
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<CellParams> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellParams> out;
  for (const auto& cell : build_cells(cfg)) out.push_back(cell.params);
  return out;
}

TrajectoryRecord run_cell_trial(const ExperimentConfig& cfg, const CellParams& cell, long trial,
                                const SolverSettings& settings) {
  const auto basis = cfg.make_basis();
  const auto initial = cfg.make_initial(basis);
  const auto forcing = cfg.make_forcing(cell.beta, cell.gamma);
  const auto spectrum = cfg.make_spectrum(cell.theta);
  const std::uint64_t key = rng::hash_at(cell_tag(cfg.seed, cell), std::uint64_t(trial), 0);
  auto rec = run_trajectory(basis, forcing, spectrum, initial, settings, key);
  rec.config_digest = cfg.digest();
  return rec;
}

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const auto basis = cfg.make_basis();
  const auto initial = cfg.make_initial(basis);
  const auto settings = cfg.solver_settings();
  const auto cells = build_cells(cfg);
  const long trials = cfg.sweep.trials;

  std::vector<TrialOutcome> outcomes(cells.size() * std::size_t(trials));
  parallel_tasks(long(outcomes.size()), threads, [&](long task) {
    const std::size_t cell = std::size_t(task) / std::size_t(trials);
    const long trial = task % trials;
    TrialOutcome& out = outcomes[std::size_t(task)];
    try {
      const std::uint64_t key =
          rng::hash_at(cell_tag(cfg.seed, cells[cell].params), std::uint64_t(trial), 0);
      const auto rec =
          run_trajectory(basis, cells[cell].forcing, cells[cell].spectrum, initial, settings, key);
      out.status = rec.status;
      out.exhausted = rec.budget_exhausted;
      out.min_gap = rec.min_gap;
      out.steps = rec.steps;
      out.crossings = rec.crossing_times;
    } catch (const std::exception&) {
      out.failed = true;
    }
  });

  SweepResult result;
  result.trials_per_cell = trials;
  result.cutoff_level = cfg.run.cutoff_level;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellStats s;
    s.params = cells[c].params;
    s.trials = trials;
    s.mean_crossing.assign(std::size_t(cfg.run.cutoff_level),
                           std::numeric_limits<double>::quiet_NaN());
    s.crossing_count.assign(std::size_t(cfg.run.cutoff_level), 0);
    std::vector<double> crossing_sum(std::size_t(cfg.run.cutoff_level), 0.0);
    std::vector<double> min_gaps;
    min_gaps.reserve(std::size_t(trials));
    double min_gap_total = 0.0;
    for (long t = 0; t < trials; ++t) {
      const auto& out = outcomes[c * std::size_t(trials) + std::size_t(t)];
      if (out.failed) {
        ++s.failures;
        continue;
      }
      if (out.status != TerminalStatus::completed) ++s.blowups;
      if (out.status == TerminalStatus::cutoff_saturated) ++s.saturated;
      if (out.exhausted) ++s.exhausted;
      s.steps_total += out.steps;
      min_gaps.push_back(out.min_gap);
      min_gap_total += out.min_gap;
      for (std::size_t n = 0; n < out.crossings.size() && n < crossing_sum.size(); ++n)
        if (!std::isnan(out.crossings[n])) {
          crossing_sum[n] += out.crossings[n];
          ++s.crossing_count[n];
        }
    }
    const long counted = trials - s.failures;
    s.freq = counted > 0 ? double(s.blowups) / double(counted) : 0.0;
    s.se = adjusted_se(s.blowups, counted);
    const auto ci = wilson_interval(s.blowups, counted);
    s.ci_lo = ci.lo;
    s.ci_hi = ci.hi;
    if (!min_gaps.empty()) {
      s.min_gap_mean = min_gap_total / double(min_gaps.size());
      s.min_gap_q10 = quantile(min_gaps, 0.10);
      s.min_gap_med = quantile(min_gaps, 0.50);
      s.min_gap_q90 = quantile(min_gaps, 0.90);
    }
    for (std::size_t n = 0; n < crossing_sum.size(); ++n)
      if (s.crossing_count[n] > 0) s.mean_crossing[n] = crossing_sum[n] / double(s.crossing_count[n]);
    result.cells.push_back(std::move(s));
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

io::Table sweep_table(const SweepResult& result) {
  io::Table t;
  t.columns = {"cell",     "beta",     "gamma",      "theta",      "eta",
               "margin",   "condition", "trials",    "blowups",    "freq",
               "se",       "ci_lo",    "ci_hi",      "saturated",  "exhausted",
               "failures", "min_gap_mean", "min_gap_q10", "min_gap_med", "min_gap_q90"};
  for (int n = 1; n <= result.cutoff_level; ++n) {
    t.columns.push_back("mean_T" + std::to_string(n));
    t.columns.push_back("count_T" + std::to_string(n));
  }
  for (const auto& c : result.cells) {
    nlohmann::json row;
    row["cell"] = c.params.index;
    row["beta"] = c.params.beta;
    row["gamma"] = c.params.gamma;
    row["theta"] = c.params.theta;
    row["eta"] = c.params.eta;
    row["margin"] = c.params.margin;
    row["condition"] = c.params.condition_ok;
    row["trials"] = c.trials;
    row["blowups"] = c.blowups;
    row["freq"] = c.freq;
    row["se"] = c.se;
    row["ci_lo"] = c.ci_lo;
    row["ci_hi"] = c.ci_hi;
    row["saturated"] = c.saturated;
    row["exhausted"] = c.exhausted;
    row["failures"] = c.failures;
    row["min_gap_mean"] = c.min_gap_mean;
    row["min_gap_q10"] = c.min_gap_q10;
    row["min_gap_med"] = c.min_gap_med;
    row["min_gap_q90"] = c.min_gap_q90;
    for (std::size_t n = 0; n < c.mean_crossing.size(); ++n) {
      row["mean_T" + std::to_string(n + 1)] = c.mean_crossing[n];
      row["count_T" + std::to_string(n + 1)] = c.crossing_count[n];
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ProbeResult ladder_decay_probe(const ExperimentConfig& cfg, int level,
                               const std::vector<double>& eps, int threads) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto basis = cfg.make_basis();
  const auto initial = cfg.make_initial(basis);
  const auto forcing = cfg.make_forcing();
  const auto spectrum = cfg.make_spectrum();
  const auto settings = cfg.solver_settings();

  const int base = GapEnvelope<double>::minimal_level(cfg.forcing.c0);
  if (level < base + 1)
    throw ConfigError("probe level must be >= " + std::to_string(base + 1) +
                      " (one below the ladder entry level)");
  if (eps.empty()) throw ConfigError("probe needs a non-empty eps list");

  struct Transition {
    bool has_successor;
    bool down;
    double duration;
  };
  const long trials = cfg.sweep.trials;
  std::vector<std::vector<Transition>> per_trial;
  per_trial.resize(std::size_t(trials));
  parallel_tasks(trials, threads, [&](long trial) {
    const std::uint64_t key = rng::derive_key(cfg.seed, 0, std::uint64_t(trial));
    const auto rec = run_trajectory(basis, forcing, spectrum, initial, settings, key);
    auto& out = per_trial[std::size_t(trial)];
    for (std::size_t i = 0; i < rec.ladder.size(); ++i) {
      if (rec.ladder[i].level != level) continue;
      if (i + 1 < rec.ladder.size())
        out.push_back({true, rec.ladder[i + 1].down,
                       rec.ladder[i + 1].time - rec.ladder[i].time});
      else
        out.push_back({false, false, 0.0});
    }
  });

  ProbeResult result;
  result.level = level;
  long qualifying = 0, drops = 0;
  for (const auto& v : per_trial)
    for (const auto& tr : v) {
      ++result.events_at_level;
      if (!tr.has_successor) {
        ++result.censored;
        continue;
      }
      ++qualifying;
      if (tr.down) ++drops;
    }
  result.drop_freq = qualifying > 0 ? double(drops) / double(qualifying) : 0.0;

  for (double e : eps) {
    ProbeCell cell;
    cell.eps = e;
    for (const auto& v : per_trial)
      for (const auto& tr : v) {
        if (!tr.has_successor) continue;
        ++cell.qualifying;
        if (tr.down && tr.duration < e) ++cell.fast_drops;
      }
    cell.inconclusive = cell.qualifying < cfg.thresholds.min_events;
    cell.p_hat = cell.qualifying > 0 ? double(cell.fast_drops) / double(cell.qualifying) : 0.0;
    cell.se = adjusted_se(cell.fast_drops, cell.qualifying);
    const auto ci = wilson_interval(cell.fast_drops, cell.qualifying);
    cell.ci_lo = ci.lo;
    cell.ci_hi = ci.hi;
    result.cells.push_back(cell);
  }
  // the power law lives at small eps; cells saturated toward the
  // unconditional drop frequency would flatten the fitted exponent, so the
  // regression keeps the un-saturated half of the range (all positive cells
  // if that leaves fewer than two points)
  const auto collect = [&](double ceiling) {
    std::vector<double> log_eps, log_p;
    for (const auto& cell : result.cells)
      if (!cell.inconclusive && cell.p_hat > 0.0 && cell.p_hat <= ceiling) {
        log_eps.push_back(std::log(cell.eps));
        log_p.push_back(std::log(cell.p_hat));
      }
    return std::pair(log_eps, log_p);
  };
  auto [log_eps, log_p] = collect(0.5 * result.drop_freq);
  if (log_eps.size() < 2) std::tie(log_eps, log_p) = collect(1.0);
  if (log_eps.size() >= 2) {
    const auto fit = fit_line(log_eps, log_p);
    result.slope_fitted = true;
    result.slope = fit.slope;
    result.slope_points = long(log_eps.size());
    result.consistent_supercritical = fit.slope > cfg.thresholds.slope_min;
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

io::Table probe_table(const ProbeResult& result) {
  io::Table t;
  t.columns = {"level",  "eps",   "qualifying", "fast_drops", "p_hat",
               "se",     "ci_lo", "ci_hi",      "inconclusive"};
  for (const auto& c : result.cells) {
    nlohmann::json row;
    row["level"] = result.level;
    row["eps"] = c.eps;
    row["qualifying"] = c.qualifying;
    row["fast_drops"] = c.fast_drops;
    row["p_hat"] = c.p_hat;
    row["se"] = c.se;
    row["ci_lo"] = c.ci_lo;
    row["ci_hi"] = c.ci_hi;
    row["inconclusive"] = c.inconclusive;
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace srde

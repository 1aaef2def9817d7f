#include "lqrpg/experiments.hpp"

#include "lqrpg/ident.hpp"
#include "lqrpg/zeroth.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace lqrpg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<std::int64_t> record_grid(std::int64_t iters,
                                      std::int64_t stride) {
  std::vector<std::int64_t> grid;
  grid.push_back(1);
  for (std::int64_t t = stride; t <= iters; t += stride)
    if (t != 1) grid.push_back(t);
  if (grid.back() != iters) grid.push_back(iters);
  return grid;
}

namespace {

const RunRecord* find_record(const std::vector<RunRecord>& run,
                             std::int64_t t) {
  auto it = std::lower_bound(
      run.begin(), run.end(), t,
      [](const RunRecord& r, std::int64_t v) { return r.iteration < v; });
  if (it == run.end() || it->iteration != t) return nullptr;
  return &*it;
}

}  // namespace

bool destabilized_by(const std::vector<RunRecord>& run, std::int64_t t) {
  if (run.empty()) return false;
  const RunRecord& last = run.back();
  return last.destabilized && last.iteration <= t;
}

double gap_at(const std::vector<RunRecord>& run, std::int64_t t) {
  if (destabilized_by(run, t)) return std::numeric_limits<double>::infinity();
  const RunRecord* rec = find_record(run, t);
  return rec ? rec->gap : std::numeric_limits<double>::quiet_NaN();
}

double cost_at(const std::vector<RunRecord>& run, std::int64_t t) {
  if (destabilized_by(run, t)) return std::numeric_limits<double>::infinity();
  const RunRecord* rec = find_record(run, t);
  return rec ? rec->cost : std::numeric_limits<double>::quiet_NaN();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(y[i])) continue;
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

struct OutputSet {
  std::vector<std::string> paths;
  fs::path dir;

  std::string file(const std::string& name) {
    fs::path p = dir / name;
    paths.push_back(p.string());
    return p.string();
  }

  void discard_all() {
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

CsvTable series_table(const RunMatrix& runs, std::int64_t iters,
                      std::int64_t stride) {
  CsvTable t;
  t.header = {"iteration",     "median_cost", "median_gap",
              "p25_gap",       "p75_gap",     "diverged_fraction",
              "median_samples"};
  for (std::int64_t g : record_grid(iters, stride)) {
    std::vector<double> costs, gaps, samples;
    int diverged = 0;
    for (const auto& run : runs) {
      costs.push_back(cost_at(run, g));
      gaps.push_back(gap_at(run, g));
      if (destabilized_by(run, g)) ++diverged;
      const RunRecord* rec = find_record(run, g);
      if (rec) samples.push_back(static_cast<double>(rec->samples_consumed));
    }
    t.add_row({cell(g), cell(median(costs)), cell(median(gaps)),
               cell(quantile(gaps, 0.25)), cell(quantile(gaps, 0.75)),
               cell(static_cast<double>(diverged) /
                    static_cast<double>(runs.size())),
               cell(samples.empty() ? 0.0 : median(samples))});
  }
  return t;
}

CsvTable finals_table(const RunMatrix& runs) {
  CsvTable t;
  t.header = {"run",          "final_iteration", "final_cost",
              "final_gap",    "destabilized",    "samples_consumed"};
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    if (run.empty()) {
      t.add_row({cell(static_cast<std::int64_t>(r)), cell(std::int64_t(0)),
                 cell(0.0), cell(0.0), cell(false), cell(std::int64_t(0))});
      continue;
    }
    const RunRecord& last = run.back();
    t.add_row({cell(static_cast<std::int64_t>(r)), cell(last.iteration),
               cell(last.cost), cell(last.gap), cell(last.destabilized),
               cell(last.samples_consumed)});
  }
  return t;
}

void write_series(OutputSet& out, const std::string& stem,
                  const RunMatrix& runs, std::int64_t iters,
                  std::int64_t stride) {
  write_csv(series_table(runs, iters, stride), out.file(stem + ".csv"));
  write_csv(finals_table(runs), out.file(stem + "_runs.csv"));
}

void do_constants(const ExperimentConfig& cfg, OutputSet& out) {
  Preset p = cfg.materialize();
  const double c0 = cost(p.sys, p.cost, p.k0);
  const double j0 = cfg.j0 ? *cfg.j0 : cfg.j0_multiplier * c0;
  LevelConstants c = level_constants(p.sys, p.cost, j0);
  CsvTable t;
  t.header = {"j0",     "c_star",  "b_grad", "b_k",        "h",
              "h_sigma", "h_c",    "h_grad", "mu",         "l",
              "r",      "alpha1",  "alpha2", "eps_prime",  "p_theta_prime",
              "p_level", "c_d",    "norm_k_star"};
  t.add_row({cell(c.J0), cell(c.C_star), cell(c.b_grad), cell(c.b_K),
             cell(c.h), cell(c.h_sigma), cell(c.h_C), cell(c.h_grad),
             cell(c.mu), cell(c.L), cell(c.r), cell(c.alpha1), cell(c.alpha2),
             cell(c.eps_prime), cell(c.p_theta_prime), cell(c.p_level),
             cell(c.c_d), cell(c.norm_K_star)});
  write_csv(t, out.file("constants.csv"));
}

void do_oracle_indirect(const ExperimentConfig& cfg, OutputSet& out) {
  CsvTable t;
  t.header = {"iteration", "bias_norm", "variance", "noise_level"};
  std::vector<double> levels = cfg.noise_levels;
  if (levels.empty()) levels = {1e-4};
  std::vector<std::int64_t> points = cfg.eval_points;
  if (points.empty()) points = {100, 1000, 10000};
  std::sort(points.begin(), points.end());

  for (std::size_t li = 0; li < levels.size(); ++li) {
    Preset p = cfg.materialize(levels[li]);
    const Matrix grad_true = exact_gradient(p.sys, p.cost, p.k0);
    const Eigen::Index nx = p.sys.nx();
    const Eigen::Index nu = p.sys.nu();
    const std::int64_t max_n = points.back();

    // gradients[point][stream]
    std::vector<std::vector<Matrix>> grads(points.size());
    for (int s = 0; s < cfg.runs; ++s) {
      RngStream rng(cfg.master_seed,
                    (static_cast<std::uint64_t>(li) << 32) |
                        static_cast<std::uint64_t>(s));
      const CovarianceSampler init(p.sys.sigma_0);
      const CovarianceSampler noise(p.sys.sigma_w);
      const CovarianceSampler dither(p.sys.sigma_e);
      Vector x = init.sample(rng), w(nx), e(nu), xn(nx), d(nx + nu);
      std::vector<Vector> regs, nexts;
      for (std::int64_t tt = 0; tt < cfg.ident.t0; ++tt) {
        Vector u = p.k0.K * x;
        dither.sample(rng, e);
        u += e;
        noise.sample(rng, w);
        xn.noalias() = p.sys.A * x;
        xn.noalias() += p.sys.B * u;
        xn += w;
        d << x, u;
        regs.push_back(d);
        nexts.push_back(xn);
        x = xn;
      }
      RlsState rls = RlsState::batch_init(regs, nexts);
      std::size_t next_point = 0;
      for (std::int64_t i = 1; i <= max_n; ++i) {
        Vector u = p.k0.K * x;
        dither.sample(rng, e);
        u += e;
        noise.sample(rng, w);
        xn.noalias() = p.sys.A * x;
        xn.noalias() += p.sys.B * u;
        xn += w;
        d << x, u;
        rls.update(d, xn);
        x = xn;
        if (next_point < points.size() && i == points[next_point]) {
          try {
            grads[next_point].push_back(
                indirect_oracle(rls, p.sys, p.cost, p.k0).gradient);
          } catch (const ModelInstabilityError&) {
            // skipped sample; the aggregate uses whatever remains
          }
          ++next_point;
        }
      }
    }
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const auto& g = grads[pi];
      if (g.empty()) continue;
      Matrix mean = Matrix::Zero(nu, nx);
      for (const auto& m : g) mean += m;
      mean /= static_cast<double>(g.size());
      double var = 0;
      for (const auto& m : g) var += (m - mean).squaredNorm();
      var /= static_cast<double>(g.size());
      t.add_row({cell(points[pi]), cell((mean - grad_true).norm()), cell(var),
                 cell(levels[li])});
    }
  }
  write_csv(t, out.file("oracle_indirect.csv"));
}

void do_oracle_direct(const ExperimentConfig& cfg, OutputSet& out) {
  CsvTable t;
  t.header = {"v", "bias_norm", "variance", "noise_level"};
  std::vector<double> levels = cfg.noise_levels;
  if (levels.empty()) levels = {1e-4};
  std::vector<double> vs = cfg.v_grid;
  if (vs.empty()) vs = {cfg.zeroth.v};

  for (std::size_t li = 0; li < levels.size(); ++li) {
    Preset p = cfg.materialize(levels[li]);
    const Matrix grad_true = exact_gradient(p.sys, p.cost, p.k0);
    for (std::size_t vi = 0; vi < vs.size(); ++vi) {
      ZeroOrderParams zp{vs[vi], cfg.zeroth.ell, cfg.zeroth.n};
      Matrix mean = Matrix::Zero(p.sys.nu(), p.sys.nx());
      std::vector<Matrix> samples;
      samples.reserve(static_cast<std::size_t>(cfg.runs));
      for (int s = 0; s < cfg.runs; ++s) {
        RngStream rng(cfg.master_seed,
                      (static_cast<std::uint64_t>(li * vs.size() + vi) << 32) |
                          static_cast<std::uint64_t>(s));
        samples.push_back(
            direct_gradient_estimate(p.sys, p.cost, p.k0, zp, rng).gradient);
        mean += samples.back();
      }
      mean /= static_cast<double>(samples.size());
      double var = 0;
      for (const auto& m : samples) var += (m - mean).squaredNorm();
      var /= static_cast<double>(samples.size());
      t.add_row({cell(vs[vi]), cell((mean - grad_true).norm()), cell(var),
                 cell(levels[li])});
    }
  }
  write_csv(t, out.file("oracle_direct.csv"));
}

void do_sgd_synthetic(const ExperimentConfig& cfg, OutputSet& out) {
  Preset p = cfg.materialize();
  RunOptions opts;
  opts.record_stride = cfg.record_stride;
  opts.j0_multiplier = cfg.j0_multiplier;
  opts.j0 = cfg.j0;
  const StepSchedule decaying = cfg.schedule;
  const StepSchedule constant = StepSchedule::constant(cfg.schedule.eta0);
  struct Combo {
    const char* name;
    StepSchedule step;
    double beta;
  };
  const Combo combos[] = {
      {"constant-step_constant-bias", constant, 0.0},
      {"constant-step_vanishing-bias", constant, 0.5},
      {"decaying-step_constant-bias", decaying, 0.0},
      {"decaying-step_vanishing-bias", decaying, 0.5},
  };
  for (const Combo& c : combos) {
    SyntheticBiasSpec bias = cfg.synthetic;
    bias.mean_decay_beta = c.beta;
    RunMatrix runs =
        run_synthetic_biased(p.sys, p.cost, p.k0, c.step, bias, cfg.runs,
                             cfg.iters, cfg.master_seed, opts);
    write_series(out, std::string("sgd_synthetic_") + c.name, runs, cfg.iters,
                 cfg.record_stride);
  }
}

void do_pg_indirect(const ExperimentConfig& cfg, OutputSet& out) {
  Preset p = cfg.materialize();
  RunOptions opts;
  opts.record_stride = cfg.record_stride;
  opts.j0_multiplier = cfg.j0_multiplier;
  opts.j0 = cfg.j0;
  struct Variant {
    const char* name;
    StepSchedule step;
  };
  const Variant variants[] = {
      {"decaying", cfg.schedule},
      {"constant", StepSchedule::constant(cfg.schedule.eta0)},
  };
  for (const Variant& v : variants) {
    RunMatrix runs = run_indirect_pg(p.sys, p.cost, p.k0, v.step, cfg.ident,
                                     cfg.runs, cfg.iters, cfg.master_seed,
                                     opts);
    write_series(out, std::string("pg_indirect_") + v.name, runs, cfg.iters,
                 cfg.record_stride);
  }
}

void do_pg_direct(const ExperimentConfig& cfg, OutputSet& out) {
  Preset p = cfg.materialize();
  RunOptions opts;
  opts.record_stride = cfg.record_stride;
  opts.j0_multiplier = cfg.j0_multiplier;
  opts.j0 = cfg.j0;

  DirectRunParams fixed;
  fixed.adaptive = false;
  fixed.fixed = cfg.zeroth;
  RunMatrix fixed_runs =
      run_direct_pg(p.sys, p.cost, p.k0, StepSchedule::constant(cfg.schedule.eta0),
                    fixed, cfg.runs, cfg.iters, cfg.master_seed, opts);
  write_series(out, "pg_direct_fixed", fixed_runs, cfg.iters,
               cfg.record_stride);

  DirectRunParams adaptive;
  adaptive.adaptive = true;
  adaptive.schedule = cfg.zeroth_schedule;
  RunMatrix adaptive_runs =
      run_direct_pg(p.sys, p.cost, p.k0, cfg.schedule, adaptive, cfg.runs,
                    cfg.iters, cfg.master_seed, opts);
  write_series(out, "pg_direct_adaptive", adaptive_runs, cfg.iters,
               cfg.record_stride);
}

void write_metadata(const ExperimentConfig& cfg, OutputSet& out) {
  const std::string resolved = resolved_config_json(cfg);
  ordered_json meta;
  meta["experiment"] = to_string(cfg.experiment);
  meta["master_seed"] = cfg.master_seed;
  meta["content_hash"] = git_blob_sha1(resolved);
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char ts[32];
  std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  meta["timestamp"] = ts;  // excluded from the hash
  std::vector<std::string> names;
  for (const auto& p : out.paths) names.push_back(fs::path(p).filename());
  meta["outputs"] = names;
  meta["config"] = ordered_json::parse(resolved);
  const std::string path =
      out.file(to_string(cfg.experiment) + ".meta.json");
  std::ofstream f(path, std::ios::binary);
  f << meta.dump(2) << "\n";
  if (!f) throw Error("cannot write metadata " + path);
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  OutputSet out;
  out.dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  try {
    switch (cfg.experiment) {
      case ExperimentId::constants:
        do_constants(cfg, out);
        break;
      case ExperimentId::oracle_indirect:
        do_oracle_indirect(cfg, out);
        break;
      case ExperimentId::oracle_direct:
        do_oracle_direct(cfg, out);
        break;
      case ExperimentId::sgd_synthetic:
        do_sgd_synthetic(cfg, out);
        break;
      case ExperimentId::pg_indirect:
        do_pg_indirect(cfg, out);
        break;
      case ExperimentId::pg_direct:
        do_pg_direct(cfg, out);
        break;
    }
    write_metadata(cfg, out);
  } catch (...) {
    out.discard_all();
    throw;
  }
  return out.paths;
}

}  // namespace lqrpg

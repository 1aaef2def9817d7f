#include "lqrpg/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lqrpg {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(PresetId p) {
  switch (p) {
    case PresetId::scalar: return "scalar";
    case PresetId::benchmark3: return "benchmark3";
    case PresetId::boeing747: return "boeing747";
    case PresetId::custom: return "custom";
  }
  return "?";
}

std::string to_string(ExperimentId e) {
  switch (e) {
    case ExperimentId::oracle_indirect: return "oracle-indirect";
    case ExperimentId::oracle_direct: return "oracle-direct";
    case ExperimentId::sgd_synthetic: return "sgd-synthetic";
    case ExperimentId::pg_indirect: return "pg-indirect";
    case ExperimentId::pg_direct: return "pg-direct";
    case ExperimentId::constants: return "constants";
  }
  return "?";
}

ExperimentId experiment_from_string(const std::string& s) {
  if (s == "oracle-indirect") return ExperimentId::oracle_indirect;
  if (s == "oracle-direct") return ExperimentId::oracle_direct;
  if (s == "sgd-synthetic") return ExperimentId::sgd_synthetic;
  if (s == "pg-indirect") return ExperimentId::pg_indirect;
  if (s == "pg-direct") return ExperimentId::pg_direct;
  if (s == "constants") return ExperimentId::constants;
  throw ConfigError("unknown experiment '" + s + "'");
}

namespace {

PresetId preset_from_string(const std::string& s) {
  if (s == "scalar") return PresetId::scalar;
  if (s == "benchmark3") return PresetId::benchmark3;
  if (s == "boeing747") return PresetId::boeing747;
  if (s == "custom") return PresetId::custom;
  throw ConfigError("unknown preset '" + s + "'");
}

// Fill experiment-specific defaults before overlaying the file contents.
void apply_defaults(ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentId::constants:
      c.runs = 1;
      c.iters = 1;
      break;
    case ExperimentId::oracle_indirect:
      if (c.preset == PresetId::scalar) c.preset = PresetId::benchmark3;
      c.runs = 500;
      c.iters = 10000;
      c.noise_levels = {1e-4, 1e-3};
      c.eval_points = {100,  147,  215,  316,  464,  681, 1000,
                       1468, 2154, 3162, 4642, 6813, 10000};
      break;
    case ExperimentId::oracle_direct:
      if (c.preset == PresetId::scalar) c.preset = PresetId::benchmark3;
      c.runs = 500;
      c.iters = 1;
      c.zeroth = ZeroOrderParams{0.01, 800, 1};
      c.noise_levels = {1e-4, 1e-3};
      c.v_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
      break;
    case ExperimentId::sgd_synthetic:
      if (c.preset == PresetId::scalar) c.preset = PresetId::boeing747;
      c.runs = 100;
      c.iters = 100000;
      c.schedule = StepSchedule::power_floor(0.05, 0.51, 100.0);
      break;
    case ExperimentId::pg_indirect:
      if (c.preset == PresetId::scalar) c.preset = PresetId::boeing747;
      c.runs = 10;
      c.iters = 100000;
      c.schedule = StepSchedule::power_floor(0.05, 0.51, 100.0);
      break;
    case ExperimentId::pg_direct:
      if (c.preset == PresetId::scalar) c.preset = PresetId::boeing747;
      c.runs = 3;
      c.iters = 20000;
      // Desk-scaled divisors; at the full-length horizons the published
      // values (block 40000, divisors 250) apply unchanged via config.
      c.schedule = StepSchedule::power_floor(0.002, 0.51, 50.0);
      c.zeroth = ZeroOrderParams{0.01, 20, 300};
      c.zeroth_schedule = DirectParamSchedule{0.01, 20, 300, 50.0, 4000.0};
      break;
  }
}

Matrix parse_matrix(const json& j, const std::string& field,
                    std::vector<std::string>& problems) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    problems.push_back(field + ": expected a non-empty array of rows");
    return Matrix();
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      problems.push_back(field + ": ragged rows");
      return Matrix();
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        problems.push_back(field + ": non-numeric entry");
        return Matrix();
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j[i][k].get<double>();
    }
  }
  return m;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  std::vector<std::string> problems;
  ExperimentConfig c;
  if (j.contains("experiment")) {
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  }
  if (j.contains("preset")) {
    c.preset = preset_from_string(j.at("preset").get<std::string>());
  }
  apply_defaults(c);
  if (j.contains("preset"))  // defaults must not override an explicit preset
    c.preset = preset_from_string(j.at("preset").get<std::string>());

  static const std::vector<std::string> known = {
      "preset", "experiment", "master_seed", "runs", "iters", "output_dir",
      "record_stride", "j0_multiplier", "j0", "deltas", "schedule",
      "synthetic", "ident", "zeroth", "zeroth_schedule", "noise_levels",
      "v_grid", "eval_points", "custom"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      problems.push_back("unknown field '" + it.key() + "'");
  }

  auto get_num = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) {
      problems.push_back(std::string(key) + ": expected a number");
      return;
    }
    dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  get_num("master_seed", c.master_seed);
  get_num("runs", c.runs);
  get_num("iters", c.iters);
  get_num("record_stride", c.record_stride);
  get_num("j0_multiplier", c.j0_multiplier);
  if (j.contains("j0")) {
    double v = 0;
    get_num("j0", v);
    c.j0 = v;
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

  if (j.contains("deltas")) {
    const auto& d = j.at("deltas");
    if (d.contains("delta1")) c.deltas.delta1 = d.at("delta1").get<double>();
    if (d.contains("delta2")) c.deltas.delta2 = d.at("delta2").get<double>();
    if (d.contains("delta3")) c.deltas.delta3 = d.at("delta3").get<double>();
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("form")) {
      const std::string f = s.at("form").get<std::string>();
      if (f == "constant")
        c.schedule.form = StepSchedule::Form::constant;
      else if (f == "power_floor")
        c.schedule.form = StepSchedule::Form::power_floor;
      else
        problems.push_back("schedule.form: expected 'constant' or 'power_floor'");
    }
    if (s.contains("eta0")) c.schedule.eta0 = s.at("eta0").get<double>();
    if (s.contains("kappa")) c.schedule.kappa = s.at("kappa").get<double>();
    if (s.contains("divisor")) c.schedule.divisor = s.at("divisor").get<double>();
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    if (s.contains("bias_norm"))
      c.synthetic.mean_norm0 = s.at("bias_norm").get<double>();
    if (s.contains("bias_decay_beta"))
      c.synthetic.mean_decay_beta = s.at("bias_decay_beta").get<double>();
    if (s.contains("entry_variance"))
      c.synthetic.entry_variance = s.at("entry_variance").get<double>();
  }
  if (j.contains("ident")) {
    const auto& s = j.at("ident");
    if (s.contains("t0")) c.ident.t0 = s.at("t0").get<std::int64_t>();
    if (s.contains("off_policy"))
      c.ident.off_policy = s.at("off_policy").get<bool>();
    if (s.contains("persistency")) {
      const auto& p = s.at("persistency");
      if (p.contains("N")) c.ident.persistency.N = p.at("N").get<int>();
      if (p.contains("M")) c.ident.persistency.M = p.at("M").get<int>();
      if (p.contains("alpha"))
        c.ident.persistency.alpha = p.at("alpha").get<double>();
    }
  }
  if (j.contains("zeroth")) {
    const auto& s = j.at("zeroth");
    if (s.contains("v")) c.zeroth.v = s.at("v").get<double>();
    if (s.contains("ell")) c.zeroth.ell = s.at("ell").get<std::int64_t>();
    if (s.contains("n")) c.zeroth.n = s.at("n").get<std::int64_t>();
  }
  if (j.contains("zeroth_schedule")) {
    const auto& s = j.at("zeroth_schedule");
    if (s.contains("v0")) c.zeroth_schedule.v0 = s.at("v0").get<double>();
    if (s.contains("ell0"))
      c.zeroth_schedule.ell0 = s.at("ell0").get<std::int64_t>();
    if (s.contains("n0")) c.zeroth_schedule.n0 = s.at("n0").get<std::int64_t>();
    if (s.contains("v_divisor"))
      c.zeroth_schedule.v_divisor = s.at("v_divisor").get<double>();
    if (s.contains("block")) c.zeroth_schedule.block = s.at("block").get<double>();
  }
  if (j.contains("noise_levels"))
    c.noise_levels = j.at("noise_levels").get<std::vector<double>>();
  if (j.contains("v_grid")) c.v_grid = j.at("v_grid").get<std::vector<double>>();
  if (j.contains("eval_points"))
    c.eval_points = j.at("eval_points").get<std::vector<std::int64_t>>();

  if (j.contains("custom")) {
    const auto& s = j.at("custom");
    auto mat = [&](const char* key) -> std::optional<Matrix> {
      if (!s.contains(key)) return {};
      return parse_matrix(s.at(key), std::string("custom.") + key, problems);
    };
    c.custom_A = mat("A");
    c.custom_B = mat("B");
    c.custom_Q = mat("Q");
    c.custom_R = mat("R");
    c.custom_sigma_w = mat("sigma_w");
    c.custom_sigma_0 = mat("sigma_0");
    c.custom_sigma_e = mat("sigma_e");
    c.custom_K0 = mat("K0");
  }

  // Exhaustive invariant checks.
  if (c.runs < 1) problems.push_back("runs: must be >= 1");
  if (c.iters < 1) problems.push_back("iters: must be >= 1");
  if (c.record_stride < 1) problems.push_back("record_stride: must be >= 1");
  if (!(c.j0_multiplier > 1.0))
    problems.push_back("j0_multiplier: must exceed 1");
  if (c.preset == PresetId::custom) {
    for (const auto* req : {"A", "B", "Q", "R", "sigma_w", "sigma_0"}) {
      const bool have =
          (std::string(req) == "A" && c.custom_A) ||
          (std::string(req) == "B" && c.custom_B) ||
          (std::string(req) == "Q" && c.custom_Q) ||
          (std::string(req) == "R" && c.custom_R) ||
          (std::string(req) == "sigma_w" && c.custom_sigma_w) ||
          (std::string(req) == "sigma_0" && c.custom_sigma_0);
      if (!have)
        problems.push_back(std::string("custom.") + req +
                           ": required for preset=custom");
    }
    if (!c.custom_K0 && c.experiment != ExperimentId::constants)
      problems.push_back("custom.K0: required for run experiments");
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Preset ExperimentConfig::materialize(std::optional<double> noise_scale) const {
  auto build = [&]() -> Preset {
    switch (preset) {
      case PresetId::scalar:
        return preset_scalar();
      case PresetId::benchmark3:
        return preset_benchmark3(noise_scale.value_or(1e-4));
      case PresetId::boeing747:
        return preset_boeing747();
      case PresetId::custom: {
        const Eigen::Index nu = custom_B->cols();
        SymmetricPsd se = custom_sigma_e
                              ? SymmetricPsd(*custom_sigma_e)
                              : SymmetricPsd(Matrix::Zero(nu, nu));
        LinearSystem sys(*custom_A, *custom_B, SymmetricPsd(*custom_sigma_w),
                         SymmetricPsd(*custom_sigma_0), std::move(se));
        LqrCost lc{SymmetricPsd(*custom_Q), SymmetricPsd(*custom_R)};
        Gain k0 = custom_K0
                      ? Gain{*custom_K0}
                      : Gain{solve_dare(*custom_A, *custom_B, *custom_Q,
                                        *custom_R)
                                 .K};
        return Preset{std::move(sys), std::move(lc), std::move(k0)};
      }
    }
    throw ConfigError("unreachable preset");
  };
  Preset p = build();
  if (noise_scale && preset != PresetId::benchmark3) {
    const Eigen::Index n = p.sys.nx();
    LinearSystem sys(p.sys.A, p.sys.B,
                     SymmetricPsd(*noise_scale * Matrix::Identity(n, n)),
                     p.sys.sigma_0, p.sys.sigma_e);
    return Preset{std::move(sys), p.cost, p.k0};
  }
  return p;
}

std::string resolved_config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["preset"] = to_string(c.preset);
  j["experiment"] = to_string(c.experiment);
  j["master_seed"] = c.master_seed;
  j["runs"] = c.runs;
  j["iters"] = c.iters;
  j["output_dir"] = c.output_dir;
  j["record_stride"] = c.record_stride;
  j["j0_multiplier"] = c.j0_multiplier;
  if (c.j0) j["j0"] = *c.j0;
  j["deltas"] = {{"delta1", c.deltas.delta1},
                 {"delta2", c.deltas.delta2},
                 {"delta3", c.deltas.delta3}};
  j["schedule"] = {
      {"form", c.schedule.form == StepSchedule::Form::constant ? "constant"
                                                               : "power_floor"},
      {"eta0", c.schedule.eta0},
      {"kappa", c.schedule.kappa},
      {"divisor", c.schedule.divisor}};
  j["synthetic"] = {{"bias_norm", c.synthetic.mean_norm0},
                    {"bias_decay_beta", c.synthetic.mean_decay_beta},
                    {"entry_variance", c.synthetic.entry_variance}};
  j["ident"] = {{"t0", c.ident.t0},
                {"off_policy", c.ident.off_policy},
                {"persistency",
                 {{"N", c.ident.persistency.N},
                  {"M", c.ident.persistency.M},
                  {"alpha", c.ident.persistency.alpha}}}};
  j["zeroth"] = {{"v", c.zeroth.v}, {"ell", c.zeroth.ell}, {"n", c.zeroth.n}};
  j["zeroth_schedule"] = {{"v0", c.zeroth_schedule.v0},
                          {"ell0", c.zeroth_schedule.ell0},
                          {"n0", c.zeroth_schedule.n0},
                          {"v_divisor", c.zeroth_schedule.v_divisor},
                          {"block", c.zeroth_schedule.block}};
  j["noise_levels"] = c.noise_levels;
  j["v_grid"] = c.v_grid;
  j["eval_points"] = c.eval_points;
  return j.dump(2) + "\n";
}

}  // namespace lqrpg

#pragma once

#include "lqrpg/presets.hpp"
#include "lqrpg/sgd.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lqrpg {

enum class PresetId { scalar, benchmark3, boeing747, custom };
enum class ExperimentId {
  oracle_indirect,
  oracle_direct,
  sgd_synthetic,
  pg_indirect,
  pg_direct,
  constants
};

std::string to_string(PresetId p);
std::string to_string(ExperimentId e);
ExperimentId experiment_from_string(const std::string& s);

struct ExperimentConfig {
  PresetId preset = PresetId::scalar;
  ExperimentId experiment = ExperimentId::constants;
  std::uint64_t master_seed = 1;
  int runs = 1;
  std::int64_t iters = 1;
  std::string output_dir = ".";
  std::int64_t record_stride = 100;

  double j0_multiplier = 2.0;
  std::optional<double> j0;
  Deltas deltas{};

  StepSchedule schedule = StepSchedule::power_floor(0.05, 0.51, 100.0);
  SyntheticBiasSpec synthetic{};
  IndirectRunConfig ident{};
  ZeroOrderParams zeroth{0.01, 20, 300};
  DirectParamSchedule zeroth_schedule{};
  std::vector<double> noise_levels;     ///< sigma_w scales for oracle runs
  std::vector<double> v_grid;           ///< exploration radii for oracle-direct
  std::vector<std::int64_t> eval_points;///< iteration counts for oracle-indirect

  // custom preset matrices
  std::optional<Matrix> custom_A, custom_B, custom_Q, custom_R, custom_sigma_w,
      custom_sigma_0, custom_sigma_e, custom_K0;

  /// Preset system with the configured noise level applied (isotropic
  /// replacement of sigma_w when `noise_scale` is set).
  Preset materialize(std::optional<double> noise_scale = {}) const;
};

/// Parse + validate a JSON config file. Invariant violations are reported
/// exhaustively, naming each offending field.
ExperimentConfig load_config(const std::string& path);

/// Parse from a JSON string (used by load_config and tests).
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical resolved-config JSON (stable key order, 17-digit floats).
std::string resolved_config_json(const ExperimentConfig& cfg);

}  // namespace lqrpg

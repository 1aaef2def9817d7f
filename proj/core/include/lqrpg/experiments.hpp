#pragma once

#include "lqrpg/config.hpp"
#include "lqrpg/csv.hpp"

#include <string>
#include <vector>

namespace lqrpg {

/// Dispatches the configured experiment and writes one CSV per output
/// series plus a metadata sidecar. Returns the written paths; partial
/// outputs are removed when a failure occurs.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

// Aggregation helpers shared with the test suites.

/// Iterations at which runs record: 1, every `stride`, and `iters`.
std::vector<std::int64_t> record_grid(std::int64_t iters,
                                      std::int64_t stride);

/// Gap of one run at grid time t; +inf once the run has destabilized.
double gap_at(const std::vector<RunRecord>& run, std::int64_t t);

/// Cost of one run at grid time t; +inf once destabilized.
double cost_at(const std::vector<RunRecord>& run, std::int64_t t);

bool destabilized_by(const std::vector<RunRecord>& run, std::int64_t t);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

/// Least-squares slope of log10(y) against log10(x); pairs with
/// non-positive entries are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lqrpg

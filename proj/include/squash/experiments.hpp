#pragma once

#include <string>
#include <vector>

#include "squash/config.hpp"
#include "squash/master_equation.hpp"
#include "squash/table.hpp"
#include "squash/trajectory.hpp"

namespace squash {

/// n_eff over a (chi, g) grid; rows outside the stability region are kept with stable = false and n_eff = NaN.
Table fig1_table(const RunConfig& c, const std::vector<double>& chi_list, const std::vector<double>& g_grid);

/// Uncertainty ellipses for vacuum, measurement only (g = 0) and feedback (g from the config).
Table fig2_table(const RunConfig& c);

/// Stationary moments from the closed form, the moment equations and the truncated master equation.
Table steady_table(const RunConfig& c);

/// Ensemble plus the deterministic reference on the same truncation.
struct EnsembleComparison {
  EnsembleStats stats;
  EvolveResult reference;
  int dim = 0;               // after any doubling
  double max_z = 0.0;        // worst |mean - reference| / standard error over checkpoints and moments
  std::vector<Trajectory> trajectories;  // only when requested
};

/// Runs the ensemble and the deterministic equation from the vacuum. On a truncation overflow the
/// whole comparison is repeated at twice the dimension (up to 120).
EnsembleComparison compare_ensemble(const RunConfig& c, bool keep_trajectories, int workers);

Table trajectory_archive(const std::vector<Trajectory>& trajectories);
Table ensemble_summary(const EnsembleComparison& cmp);

enum class CheckStatus { pass, fail, skipped };

std::string to_string(CheckStatus s);

struct CheckRecord {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::skipped;
  std::string note;
};

/// Validation suite. Checks that need a stationary state are skipped for unstable configs.
/// Exceptions inside a check are reported as failures.
std::vector<CheckRecord> run_validation(const RunConfig& c);

Table validation_table(const std::vector<CheckRecord>& records);

}  // namespace squash

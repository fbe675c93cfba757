#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "km/bqp.hpp"
#include "km/lcqp.hpp"
#include "km/rounding.hpp"
#include "km/types.hpp"

namespace km {

struct TrainConfig {
  int dim = 8;
  int i_bcd = 15;
  DualConfig dual;
  RoundingConfig rounding;
  FwConfig fw;
  double lambda_u = 0.0;  // ridge on the user-block quadratic
  double mu_i = 0.0;      // ridge on the item-block quadratic
  uint64_t seed = 0;
  int parallelism = 1;
  // Keep per-invocation Lanczos records in the report; off by default
  // because large approximate-mode runs would log millions of rows.
  bool collect_lanczos_log = false;

  void validate() const;
};

struct TrainReport {
  std::vector<double> rmse_per_iteration;
  double wall_time_lcqp = 0.0;  // seconds
  double wall_time_bqp = 0.0;
  std::array<long, 4> phase_histogram = {0, 0, 0, 0};
  long dual_solves = 0;
  long dual_converged = 0;
  long skipped_items = 0;  // items with no train ratings in an iteration
  long skipped_users = 0;
  std::vector<LanczosStats> lanczos_log;

  long eigensolve_free_iterations() const {
    return phase_histogram[0] + phase_histogram[1] + phase_histogram[2];
  }
  long total_dual_iterations() const {
    return phase_histogram[0] + phase_histogram[1] + phase_histogram[2] +
           phase_histogram[3];
  }
};

// Strictly interior simplex points, one per user index; flat-Dirichlet
// draws keyed by (seed, user) so results do not depend on iteration order.
std::map<int, SimplexVector> init_theta(const std::vector<int>& users, int dim,
                                        uint64_t seed);

// Alternates full item-block solves (dual descent + randomization) and full
// user-block solves (conditional gradient), recording the training RMSE
// after each pass.
std::pair<KmParams, TrainReport> bcd_train(const RatingDataset& data,
                                           const TrainConfig& cfg);

// theta' psi per pair of dense indices; nullopt for untrained pairs.
std::vector<std::optional<double>> predict(
    const KmParams& params, const std::vector<std::pair<int, int>>& pairs);

}  // namespace km

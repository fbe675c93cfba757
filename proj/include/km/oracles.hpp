#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "km/bqp.hpp"
#include "km/lcqp.hpp"
#include "km/types.hpp"

namespace km {

// Brute-force references for tests. Never linked into solve paths.

struct OracleResult {
  IndicatorVector best_psi;
  double best_objective = 0.0;
  std::optional<std::vector<std::pair<IndicatorVector, double>>> full_table;
};

// Enumerates all 2^D binary vectors and minimizes psi'S psi - 2 psi'v.
// Ties break to the lexicographically smallest psi. Refuses D > 20.
OracleResult bqp_exhaustive(const BqpInstance& inst, bool keep_table = false);

// Central finite differences; h <= 0 selects 1e-5 * max(1, ||u||_inf).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& u, double h = 0.0);

// Global minimum of theta'Q theta - 2 theta'w over the simplex by solving
// the equality-constrained stationary system on every face and keeping the
// best feasible candidate (vertices included). Exponential in D.
double lcqp_face_enumeration(const LcqpInstance& inst);

}  // namespace km

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "km/types.hpp"

namespace km {

// Quadratic over the unit simplex: minimize theta'Q theta - 2 theta'w + rho.
struct LcqpInstance {
  Eigen::MatrixXd Q;
  Eigen::VectorXd w;
  double rho = 0.0;

  LcqpInstance(Eigen::MatrixXd q, Eigen::VectorXd w_in, double rho_in);

  int dim() const { return static_cast<int>(w.size()); }
  double objective(const Eigen::VectorXd& theta) const;
};

struct FwConfig {
  long max_iters = 500;
  double tol = 1e-7;  // duality-gap stopping threshold
};

struct FwStats {
  long iterations = 0;
  double gap = 0.0;  // duality gap at the returned point
  bool converged = false;
};

// Q = sum psi psi', w = sum psi p, rho = sum p^2.
LcqpInstance build_lcqp(const std::vector<IndicatorVector>& psis,
                        const std::vector<double>& ps);

// Conditional-gradient descent over the simplex with exact line search.
// Stops when the duality gap <theta - e_j*, grad f(theta)> drops to tol.
SimplexVector solve_fw(const LcqpInstance& inst, const FwConfig& cfg,
                       const SimplexVector& init, FwStats* stats = nullptr);

}  // namespace km

#pragma once

#include <Eigen/Dense>

#include "km/bqp.hpp"
#include "km/types.hpp"

namespace km {

struct RoundingConfig {
  int i_rand = 100;
  uint64_t seed = 0;
};

// Factor L with L L' = X* = gamma * sum_j lambda_j v_j v_j'; columns are
// the positive eigenpairs scaled by sqrt(gamma * lambda). No Cholesky.
// rank 0 marks the degenerate case of no positive eigenvalues.
struct FactorizedX {
  Eigen::MatrixXd L;  // (D+1) x r
  int rank = 0;

  bool degenerate() const { return rank == 0; }
};

FactorizedX factorize(const PositivePairs& pairs, double gamma);

// Gaussian randomization: draw xi ~ N(0, I_r), discretize x = sign(L xi)
// with sign(0) -> +1, keep the sample minimizing x'A x, and recover
// psi = (x(1) * x(2:) + 1) / 2. Deterministic under the seed. When the
// factor is degenerate, samples are uniform sign vectors with x(1) = +1.
IndicatorVector round_bqp(const LiftedBqp& lifted, const FactorizedX& fac,
                          const RoundingConfig& cfg);

}  // namespace km

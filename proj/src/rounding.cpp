#include "km/rounding.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "km/rng.hpp"

namespace km {

namespace {

double sign_plus(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

FactorizedX factorize(const PositivePairs& pairs, double gamma) {
  if (gamma <= 0.0) {
    throw std::invalid_argument("gamma must be positive");
  }
  FactorizedX out;
  out.rank = static_cast<int>(pairs.values.size());
  out.L.resize(pairs.vectors.rows(), out.rank);
  for (int k = 0; k < out.rank; ++k) {
    if (pairs.values[k] <= 0.0) {
      throw std::invalid_argument("factorization requires positive eigenvalues");
    }
    out.L.col(k) = pairs.vectors.col(k) * std::sqrt(gamma * pairs.values[k]);
    // Eigenvector signs are arbitrary; orient each column so that exact and
    // approximate spectra feed the sampler identically.
    int lead = 0;
    for (int i = 1; i < out.L.rows(); ++i) {
      if (std::abs(out.L(i, k)) > std::abs(out.L(lead, k))) lead = i;
    }
    if (out.L(lead, k) < 0.0) out.L.col(k) = -out.L.col(k);
  }
  return out;
}

IndicatorVector round_bqp(const LiftedBqp& lifted, const FactorizedX& fac,
                          const RoundingConfig& cfg) {
  if (cfg.i_rand < 1) {
    throw std::invalid_argument("i_rand must be at least 1");
  }
  const int n = lifted.dim() + 1;
  if (!fac.degenerate() && fac.L.rows() != n) {
    throw std::invalid_argument("factor dimension mismatch");
  }
  Rng rng(cfg.seed);
  Eigen::VectorXd best_x(n);
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd xi(n);
  Eigen::VectorXd x(n);
  for (int ell = 0; ell < cfg.i_rand; ++ell) {
    // A full-dimension draw per sample keeps the stream aligned across
    // eigensolver modes even when the factor ranks differ.
    for (int k = 0; k < n; ++k) xi[k] = rng.next_normal();
    if (fac.degenerate()) {
      // X* carries no information; sample sign vectors directly.
      x[0] = 1.0;
      for (int i = 1; i < n; ++i) x[i] = sign_plus(xi[i]);
    } else {
      const Eigen::VectorXd sample = fac.L * xi.head(fac.rank);
      for (int i = 0; i < n; ++i) x[i] = sign_plus(sample[i]);
    }
    const double score = lifted.homogenized_objective(x);
    if (score < best_score) {
      best_score = score;
      best_x = x;
    }
  }
  // Undo the homogenization: x_hat = x(1) * x(2:), psi = (x_hat + 1) / 2.
  std::vector<uint8_t> bits(lifted.dim());
  for (int i = 0; i < lifted.dim(); ++i) {
    bits[i] = best_x[0] * best_x[i + 1] > 0.0 ? 1 : 0;
  }
  return IndicatorVector(std::move(bits));
}

}  // namespace km

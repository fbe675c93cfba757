#pragma once

#include <Eigen/Dense>
#include <vector>

namespace km {

// Entries of a projected spectrum strictly above this count as positive;
// avoids rank inflation from rounding noise.
inline constexpr double kEigPositiveCutoff = 1e-12;

// Full spectrum of a symmetric matrix, eigenvalues in descending order,
// eigenvectors as matching orthonormal columns.
struct SymmetricSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

SymmetricSpectrum exact_evd(const Eigen::MatrixXd& C);

// Krylov factorization P_m' C P_m = H_m from the three-term recurrence with
// full reorthogonalization. beta holds the m-1 off-diagonal entries
// (beta_2..beta_m); beta_next is the residual norm beta_{m+1} at the stop.
struct LanczosFactorization {
  Eigen::MatrixXd P;      // (n x m), orthonormal columns
  Eigen::VectorXd alpha;  // (m), diagonal of H_m
  Eigen::VectorXd beta;   // (m-1), off-diagonal of H_m
  double beta_next = 0.0;
  int m = 0;

  Eigen::MatrixXd tridiagonal() const;
};

// Runs until beta_{j+1} <= delta or j == m_max (m_max is clamped to n).
LanczosFactorization lanczos(const Eigen::MatrixXd& C,
                             const Eigen::VectorXd& p1, double delta,
                             int m_max);

// Approximate eigenpairs (values descending, vectors = P_m q). q_last keeps
// the last component of each tridiagonal eigenvector, which scales the
// per-pair residual.
struct RitzPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd q_last;
};

RitzPairs ritz_pairs(const LanczosFactorization& fac);

// Residual and eigenvalue-error bounds implied by the factorization:
// every residual ||C v - lambda v|| and every distance from a Ritz value to
// the true spectrum is at most beta_{m+1}; the per-pair bound tightens to
// beta_{m+1} |q_i(m)|.
struct RitzErrorBounds {
  double residual_bound = 0.0;
  double max_err_bound = 0.0;
  std::vector<double> min_err_bounds;
};

RitzErrorBounds ritz_error_bounds(const LanczosFactorization& fac,
                                  const RitzPairs& pairs);

// Trace-based stopping threshold for the Lanczos recurrence, built from
// Wolkowicz-style extreme-eigenvalue bounds and the normalized Minkowski
// l1-norm. D is the model dimension (C is (D+1)x(D+1)); a is the control
// parameter.
struct TraceThreshold {
  double delta = 0.0;
  double sigma_ub = 0.0;
  double sigma_lb = 0.0;
  double sigma_mink = 0.0;
};

TraceThreshold trace_threshold(const Eigen::MatrixXd& C, double a);

}  // namespace km

#include "km/eigs.hpp"

#include <cmath>
#include <stdexcept>

namespace km {

namespace {

void check_symmetric(const Eigen::MatrixXd& C, double tol) {
  if (C.rows() != C.cols()) {
    throw std::invalid_argument("matrix is not square");
  }
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    throw std::invalid_argument("matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
  }
}

}  // namespace

SymmetricSpectrum exact_evd(const Eigen::MatrixXd& C) {
  check_symmetric(C, 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed to converge");
  }
  const int n = static_cast<int>(C.rows());
  SymmetricSpectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = solver.eigenvalues()[n - 1 - k];
    out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

Eigen::MatrixXd LanczosFactorization::tridiagonal() const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    H(j, j) = alpha[j];
    if (j + 1 < m) {
      H(j, j + 1) = beta[j];
      H(j + 1, j) = beta[j];
    }
  }
  return H;
}

LanczosFactorization lanczos(const Eigen::MatrixXd& C,
                             const Eigen::VectorXd& p1, double delta,
                             int m_max) {
  const int n = static_cast<int>(C.rows());
  if (p1.size() != n) {
    throw std::invalid_argument("starting vector has wrong dimension");
  }
  if (std::abs(p1.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("starting vector must have unit norm");
  }
  if (m_max < 1) {
    throw std::invalid_argument("m_max must be positive");
  }
  m_max = std::min(m_max, n);

  Eigen::MatrixXd P(n, m_max);
  Eigen::VectorXd alpha(m_max);
  Eigen::VectorXd beta(std::max(m_max - 1, 0));
  P.col(0) = p1;

  double beta_prev = 0.0;
  Eigen::VectorXd w(n);
  Eigen::VectorXd coeffs(m_max);
  int m = m_max;
  double beta_next = 0.0;
  for (int j = 0; j < m_max; ++j) {
    w.noalias() = C * P.col(j);
    if (j > 0) w -= beta_prev * P.col(j - 1);
    alpha[j] = w.dot(P.col(j));
    w -= alpha[j] * P.col(j);
    // Full reorthogonalization; the plain recurrence loses orthogonality in
    // floating point once Ritz values start converging.
    const auto basis = P.leftCols(j + 1);
    for (int pass = 0; pass < 2; ++pass) {
      coeffs.head(j + 1).noalias() = basis.transpose() * w;
      w.noalias() -= basis * coeffs.head(j + 1);
    }
    beta_next = w.norm();
    if (beta_next <= delta || j + 1 == m_max) {
      m = j + 1;
      break;
    }
    beta[j] = beta_next;
    P.col(j + 1) = w / beta_next;
    beta_prev = beta_next;
  }

  LanczosFactorization fac;
  fac.m = m;
  fac.P = P.leftCols(m);
  fac.alpha = alpha.head(m);
  fac.beta = beta.head(std::max(m - 1, 0));
  fac.beta_next = beta_next;
  return fac;
}

RitzPairs ritz_pairs(const LanczosFactorization& fac) {
  if (fac.m < 1) {
    throw std::invalid_argument("empty factorization");
  }
  const SymmetricSpectrum hs = exact_evd(fac.tridiagonal());
  RitzPairs out;
  out.values = hs.eigenvalues;
  out.vectors = fac.P * hs.eigenvectors;
  out.q_last = hs.eigenvectors.row(fac.m - 1).transpose();
  return out;
}

RitzErrorBounds ritz_error_bounds(const LanczosFactorization& fac,
                                  const RitzPairs& pairs) {
  RitzErrorBounds out;
  out.residual_bound = fac.beta_next;
  out.max_err_bound = fac.beta_next;
  out.min_err_bounds.resize(pairs.values.size());
  for (int i = 0; i < pairs.values.size(); ++i) {
    out.min_err_bounds[i] = fac.beta_next * std::abs(pairs.q_last[i]);
  }
  return out;
}

TraceThreshold trace_threshold(const Eigen::MatrixXd& C, double a) {
  const int n = static_cast<int>(C.rows());
  const int d = n - 1;
  if (d < 2) {
    throw std::invalid_argument("trace threshold needs dimension >= 2");
  }
  if (a <= 0.0) {
    throw std::invalid_argument("control parameter must be positive");
  }
  const double t1 = C.trace() / n;
  const double t2 = C.cwiseProduct(C).sum() / n;  // trace(C^2) for symmetric C
  double s2 = t2 - t1 * t1;
  if (s2 < 0.0) s2 = 0.0;  // rounding
  TraceThreshold out;
  out.sigma_ub = t1 + std::sqrt(s2 * d);
  out.sigma_lb = t1 + std::sqrt(s2 / d);
  out.sigma_mink = C.cwiseAbs().sum() / n;
  out.delta = ((out.sigma_ub - out.sigma_lb) + out.sigma_mink) /
              (a * d * std::log(static_cast<double>(d)));
  return out;
}

}  // namespace km

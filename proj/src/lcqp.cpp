#include "km/lcqp.hpp"

#include <algorithm>
#include <stdexcept>

namespace km {

LcqpInstance::LcqpInstance(Eigen::MatrixXd q, Eigen::VectorXd w_in,
                           double rho_in)
    : Q(std::move(q)), w(std::move(w_in)), rho(rho_in) {
  if (Q.rows() != Q.cols() || Q.rows() != w.size()) {
    throw std::invalid_argument("LCQP dimensions are inconsistent");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("LCQP matrix must be symmetric");
  }
  if (rho < 0.0) {
    throw std::invalid_argument("LCQP constant term must be nonnegative");
  }
}

double LcqpInstance::objective(const Eigen::VectorXd& theta) const {
  return theta.dot(Q * theta) - 2.0 * theta.dot(w) + rho;
}

LcqpInstance build_lcqp(const std::vector<IndicatorVector>& psis,
                        const std::vector<double>& ps) {
  if (psis.empty()) {
    throw std::invalid_argument("cannot build LCQP from an empty term list");
  }
  if (psis.size() != ps.size()) {
    throw std::invalid_argument("psi/probability list length mismatch");
  }
  const int d = psis.front().dim();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double rho = 0.0;
  for (size_t k = 0; k < psis.size(); ++k) {
    if (psis[k].dim() != d) {
      throw std::invalid_argument("psi dimension mismatch in LCQP terms");
    }
    const Eigen::VectorXd v = psis[k].vec();
    Q.noalias() += v * v.transpose();
    w.noalias() += v * ps[k];
    rho += ps[k] * ps[k];
  }
  return LcqpInstance(std::move(Q), std::move(w), rho);
}

SimplexVector solve_fw(const LcqpInstance& inst, const FwConfig& cfg,
                       const SimplexVector& init, FwStats* stats) {
  if (init.dim() != inst.dim()) {
    throw std::invalid_argument("FW start point has wrong dimension");
  }
  if (cfg.tol <= 0.0 || cfg.max_iters < 1) {
    throw std::invalid_argument("invalid FW configuration");
  }
  const int d = inst.dim();
  Eigen::VectorXd theta = init.vec();
  Eigen::VectorXd grad(d);
  Eigen::VectorXd dir(d);

  long iters = 0;
  double gap = 0.0;
  bool converged = false;
  for (long k = 0; k < cfg.max_iters; ++k) {
    grad.noalias() = 2.0 * (inst.Q * theta - inst.w);

    // Linear minimizer over the simplex is a vertex; smallest index wins
    // ties for determinism.
    int j_star = 0;
    for (int j = 1; j < d; ++j) {
      if (grad[j] < grad[j_star]) j_star = j;
    }

    gap = grad.dot(theta) - grad[j_star];
    if (gap <= cfg.tol) {
      converged = true;
      break;
    }
    iters = k + 1;

    // d = s - theta with s = e_{j*}; exact line search on the quadratic,
    // gamma* = grad'(theta - s) / (2 (theta-s)' Q (theta-s)).
    dir = -theta;
    dir[j_star] += 1.0;
    const double curvature = 2.0 * dir.dot(inst.Q * dir);
    double gamma;
    if (curvature > 1e-14) {
      gamma = std::clamp(gap / curvature, 0.0, 1.0);
    } else {
      gamma = 2.0 / (k + 2.0);
    }
    theta += gamma * dir;
  }
  if (stats != nullptr) {
    if (!converged) {  // gap above is stale by one step
      grad.noalias() = 2.0 * (inst.Q * theta - inst.w);
      gap = grad.dot(theta) - grad.minCoeff();
    }
    stats->iterations = iters;
    stats->gap = gap;
    stats->converged = converged;
  }
  return SimplexVector(theta);
}

}  // namespace km

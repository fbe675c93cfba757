#include "km/oracles.hpp"

#include <limits>
#include <stdexcept>

namespace km {

OracleResult bqp_exhaustive(const BqpInstance& inst, bool keep_table) {
  const int d = inst.dim();
  if (d > 20) {
    throw std::invalid_argument(
        "exhaustive enumeration refused for D > 20 (got " +
        std::to_string(d) + ")");
  }
  std::vector<std::pair<IndicatorVector, double>> table;
  std::vector<uint8_t> bits(d, 0);
  IndicatorVector best = IndicatorVector::zeros(d);
  double best_obj = std::numeric_limits<double>::infinity();
  const uint64_t count = uint64_t{1} << d;
  for (uint64_t c = 0; c < count; ++c) {
    // bit D-1-j of the counter drives entry j, so candidates enumerate in
    // lexicographic order and strict improvement keeps the smallest tie.
    for (int j = 0; j < d; ++j) {
      bits[j] = static_cast<uint8_t>((c >> (d - 1 - j)) & 1u);
    }
    IndicatorVector psi(bits);
    const double obj = inst.objective(psi);
    if (keep_table) table.emplace_back(psi, obj);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(psi);
    }
  }
  OracleResult out{std::move(best), best_obj, std::nullopt};
  if (keep_table) out.full_table = std::move(table);
  return out;
}

Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& u, double h) {
  if (h <= 0.0) {
    h = 1e-5 * std::max(1.0, u.cwiseAbs().maxCoeff());
  }
  Eigen::VectorXd g(u.size());
  Eigen::VectorXd probe = u;
  for (int k = 0; k < u.size(); ++k) {
    probe[k] = u[k] + h;
    const double fp = f(probe);
    probe[k] = u[k] - h;
    const double fm = f(probe);
    probe[k] = u[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double lcqp_face_enumeration(const LcqpInstance& inst) {
  const int d = inst.dim();
  if (d > 20) {
    throw std::invalid_argument("face enumeration refused for D > 20");
  }
  double best = std::numeric_limits<double>::infinity();
  const uint64_t count = uint64_t{1} << d;
  for (uint64_t mask = 1; mask < count; ++mask) {
    std::vector<int> face;
    for (int j = 0; j < d; ++j) {
      if ((mask >> j) & 1u) face.push_back(j);
    }
    const int k = static_cast<int>(face.size());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    if (k == 1) {
      theta[face[0]] = 1.0;  // vertex
      best = std::min(best, inst.objective(theta));
      continue;
    }
    // Stationary point of the restriction to the face: KKT system
    // [2Q_F, 1; 1', 0] [theta_F; nu] = [2w_F; 1]. A singular face system
    // (rank-deficient Q on the face) is skipped; its minimizers reappear on
    // subfaces or the instance should carry a ridge to be oracle-eligible.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) kkt(r, c) = 2.0 * inst.Q(face[r], face[c]);
      kkt(r, k) = 1.0;
      kkt(k, r) = 1.0;
      rhs[r] = 2.0 * inst.w[face[r]];
    }
    rhs[k] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    bool feasible = true;
    for (int r = 0; r < k; ++r) {
      if (sol[r] < -1e-12) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    for (int r = 0; r < k; ++r) theta[face[r]] = std::max(sol[r], 0.0);
    best = std::min(best, inst.objective(theta));
  }
  return best;
}

}  // namespace km

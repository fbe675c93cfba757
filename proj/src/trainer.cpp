#include "km/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "km/metrics.hpp"
#include "km/rng.hpp"

namespace km {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Run fn(k) for k in [0, n) across at most `workers` threads. Work items
// write to disjoint slots, so assembly is order-independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

struct ItemSolveResult {
  bool solved = false;
  bool converged = false;
  std::array<long, 4> phases = {0, 0, 0, 0};
  std::vector<LanczosStats> lanczos_log;
};

}  // namespace

void TrainConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("dim must be at least 2");
  if (i_bcd < 1) throw std::invalid_argument("i_bcd must be positive");
  if (lambda_u < 0.0 || mu_i < 0.0) {
    throw std::invalid_argument("ridge weights must be nonnegative");
  }
  if (parallelism < 1) {
    throw std::invalid_argument("parallelism must be positive");
  }
  dual.validate();
  if (rounding.i_rand < 1) {
    throw std::invalid_argument("i_rand must be positive");
  }
}

std::map<int, SimplexVector> init_theta(const std::vector<int>& users, int dim,
                                        uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("dim must be at least 2");
  std::map<int, SimplexVector> out;
  for (int u : users) {
    Rng rng(derive_stream(seed, 0x7e7a, static_cast<uint64_t>(u)));
    Eigen::VectorXd draws(dim);
    for (int k = 0; k < dim; ++k) {
      double x = rng.next_uniform();
      while (x <= 0.0) x = rng.next_uniform();
      draws[k] = -std::log(x);  // flat Dirichlet via exponentials
    }
    draws /= draws.sum();
    out.emplace(u, SimplexVector(draws));
  }
  return out;
}

std::pair<KmParams, TrainReport> bcd_train(const RatingDataset& data,
                                           const TrainConfig& cfg) {
  cfg.validate();
  if (data.train_count() == 0) {
    throw std::invalid_argument("training set is empty");
  }

  // Per-item and per-user views of the train split.
  const int num_users = data.num_users();
  const int num_items = data.num_items();
  std::vector<std::vector<std::pair<int, double>>> by_item(num_items);
  std::vector<std::vector<std::pair<int, double>>> by_user(num_users);
  for (const auto& t : data.triples()) {
    if (t.split != Split::Train) continue;
    by_item[t.item].push_back({t.user, t.p});
    by_user[t.user].push_back({t.item, t.p});
  }
  std::vector<int> train_users, train_items;
  for (int u = 0; u < num_users; ++u) {
    if (!by_user[u].empty()) train_users.push_back(u);
  }
  for (int i = 0; i < num_items; ++i) {
    if (!by_item[i].empty()) train_items.push_back(i);
  }

  KmParams params;
  params.dim = cfg.dim;
  params.theta = init_theta(train_users, cfg.dim, cfg.seed);

  TrainReport report;
  std::vector<Eigen::VectorXd> theta_dense(num_users);
  for (const auto& [u, th] : params.theta) theta_dense[u] = th.vec();
  std::vector<std::optional<IndicatorVector>> psi_dense(num_items);

  for (int tau = 1; tau <= cfg.i_bcd; ++tau) {
    // Item block: one BQP per item against the fixed theta block.
    const auto bqp_start = Clock::now();
    std::vector<ItemSolveResult> results(train_items.size());
    parallel_for(
        static_cast<int>(train_items.size()), cfg.parallelism, [&](int k) {
          const int item = train_items[k];
          const auto& ratings = by_item[item];
          if (ratings.empty()) return;
          Eigen::MatrixXd S =
              Eigen::MatrixXd::Identity(cfg.dim, cfg.dim) * cfg.mu_i;
          Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.dim);
          double rho = 0.0;
          for (const auto& [user, p] : ratings) {
            const Eigen::VectorXd& th = theta_dense[user];
            S.noalias() += th * th.transpose();
            v.noalias() += th * p;
            rho += p * p;
          }
          const LiftedBqp lifted = lift(BqpInstance(std::move(S), std::move(v), rho));
          const DualState state = solve_enhanced_gd(
              lifted, cfg.dual,
              Eigen::VectorXd::Ones(cfg.dim + 1));
          std::vector<LanczosStats> rounding_log;
          const PositivePairs pairs = positive_eigenpairs(
              lifted, state.u, cfg.dual.eig_mode, cfg.dual.lanczos_a,
              &rounding_log);
          RoundingConfig rc = cfg.rounding;
          rc.seed = derive_stream(cfg.seed, static_cast<uint64_t>(item),
                                  static_cast<uint64_t>(tau));
          psi_dense[item] =
              round_bqp(lifted, factorize(pairs, cfg.dual.gamma), rc);
          auto& res = results[k];
          res.solved = true;
          res.converged = state.converged;
          res.phases = state.phase_counts;
          if (cfg.collect_lanczos_log) {
            res.lanczos_log = state.lanczos_log;
            res.lanczos_log.insert(res.lanczos_log.end(), rounding_log.begin(),
                                   rounding_log.end());
          }
        });
    report.wall_time_bqp += seconds_since(bqp_start);
    for (const auto& res : results) {
      if (!res.solved) {
        ++report.skipped_items;
        continue;
      }
      ++report.dual_solves;
      report.dual_converged += res.converged;
      for (int p = 0; p < 4; ++p) report.phase_histogram[p] += res.phases[p];
      report.lanczos_log.insert(report.lanczos_log.end(),
                                res.lanczos_log.begin(),
                                res.lanczos_log.end());
    }

    // User block: one simplex QP per user against the fresh psi block.
    const auto lcqp_start = Clock::now();
    std::vector<uint8_t> user_skipped(train_users.size(), 0);
    parallel_for(
        static_cast<int>(train_users.size()), cfg.parallelism, [&](int k) {
          const int user = train_users[k];
          const auto& ratings = by_user[user];
          if (ratings.empty()) {
            user_skipped[k] = 1;
            return;
          }
          Eigen::MatrixXd Q =
              Eigen::MatrixXd::Identity(cfg.dim, cfg.dim) * cfg.lambda_u;
          Eigen::VectorXd w = Eigen::VectorXd::Zero(cfg.dim);
          double rho = 0.0;
          bool any = false;
          for (const auto& [item, p] : ratings) {
            if (!psi_dense[item].has_value()) continue;
            const Eigen::VectorXd ps = psi_dense[item]->vec();
            Q.noalias() += ps * ps.transpose();
            w.noalias() += ps * p;
            rho += p * p;
            any = true;
          }
          if (!any) {
            user_skipped[k] = 1;
            return;
          }
          const SimplexVector warm(theta_dense[user]);
          const SimplexVector sol =
              solve_fw(LcqpInstance(std::move(Q), std::move(w), rho), cfg.fw,
                       warm);
          theta_dense[user] = sol.vec();
        });
    report.wall_time_lcqp += seconds_since(lcqp_start);
    for (uint8_t s : user_skipped) report.skipped_users += s;

    // Training RMSE after this pass.
    params.theta.clear();
    for (int u : train_users) params.theta.emplace(u, SimplexVector(theta_dense[u]));
    params.psi.clear();
    for (int i : train_items) {
      if (psi_dense[i].has_value()) params.psi.emplace(i, *psi_dense[i]);
    }
    report.rmse_per_iteration.push_back(training_rmse(params, data));
  }

  return {std::move(params), std::move(report)};
}

std::vector<std::optional<double>> predict(
    const KmParams& params, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::optional<double>> out;
  out.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    auto th = params.theta.find(u);
    auto ps = params.psi.find(i);
    if (th == params.theta.end() || ps == params.psi.end()) {
      out.push_back(std::nullopt);
    } else {
      out.push_back(km_probability(th->second, ps->second));
    }
  }
  return out;
}

}  // namespace km

#include "km/bqp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace km {

namespace {

constexpr int kMaxBacktracks = 60;

void check_symmetric(const Eigen::MatrixXd& S, const char* what) {
  if (S.rows() != S.cols()) {
    throw std::invalid_argument(std::string(what) + " must be square");
  }
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(what) + " must be symmetric");
  }
}

Eigen::MatrixXd c_matrix(const LiftedBqp& lifted, const Eigen::VectorXd& u) {
  Eigen::MatrixXd C = -lifted.A;
  C.diagonal() -= u;
  return C;
}

bool all_entries_equal(const Eigen::VectorXd& u) {
  for (int i = 1; i < u.size(); ++i) {
    if (u[i] != u[0]) return false;
  }
  return true;
}

double penalty_from_values(const Eigen::VectorXd& values) {
  double p = 0.0;
  for (int i = 0; i < values.size(); ++i) {
    if (values[i] > kEigPositiveCutoff) p += values[i] * values[i];
  }
  return p;
}

double initial_step_from_lmax(double lmax_neg_a, double u0, double margin) {
  if (margin < 0.0) margin = 0.1 * std::max(1.0, std::abs(lmax_neg_a));
  return std::max(u0 - lmax_neg_a, 0.0) + margin;
}

// Spectral data of C(u) reduced to what the dual needs. all_values and
// all_vectors keep every computed eigenpair (the full spectrum in exact
// mode, the Ritz set in approximate mode) for perturbation-based trial
// evaluations.
struct SpectralEval {
  double penalty2 = 0.0;       // ||Pi_+(C(u))||_F^2
  Eigen::VectorXd pos_values;  // descending
  Eigen::MatrixXd pos_vectors;
  Eigen::VectorXd all_values;
  Eigen::MatrixXd all_vectors;
};

SpectralEval filter_positive(const Eigen::VectorXd& values,
                             const Eigen::MatrixXd& vectors) {
  SpectralEval out;
  std::vector<int> keep;
  for (int i = 0; i < values.size(); ++i) {
    if (values[i] > kEigPositiveCutoff) keep.push_back(i);
  }
  out.pos_values.resize(keep.size());
  out.pos_vectors.resize(vectors.rows(), keep.size());
  for (size_t k = 0; k < keep.size(); ++k) {
    out.pos_values[static_cast<int>(k)] = values[keep[k]];
    out.pos_vectors.col(static_cast<int>(k)) = vectors.col(keep[k]);
    out.penalty2 += values[keep[k]] * values[keep[k]];
  }
  out.all_values = values;
  out.all_vectors = vectors;
  return out;
}

// Minimizer over (0, tmax] of the first-order spectral model of h along
// u - t*g: eigenvalues move as lambda_j + t * m_j with m_j = v_j'diag(g)v_j,
// which makes the model piecewise quadratic in t with breakpoints where an
// eigenvalue crosses zero. Its slope at t=0 equals the true directional
// derivative -||g||^2, so the model always proposes a positive step.
double surrogate_ray_minimizer(double g_sum, const Eigen::VectorXd& values,
                               const Eigen::VectorXd& shifts, double gamma,
                               double tmax) {
  std::vector<double> knots = {0.0, tmax};
  for (int j = 0; j < values.size(); ++j) {
    if (shifts[j] != 0.0) {
      const double cross = -values[j] / shifts[j];
      if (cross > 0.0 && cross < tmax) knots.push_back(cross);
    }
  }
  std::sort(knots.begin(), knots.end());

  auto model = [&](double t) {
    double penalty = 0.0;
    for (int j = 0; j < values.size(); ++j) {
      const double lam = values[j] + t * shifts[j];
      if (lam > 0.0) penalty += lam * lam;
    }
    return -t * g_sum + 0.5 * gamma * penalty;
  };

  double best_t = tmax;
  double best_value = model(tmax);
  for (size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    if (b - a <= 1e-15) continue;
    const double mid = 0.5 * (a + b);
    double lin = -g_sum;
    double quad = 0.0;
    for (int j = 0; j < values.size(); ++j) {
      if (values[j] + mid * shifts[j] > 0.0) {
        lin += gamma * values[j] * shifts[j];
        quad += gamma * shifts[j] * shifts[j];
      }
    }
    double t = b;
    if (quad > 0.0) t = std::clamp(-lin / quad, a, b);
    const double value = model(t);
    if (value < best_value) {
      best_value = value;
      best_t = t;
    }
  }
  return best_t;
}

Eigen::VectorXd gradient_from_pairs(const SpectralEval& ev, double gamma,
                                    int n) {
  Eigen::VectorXd g = Eigen::VectorXd::Ones(n);
  for (int k = 0; k < ev.pos_values.size(); ++k) {
    g -= gamma * ev.pos_values[k] *
         ev.pos_vectors.col(k).cwiseProduct(ev.pos_vectors.col(k));
  }
  return g;
}

// All spectral access for one solve. The enhanced mode owns the cached
// spectrum of -A and takes the cheap exact routes (equal-entry shift,
// Weyl-certified zero penalty) wherever they apply; the plain mode runs a
// full eigendecomposition for every evaluation.
class DualEvaluator {
 public:
  DualEvaluator(const LiftedBqp& lifted, const DualConfig& cfg, bool enhanced)
      : lifted_(lifted), cfg_(cfg), enhanced_(enhanced) {
    if (enhanced_) neg_a_ = exact_evd(-lifted_.A);
  }

  const SymmetricSpectrum& neg_a() const { return neg_a_; }
  long grad_eigensolves = 0;
  long ls_eigensolves = 0;
  std::vector<LanczosStats> lanczos_log;

  // Exact objective; used for line-search trials.
  double objective(const Eigen::VectorXd& u) {
    if (enhanced_) {
      if (all_entries_equal(u)) {
        return u.sum() +
               0.5 * cfg_.gamma *
                   penalty_from_values(
                       (neg_a_.eigenvalues.array() - u[0]).matrix());
      }
      if (neg_a_.eigenvalues[0] <= u.minCoeff()) {
        return u.sum();  // Weyl bound certifies no positive eigenvalue
      }
      ++ls_eigensolves;
      return u.sum() + 0.5 * cfg_.gamma * penalty_by_mode(u).penalty2;
    }
    ++ls_eigensolves;
    const SymmetricSpectrum sp = exact_evd(c_matrix(lifted_, u));
    return u.sum() + 0.5 * cfg_.gamma * penalty_from_values(sp.eigenvalues);
  }

  struct GradResult {
    Eigen::VectorXd g;
    double h = 0.0;  // objective at u, from the same spectral data
    Phase phase = Phase::GeneralEigensolve;
    SpectralEval spectral;  // eigenpairs computed at u (empty in A phases)
  };

  GradResult gradient(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    GradResult out;
    if (!enhanced_) {
      ++grad_eigensolves;
      const SymmetricSpectrum sp = exact_evd(c_matrix(lifted_, u));
      out.spectral = filter_positive(sp.eigenvalues, sp.eigenvectors);
      out.g = gradient_from_pairs(out.spectral, cfg_.gamma, n);
      out.h = u.sum() + 0.5 * cfg_.gamma * out.spectral.penalty2;
      out.phase = Phase::GeneralEigensolve;
      return out;
    }
    if (all_entries_equal(u)) {
      const Eigen::VectorXd shifted =
          (neg_a_.eigenvalues.array() - u[0]).matrix();
      SpectralEval ev = filter_positive(shifted, neg_a_.eigenvectors);
      if (ev.pos_values.size() == 0) {
        out.g = Eigen::VectorXd::Ones(n);
        out.h = u.sum();
        out.phase = Phase::UniformInactive;
      } else {
        out.g = gradient_from_pairs(ev, cfg_.gamma, n);
        out.h = u.sum() + 0.5 * cfg_.gamma * ev.penalty2;
        out.phase = Phase::UniformSpectrum;
        out.spectral = std::move(ev);
      }
      return out;
    }
    if (neg_a_.eigenvalues[0] <= u.minCoeff()) {
      out.g = Eigen::VectorXd::Ones(n);
      out.h = u.sum();
      out.phase = Phase::GeneralInactive;
      return out;
    }
    ++grad_eigensolves;
    out.spectral = penalty_by_mode(u);
    out.g = gradient_from_pairs(out.spectral, cfg_.gamma, n);
    out.h = u.sum() + 0.5 * cfg_.gamma * out.spectral.penalty2;
    out.phase = Phase::GeneralEigensolve;
    return out;
  }

 private:
  SpectralEval penalty_by_mode(const Eigen::VectorXd& u) {
    const Eigen::MatrixXd C = c_matrix(lifted_, u);
    if (cfg_.eig_mode == EigMode::Exact) {
      const SymmetricSpectrum sp = exact_evd(C);
      return filter_positive(sp.eigenvalues, sp.eigenvectors);
    }
    const int n = static_cast<int>(C.rows());
    const TraceThreshold th = trace_threshold(C, cfg_.lanczos_a);
    const Eigen::VectorXd p1 =
        Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    const LanczosFactorization fac = lanczos(C, p1, th.delta, n);
    lanczos_log.push_back({n, fac.m, fac.beta_next, th.delta, th.sigma_ub,
                           th.sigma_lb, th.sigma_mink});
    const RitzPairs pairs = ritz_pairs(fac);
    return filter_positive(pairs.values, pairs.vectors);
  }

  const LiftedBqp& lifted_;
  const DualConfig& cfg_;
  bool enhanced_;
  SymmetricSpectrum neg_a_;
};

DualState run_descent(const LiftedBqp& lifted, const DualConfig& cfg,
                      Eigen::VectorXd u, bool enhanced) {
  cfg.validate();
  const int n = lifted.dim() + 1;
  if (u.size() != n) {
    throw std::invalid_argument("dual start vector must have dimension D+1");
  }
  if (enhanced && !all_entries_equal(u)) {
    throw std::invalid_argument(
        "enhanced descent requires an equal-entry start vector");
  }

  DualEvaluator eval(lifted, cfg, enhanced);
  DualState st;
  double h_final = 0.0;

  // Descent safeguard state for the surrogate line search: when the cheap
  // step fails to decrease the true objective (seen at the next gradient),
  // the step is rolled back and redone with exact evaluations.
  const bool surrogate = enhanced && cfg.surrogate_linesearch;
  bool last_was_surrogate = false;
  bool redo_exact = false;
  double damping = 0.5;  // halved on each rollback, recovers on success
  int streak = 0;
  Eigen::VectorXd u_prev;
  double h_prev = 0.0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    auto gr = eval.gradient(u);
    if (last_was_surrogate &&
        gr.h > h_prev + 1e-12 * std::max(1.0, std::abs(h_prev))) {
      u = u_prev;
      gr = eval.gradient(u);
      redo_exact = true;  // forces one exact search from the old point
      damping = std::max(damping * 0.5, 1.0 / 64.0);
      streak = 0;
    } else if (last_was_surrogate) {
      if (++streak >= 10) {
        damping = std::min(2.0 * damping, 0.5);
        streak = 0;
      }
    }
    st.phase = gr.phase;
    ++st.phase_counts[static_cast<int>(gr.phase)];
    ++st.iterations;

    const double g2 = gr.g.squaredNorm();
    double t;
    Eigen::VectorXd u_next;
    double h_next;
    if (iter == 0 && enhanced && cfg.use_initial_step &&
        gr.phase == Phase::UniformInactive) {
      t = initial_step_from_lmax(eval.neg_a().eigenvalues[0], u[0],
                                 cfg.initial_step_margin);
      u_next = u - t * gr.g;  // g = 1 in this regime
      h_next = eval.objective(u_next);
      last_was_surrogate = false;
    } else if (surrogate && !redo_exact && iter + 1 < cfg.max_iters &&
               (gr.phase == Phase::UniformSpectrum ||
                gr.phase == Phase::GeneralEigensolve)) {
      // Step priced from the eigenpairs already computed at u; the model
      // step is damped and validated against the true objective at the
      // next gradient.
      const int m = static_cast<int>(gr.spectral.all_values.size());
      Eigen::VectorXd shifts(m);
      for (int j = 0; j < m; ++j) {
        shifts[j] = gr.spectral.all_vectors.col(j)
                        .cwiseProduct(gr.spectral.all_vectors.col(j))
                        .dot(gr.g);
      }
      const double t_model = surrogate_ray_minimizer(
          gr.g.sum(), gr.spectral.all_values, shifts, cfg.gamma, 1.0);
      t = std::max(damping * t_model, 1e-12);
      u_next = u - t * gr.g;
      double penalty = 0.0;
      for (int j = 0; j < m; ++j) {
        const double lam = gr.spectral.all_values[j] + t * shifts[j];
        if (lam > kEigPositiveCutoff) penalty += lam * lam;
      }
      h_next = u.sum() - t * gr.g.sum() + 0.5 * cfg.gamma * penalty;
      last_was_surrogate = true;
    } else {
      t = 1.0;
      for (int bt = 0;; ++bt) {
        u_next = u - t * gr.g;
        h_next = eval.objective(u_next);
        if (h_next <= gr.h - cfg.armijo_alpha * t * g2 ||
            bt == kMaxBacktracks) {
          break;
        }
        t *= cfg.armijo_beta;
      }
      last_was_surrogate = false;
    }
    redo_exact = false;

    u_prev = u;
    h_prev = gr.h;
    u = u_next;
    h_final = h_next;
    if (cfg.record_iterates) {
      st.iterate_log.push_back({iter, h_next, gr.phase, t, u});
    }
    if (t * std::sqrt(g2) <= cfg.eps) {
      st.converged = true;
      break;
    }
  }

  st.u = std::move(u);
  st.h = surrogate ? dual_objective(st.u, lifted, cfg.gamma) : h_final;
  st.grad_eigensolves = eval.grad_eigensolves;
  st.ls_eigensolves = eval.ls_eigensolves;
  st.lanczos_log = std::move(eval.lanczos_log);
  if (enhanced) st.neg_a_spectrum = eval.neg_a();
  return st;
}

}  // namespace

BqpInstance::BqpInstance(Eigen::MatrixXd s, Eigen::VectorXd v_in,
                         double rho_in)
    : S(std::move(s)), v(std::move(v_in)), rho(rho_in) {
  check_symmetric(S, "BQP matrix");
  if (S.rows() != v.size()) {
    throw std::invalid_argument("BQP dimensions are inconsistent");
  }
}

double BqpInstance::objective(const IndicatorVector& psi) const {
  if (psi.dim() != dim()) {
    throw std::invalid_argument("psi dimension mismatch");
  }
  const Eigen::VectorXd x = psi.vec();
  return x.dot(S * x) - 2.0 * x.dot(v) + rho;
}

double LiftedBqp::homogenized_objective(const Eigen::VectorXd& x_tilde) const {
  return x_tilde.dot(A * x_tilde);
}

LiftedBqp lift(const BqpInstance& inst) {
  const int d = inst.dim();
  LiftedBqp out;
  out.A0 = inst.S / 4.0;
  out.a = 0.5 * inst.S.transpose() * Eigen::VectorXd::Ones(d) - inst.v;
  out.const_offset = 0.25 * inst.S.sum() - inst.v.sum();
  out.A.setZero(d + 1, d + 1);
  out.A.block(0, 1, 1, d) = 0.5 * out.a.transpose();
  out.A.block(1, 0, d, 1) = 0.5 * out.a;
  out.A.block(1, 1, d, d) = out.A0;
  return out;
}

BqpInstance build_bqp(const std::vector<SimplexVector>& thetas,
                      const std::vector<double>& ps, double ridge) {
  if (thetas.empty()) {
    throw std::invalid_argument("cannot build BQP from an empty term list");
  }
  if (thetas.size() != ps.size()) {
    throw std::invalid_argument("theta/probability list length mismatch");
  }
  if (ridge < 0.0) {
    throw std::invalid_argument("ridge must be nonnegative");
  }
  const int d = thetas.front().dim();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(d, d) * ridge;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  double rho = 0.0;
  for (size_t k = 0; k < thetas.size(); ++k) {
    if (thetas[k].dim() != d) {
      throw std::invalid_argument("theta dimension mismatch in BQP terms");
    }
    const Eigen::VectorXd& th = thetas[k].vec();
    S.noalias() += th * th.transpose();
    v.noalias() += th * ps[k];
    rho += ps[k] * ps[k];
  }
  return BqpInstance(std::move(S), std::move(v), rho);
}

void DualConfig::validate() const {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (armijo_alpha <= 0.0 || armijo_alpha >= 0.5) {
    throw std::invalid_argument("armijo_alpha must lie in (0, 0.5)");
  }
  if (armijo_beta <= 0.0 || armijo_beta >= 1.0) {
    throw std::invalid_argument("armijo_beta must lie in (0, 1)");
  }
  if (lanczos_a <= 0.0) {
    throw std::invalid_argument("lanczos control parameter must be positive");
  }
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::UniformInactive:
      return "uniform_inactive";
    case Phase::UniformSpectrum:
      return "uniform_spectrum";
    case Phase::GeneralInactive:
      return "general_inactive";
    case Phase::GeneralEigensolve:
      return "general_eigensolve";
  }
  return "unknown";
}

double dual_objective(const Eigen::VectorXd& u, const LiftedBqp& lifted,
                      double gamma) {
  if (u.size() != lifted.dim() + 1) {
    throw std::invalid_argument("dual vector must have dimension D+1");
  }
  const SymmetricSpectrum sp = exact_evd(c_matrix(lifted, u));
  return u.sum() + 0.5 * gamma * penalty_from_values(sp.eigenvalues);
}

Eigen::VectorXd dual_gradient(const Eigen::VectorXd& u, const LiftedBqp& lifted,
                              double gamma) {
  if (u.size() != lifted.dim() + 1) {
    throw std::invalid_argument("dual vector must have dimension D+1");
  }
  const SymmetricSpectrum sp = exact_evd(c_matrix(lifted, u));
  const SpectralEval ev = filter_positive(sp.eigenvalues, sp.eigenvectors);
  return gradient_from_pairs(ev, gamma, static_cast<int>(u.size()));
}

DualState solve_gd(const LiftedBqp& lifted, const DualConfig& cfg,
                   const Eigen::VectorXd& u0) {
  return run_descent(lifted, cfg, u0, /*enhanced=*/false);
}

DualState solve_enhanced_gd(const LiftedBqp& lifted, const DualConfig& cfg,
                            const Eigen::VectorXd& u0) {
  return run_descent(lifted, cfg, u0, /*enhanced=*/true);
}

double initial_step_size(const LiftedBqp& lifted, double u0, double margin) {
  const double lmax = exact_evd(-lifted.A).eigenvalues[0];
  return initial_step_from_lmax(lmax, u0, margin);
}

PositivePairs positive_eigenpairs(const LiftedBqp& lifted,
                                  const Eigen::VectorXd& u, EigMode mode,
                                  double lanczos_a,
                                  std::vector<LanczosStats>* lanczos_log) {
  const Eigen::MatrixXd C = c_matrix(lifted, u);
  SpectralEval ev;
  if (mode == EigMode::Exact) {
    const SymmetricSpectrum sp = exact_evd(C);
    ev = filter_positive(sp.eigenvalues, sp.eigenvectors);
  } else {
    const int n = static_cast<int>(C.rows());
    const TraceThreshold th = trace_threshold(C, lanczos_a);
    const Eigen::VectorXd p1 =
        Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    const LanczosFactorization fac = lanczos(C, p1, th.delta, n);
    if (lanczos_log != nullptr) {
      lanczos_log->push_back({n, fac.m, fac.beta_next, th.delta, th.sigma_ub,
                              th.sigma_lb, th.sigma_mink});
    }
    const RitzPairs pairs = ritz_pairs(fac);
    ev = filter_positive(pairs.values, pairs.vectors);
  }
  return {std::move(ev.pos_values), std::move(ev.pos_vectors)};
}

void dump_iterates_csv(const DualState& state, std::ostream& out) {
  out << "iteration,h_gamma,phase,step_size\n";
  for (const auto& rec : state.iterate_log) {
    out << rec.iteration << ',' << rec.h << ',' << phase_name(rec.phase) << ','
        << rec.step << '\n';
  }
}

}  // namespace km

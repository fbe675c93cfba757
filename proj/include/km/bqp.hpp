#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "km/eigs.hpp"
#include "km/types.hpp"

namespace km {

// Binary quadratic subproblem: minimize psi'S psi - 2 psi'v + rho over
// psi in {0,1}^D.
struct BqpInstance {
  Eigen::MatrixXd S;
  Eigen::VectorXd v;
  double rho = 0.0;

  BqpInstance(Eigen::MatrixXd s, Eigen::VectorXd v_in, double rho_in);

  int dim() const { return static_cast<int>(v.size()); }
  double objective(const IndicatorVector& psi) const;
};

// Homogenized {-1,+1} form of the BQP. With x = 2 psi - 1,
//   psi'S psi - 2 psi'v = x'A0 x + a'x + const_offset,
// and for xb = [1; x], xb'A xb = x'A0 x + a'x.
struct LiftedBqp {
  Eigen::MatrixXd A;   // (D+1) x (D+1), A(0,0) = 0
  Eigen::MatrixXd A0;  // S / 4
  Eigen::VectorXd a;   // S'1 / 2 - v
  double const_offset = 0.0;

  int dim() const { return static_cast<int>(a.size()); }
  double homogenized_objective(const Eigen::VectorXd& x_tilde) const;
};

LiftedBqp lift(const BqpInstance& inst);

// S = sum theta theta' + ridge I, v = sum theta p, rho = sum p^2.
BqpInstance build_bqp(const std::vector<SimplexVector>& thetas,
                      const std::vector<double>& ps, double ridge = 0.0);

enum class EigMode { Exact, Lanczos };

struct DualConfig {
  double gamma = 100.0;
  double eps = 1e-6;       // stop when ||t_i * du_i||_2 <= eps
  int max_iters = 5000;
  double armijo_alpha = 0.3;
  double armijo_beta = 0.5;
  EigMode eig_mode = EigMode::Exact;
  // Control parameter of the trace-based stopping threshold. The default is
  // sized so the recurrence still resolves the near-solution positive
  // eigenvalues, whose magnitudes shrink like (D+1)/gamma.
  double lanczos_a = 10.0;
  // Opt-in jump past the initial zero-penalty stretch; alters the iterate
  // sequence, so it is off by default.
  bool use_initial_step = false;
  double initial_step_margin = -1.0;  // < 0 selects 0.1 * max(1, |lmax(-A)|)
  // Evaluate backtracking trials from the current iteration's spectral data
  // (first-order eigenvalue perturbation) instead of a fresh eigensolve per
  // trial. A descent safeguard rolls the step back and redoes it with exact
  // evaluations whenever the surrogate step failed to decrease the true
  // objective. Enhanced-mode only; alters step choices, so off by default.
  bool surrogate_linesearch = false;
  bool record_iterates = false;

  void validate() const;
};

// Gradient-computation regimes of the accelerated solver.
//   UniformInactive:  u has equal entries, penalty provably zero.
//   UniformSpectrum:  u has equal entries, spectrum shifted from cached -A.
//   GeneralInactive:  entries differ, penalty certified zero by the Weyl
//                     eigenvalue-sum bound.
//   GeneralEigensolve: a fresh eigensolve of C(u) is unavoidable.
enum class Phase : int {
  UniformInactive = 0,
  UniformSpectrum = 1,
  GeneralInactive = 2,
  GeneralEigensolve = 3,
};

const char* phase_name(Phase p);

struct IterateRecord {
  int iteration = 0;
  double h = 0.0;
  Phase phase = Phase::UniformInactive;
  double step = 0.0;
  Eigen::VectorXd u;  // iterate after the step
};

// One record per Lanczos invocation inside a solve.
struct LanczosStats {
  int n = 0;  // matrix size D+1
  int m = 0;
  double beta_next = 0.0;
  double delta = 0.0;
  double sigma_ub = 0.0;
  double sigma_lb = 0.0;
  double sigma_mink = 0.0;
};

struct DualState {
  Eigen::VectorXd u;
  double h = 0.0;
  bool converged = false;
  int iterations = 0;
  Phase phase = Phase::UniformInactive;        // regime of the last iteration
  std::array<long, 4> phase_counts = {0, 0, 0, 0};
  long grad_eigensolves = 0;  // eigensolves spent on gradients
  long ls_eigensolves = 0;    // eigensolves spent on line-search trials
  SymmetricSpectrum neg_a_spectrum;            // cached spectrum of -A
  std::vector<IterateRecord> iterate_log;      // when record_iterates
  std::vector<LanczosStats> lanczos_log;

  long eigensolve_free_iterations() const {
    return phase_counts[0] + phase_counts[1] + phase_counts[2];
  }
};

// h_gamma(u) = u'1 + (gamma/2) ||Pi_+(C(u))||_F^2 with C(u) = -A - diag(u).
double dual_objective(const Eigen::VectorXd& u, const LiftedBqp& lifted,
                      double gamma);

// grad h_gamma(u) = 1 - gamma * diag(Pi_+(C(u))).
Eigen::VectorXd dual_gradient(const Eigen::VectorXd& u, const LiftedBqp& lifted,
                              double gamma);

// Descent with Armijo backtracking, every evaluation through a full exact
// eigendecomposition.
DualState solve_gd(const LiftedBqp& lifted, const DualConfig& cfg,
                   const Eigen::VectorXd& u0);

// Same iterate sequence as solve_gd from an equal-entry start, but the
// gradient reuses the cached spectrum of -A while the iterate stays
// equal-entry and skips eigensolves entirely whenever the penalty is
// certified inactive.
DualState solve_enhanced_gd(const LiftedBqp& lifted, const DualConfig& cfg,
                            const Eigen::VectorXd& u0);

// Step that moves an equal-entry start with common value u0 just past the
// point where C(u) gains a positive eigenvalue.
double initial_step_size(const LiftedBqp& lifted, double u0,
                         double margin = -1.0);

// Positive eigenpairs of C(u) under the given mode; values descending.
// Feeds the randomization factor. Appends to lanczos_log when provided.
struct PositivePairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

PositivePairs positive_eigenpairs(const LiftedBqp& lifted,
                                  const Eigen::VectorXd& u, EigMode mode,
                                  double lanczos_a = 10.0,
                                  std::vector<LanczosStats>* lanczos_log = nullptr);

// CSV rows: iteration,h_gamma,phase,step_size.
void dump_iterates_csv(const DualState& state, std::ostream& out);

}  // namespace km

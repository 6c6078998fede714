#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsidn/cube.hpp"
#include "hsidn/linops.hpp"

namespace hsidn {

/// Ablation variants. Baseline freezes both the column-structured noise
/// term (D stays 0) and the fidelity weight (W stays all-ones);
/// BaselinePlusA freezes only W; Full runs every block.
enum class Variant { Full, BaselinePlusA, Baseline };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

struct SolverParams {
  int rank = 3;                      // subspace rank R
  double tau1 = 1.0, tau2 = 1.0;     // TV weights (scalar tau sets both)
  double alpha = 1.0;                // weight-prior strength
  double beta = 1.0;                 // l1 sparse-noise weight
  double gamma = 1.0;                // l21 directional-noise weight
  std::optional<double> rho0;        // empty: 1 / sigma_max(unfold3(Y))
  double eta = 2.0;                  // penalty growth factor (>= 1)
  std::optional<double> rho_max;     // empty: 1e6 * resolved rho0
  double eps = 1e-5;                 // squared relative residual tolerance
  int max_iter = 100;
  double w_floor = 1e-3;             // safe-division floor for (S+D)/W
  Variant variant = Variant::Full;

  // Compatibility switches (defaults follow the consistent formulation).
  bool plain_u_operator = false;  // drop the tau weights from the U solve
  bool l21_bare_gamma = false;    // threshold D columns by gamma, not gamma/rho

  void set_tau(double t) { tau1 = tau2 = t; }
};

/// Throws InvalidParams / RankOutOfRange when params are unusable for an
/// MN x B problem of the given shape.
void validate_params(const SolverParams& p, Eigen::Index mn, Eigen::Index b);

struct SolverState {
  Eigen::MatrixXd u;        // MN x R
  Eigen::MatrixXd v;        // B x R, orthonormal columns
  Eigen::MatrixXd w;        // MN x B in [0,1]
  Eigen::MatrixXd s;        // MN x B sparse noise
  Eigen::MatrixXd d;        // MN x B column-structured noise
  Eigen::MatrixXd h1, h2;   // MN x R split gradients
  Eigen::MatrixXd l1, l2;   // MN x R multipliers
  Eigen::MatrixXd l3;       // MN x B multiplier
  double rho = 1.0;
  double rho_cap = 1.0;
  int iter = 0;
  int spatial_rows = 0;
  int spatial_cols = 0;

  UnfoldedMatrix coeff(const Eigen::MatrixXd& mat) const {
    return UnfoldedMatrix{mat, spatial_rows, spatial_cols};
  }
  Eigen::MatrixXd reconstruction() const { return u * v.transpose(); }
};

struct TraceRecord {
  int iter = 0;
  double res_grad1 = 0.0;    // |G1(U) - H1|_F^2 / |Y|_F^2
  double res_grad2 = 0.0;
  double res_fidelity = 0.0; // |W.(Y-UV') - S - D|_F^2 / |Y|_F^2
  double rho = 0.0;          // penalty used during the iteration
  std::optional<double> psnr_db;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  std::vector<double> iter_seconds;  // wall time per iteration (not in CSV)
};

SolverState initialize(const UnfoldedMatrix& y, const SolverParams& params);

// One ADMM block each; order in solve() is H, U, V, S, D, W, multipliers.
void update_h(SolverState& st, const SolverParams& p);
void update_u(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y,
              const DiffFilters& filters);
void update_v(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y);
void update_s(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y);
void update_d(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y);
void update_w(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y);

struct Residuals {
  Eigen::MatrixXd grad1, grad2, fidelity;
};

/// The three constraint residuals of the current state.
Residuals residuals(const SolverState& st, const UnfoldedMatrix& y);

/// Multiplier ascent with the given residuals, then rho <- min(eta*rho, cap).
void update_multipliers(SolverState& st, const SolverParams& p,
                        const Residuals& res);

enum class StopState { Continue, Converged };

StopState check_convergence(const Residuals& res, double y_sq_norm,
                            double eps);

struct SolveResult {
  HsiCube x_hat;
  HsiCube s_hat;
  HsiCube d_hat;
  HsiCube w_hat;
  IterationTrace trace;
  int iterations = 0;
  bool converged = false;
};

/// Full ADMM loop. `truth` (optional) adds per-iteration PSNR to the trace.
SolveResult solve(const HsiCube& y, const SolverParams& params,
                  const HsiCube* truth = nullptr);

/// Runs the four-variable (X,G,S,D) and three-variable (X,S,D) F-norm toy
/// solvers with the matched parameter scaling (scale = 1 + rho/(2*lambda)),
/// rho fixed, identical zero initialization, and returns the maximum over
/// iterations of |dX|_inf + |dS|_inf + |dD|_inf between the trajectories.
double toy_equivalence_check(const HsiCube& y, double tau, double lambda,
                             double beta, double gamma, double rho, int iters);

/// Table of shipped parameter presets, named <dataset>-case<k>.
SolverParams resolve_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace hsidn

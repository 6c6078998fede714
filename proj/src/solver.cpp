#include "hsidn/solver.hpp"

#include <chrono>
#include <cmath>

#include "hsidn/metrics.hpp"

namespace hsidn {

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "baseline_a") return Variant::BaselinePlusA;
  if (name == "baseline") return Variant::Baseline;
  throw InvalidParams("variant must be full|baseline_a|baseline, got '" +
                      name + "'");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::BaselinePlusA: return "baseline_a";
    case Variant::Baseline: return "baseline";
  }
  return "full";
}

void validate_params(const SolverParams& p, Eigen::Index mn, Eigen::Index b) {
  if (mn <= 0 || b <= 0) throw EmptyInput("solver input is empty");
  const auto max_rank = static_cast<int>(std::min(mn, b));
  if (p.rank < 1 || p.rank > max_rank) {
    throw RankOutOfRange("rank " + std::to_string(p.rank) + " outside [1, " +
                         std::to_string(max_rank) + "]");
  }
  if (!(p.tau1 >= 0.0) || !(p.tau2 >= 0.0))
    throw InvalidParams("tau must be nonnegative");
  if (!(p.alpha > 0.0)) throw InvalidParams("alpha must be positive");
  if (!(p.beta >= 0.0)) throw InvalidParams("beta must be nonnegative");
  if (!(p.gamma >= 0.0)) throw InvalidParams("gamma must be nonnegative");
  if (p.rho0 && !(*p.rho0 > 0.0)) throw InvalidParams("rho0 must be positive");
  if (!(p.eta >= 1.0)) throw InvalidParams("eta must be >= 1");
  if (!(p.eps > 0.0)) throw InvalidParams("eps must be positive");
  if (p.max_iter < 1) throw InvalidParams("max_iter must be >= 1");
  if (!(p.w_floor > 0.0)) throw InvalidParams("w_floor must be positive");
  if (p.rho_max && p.rho0 && *p.rho_max < *p.rho0) {
    throw InvalidParams("rho_max must be >= rho0");
  }
}

SolverState initialize(const UnfoldedMatrix& y, const SolverParams& params) {
  validate_params(params, y.data.rows(), y.data.cols());
  SolverState st;
  st.spatial_rows = y.spatial_rows;
  st.spatial_cols = y.spatial_cols;
  const TruncatedSvd svd = truncated_svd(y, params.rank);
  st.u = svd.u;
  st.v = svd.v;
  const double sigma_max = svd.sigma(0);
  if (params.rho0) {
    st.rho = *params.rho0;
  } else {
    if (sigma_max <= 0.0) throw EmptyInput("input matrix is identically zero");
    st.rho = 1.0 / sigma_max;
  }
  st.rho_cap = params.rho_max ? *params.rho_max : 1e6 * st.rho;
  st.w = Eigen::MatrixXd::Ones(y.data.rows(), y.data.cols());
  st.s = Eigen::MatrixXd::Zero(y.data.rows(), y.data.cols());
  st.d = Eigen::MatrixXd::Zero(y.data.rows(), y.data.cols());
  st.l3 = Eigen::MatrixXd::Zero(y.data.rows(), y.data.cols());
  st.h1 = grad(st.coeff(st.u), 1).data;
  st.h2 = grad(st.coeff(st.u), 2).data;
  st.l1 = Eigen::MatrixXd::Zero(st.u.rows(), st.u.cols());
  st.l2 = Eigen::MatrixXd::Zero(st.u.rows(), st.u.cols());
  st.iter = 0;
  return st;
}

namespace {

// Data-side anchor G = Y - (S+D)/W + L3/rho shared by the U and V blocks.
Eigen::MatrixXd data_anchor(const SolverState& st, const SolverParams& p,
                            const UnfoldedMatrix& y) {
  return y.data - safe_divide(st.s + st.d, st.w, p.w_floor) +
         st.l3 / st.rho;
}

}  // namespace

void update_h(SolverState& st, const SolverParams& p) {
  const Eigen::MatrixXd g1 = grad(st.coeff(st.u), 1).data;
  const Eigen::MatrixXd g2 = grad(st.coeff(st.u), 2).data;
  st.h1 = soft_threshold(g1 + st.l1 / st.rho, p.tau1 / st.rho);
  st.h2 = soft_threshold(g2 + st.l2 / st.rho, p.tau2 / st.rho);
}

void update_u(SolverState& st, const SolverParams& p, const UnfoldedMatrix& y,
              const DiffFilters& filters) {
  const double w1 = p.plain_u_operator ? 1.0 : p.tau1;
  const double w2 = p.plain_u_operator ? 1.0 : p.tau2;
  const Eigen::MatrixXd anchor = data_anchor(st, p, y);
  Eigen::MatrixXd rhs = st.rho * (anchor * st.v);
  rhs += w1 * grad_adjoint(st.coeff(st.rho * st.h1 - st.l1), 1).data;
  rhs += w2 * grad_adjoint(st.coeff(st.rho * st.h2 - st.l2), 2).data;
  st.u = fft_diag_solve_weighted(
             UnfoldedMatrix{std::move(rhs), st.spatial_rows, st.spatial_cols},
             st.rho, w1, w2, filters)
             .data;
}

void update_v(SolverState& st, const SolverParams& p,
              const UnfoldedMatrix& y) {
  const Eigen::MatrixXd anchor = data_anchor(st, p, y);
  st.v = procrustes_orthogonal(anchor.transpose() * st.u);
}

void update_s(SolverState& st, const SolverParams& p,
              const UnfoldedMatrix& y) {
  const Eigen::MatrixXd arg =
      hadamard(st.w, y.data - st.reconstruction()) - st.d + st.l3 / st.rho;
  st.s = soft_threshold(arg, p.beta / st.rho);
}

void update_d(SolverState& st, const SolverParams& p,
              const UnfoldedMatrix& y) {
  if (p.variant == Variant::Baseline) return;  // D frozen at zero
  const Eigen::MatrixXd omega =
      hadamard(st.w, y.data - st.reconstruction()) - st.s + st.l3 / st.rho;
  const double t = p.l21_bare_gamma ? p.gamma : p.gamma / st.rho;
  st.d = shrink_l21_columns(omega, t);
}

void update_w(SolverState& st, const SolverParams& p,
              const UnfoldedMatrix& y) {
  if (p.variant != Variant::Full) return;  // W frozen at the all-ones matrix
  const Eigen::MatrixXd residual = y.data - st.reconstruction();
  const Eigen::MatrixXd numer =
      p.alpha +
      (st.rho * hadamard(st.s + st.d - st.l3 / st.rho, residual)).array();
  const Eigen::MatrixXd denom =
      p.alpha + (st.rho * residual.array().square());
  st.w = (numer.array() / denom.array()).cwiseMax(0.0).cwiseMin(1.0);
}

Residuals residuals(const SolverState& st, const UnfoldedMatrix& y) {
  Residuals r;
  r.grad1 = grad(st.coeff(st.u), 1).data - st.h1;
  r.grad2 = grad(st.coeff(st.u), 2).data - st.h2;
  r.fidelity =
      hadamard(st.w, y.data - st.reconstruction()) - st.s - st.d;
  return r;
}

void update_multipliers(SolverState& st, const SolverParams& p,
                        const Residuals& res) {
  st.l1 += st.rho * res.grad1;
  st.l2 += st.rho * res.grad2;
  st.l3 += st.rho * res.fidelity;
  st.rho = std::min(p.eta * st.rho, st.rho_cap);
}

StopState check_convergence(const Residuals& res, double y_sq_norm,
                            double eps) {
  const double r1 = res.grad1.squaredNorm() / y_sq_norm;
  const double r2 = res.grad2.squaredNorm() / y_sq_norm;
  const double rf = res.fidelity.squaredNorm() / y_sq_norm;
  return (r1 <= eps && r2 <= eps && rf <= eps) ? StopState::Converged
                                               : StopState::Continue;
}

namespace {

bool state_finite(const SolverState& st) {
  return st.u.allFinite() && st.v.allFinite() && st.w.allFinite() &&
         st.s.allFinite() && st.d.allFinite() && st.h1.allFinite() &&
         st.h2.allFinite() && st.l1.allFinite() && st.l2.allFinite() &&
         st.l3.allFinite() && std::isfinite(st.rho);
}

}  // namespace

SolveResult solve(const HsiCube& y_cube, const SolverParams& params,
                  const HsiCube* truth) {
  const UnfoldedMatrix y = unfold3(y_cube);
  SolverState st = initialize(y, params);
  const DiffFilters filters(y.spatial_rows, y.spatial_cols);
  const double y_sq_norm = y.data.squaredNorm();
  if (y_sq_norm <= 0.0) throw EmptyInput("input matrix is identically zero");

  SolveResult out;
  bool converged = false;
  while (st.iter < params.max_iter && !converged) {
    const auto t0 = std::chrono::steady_clock::now();
    const double rho_used = st.rho;
    Residuals res;
    try {
      update_h(st, params);
      update_u(st, params, y, filters);
      update_v(st, params, y);
      update_s(st, params, y);
      update_d(st, params, y);
      update_w(st, params, y);
      res = residuals(st, y);
    } catch (const NonFiniteData&) {
      throw NonFiniteState("solver state became non-finite at iteration " +
                           std::to_string(st.iter + 1));
    }
    update_multipliers(st, params, res);
    st.iter += 1;
    if (!state_finite(st)) {
      throw NonFiniteState("solver state became non-finite at iteration " +
                           std::to_string(st.iter));
    }
    converged = check_convergence(res, y_sq_norm, params.eps) ==
                StopState::Converged;

    TraceRecord rec;
    rec.iter = st.iter;
    rec.res_grad1 = res.grad1.squaredNorm() / y_sq_norm;
    rec.res_grad2 = res.grad2.squaredNorm() / y_sq_norm;
    rec.res_fidelity = res.fidelity.squaredNorm() / y_sq_norm;
    rec.rho = rho_used;
    if (truth) {
      const HsiCube x = fold3(
          UnfoldedMatrix{st.reconstruction(), st.spatial_rows, st.spatial_cols});
      rec.psnr_db = psnr(*truth, x);
    }
    out.trace.records.push_back(rec);
    out.trace.iter_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());
  }

  out.x_hat = fold3(
      UnfoldedMatrix{st.reconstruction(), st.spatial_rows, st.spatial_cols});
  out.s_hat = fold3(UnfoldedMatrix{st.s, st.spatial_rows, st.spatial_cols});
  out.d_hat = fold3(UnfoldedMatrix{st.d, st.spatial_rows, st.spatial_cols});
  out.w_hat = fold3(UnfoldedMatrix{st.w, st.spatial_rows, st.spatial_cols});
  out.iterations = st.iter;
  out.converged = converged;
  return out;
}

// ---------------------------------------------------------------------------
// F-norm toy models certifying the noise-prior-reduction equivalence.
// ---------------------------------------------------------------------------

namespace {

struct ToyState {
  Eigen::MatrixXd x, s, d, lambda;
};

ToyState toy_zero_state(Eigen::Index rows, Eigen::Index cols) {
  ToyState st;
  st.x = Eigen::MatrixXd::Zero(rows, cols);
  st.s = Eigen::MatrixXd::Zero(rows, cols);
  st.d = Eigen::MatrixXd::Zero(rows, cols);
  st.lambda = Eigen::MatrixXd::Zero(rows, cols);
  return st;
}

// Shared iteration core: S, D, X proxes against an effective penalty
// rho_eff, then dual ascent with step rho on the (X,S,D) residual.
void toy_step(ToyState& st, const Eigen::MatrixXd& y, double tau, double beta,
              double gamma, double rho, double rho_eff) {
  st.s = soft_threshold(y - st.x - st.d + st.lambda / rho, beta / rho_eff);
  st.d = shrink_l21_columns(y - st.x - st.s + st.lambda / rho,
                            gamma / rho_eff);
  st.x = (rho_eff / (2.0 * tau + rho_eff)) *
         (y - st.s - st.d + st.lambda / rho);
  st.lambda += rho * (y - st.x - st.s - st.d);
}

}  // namespace

double toy_equivalence_check(const HsiCube& y_cube, double tau, double lambda,
                             double beta, double gamma, double rho,
                             int iters) {
  if (!(tau > 0.0) || !(lambda > 0.0) || !(beta > 0.0) || !(gamma > 0.0) ||
      !(rho > 0.0)) {
    throw NonpositiveParameter("toy model parameters must be positive");
  }
  if (iters < 1) throw NonpositiveParameter("iters must be >= 1");

  const Eigen::MatrixXd y = unfold3(y_cube).data;

  // Four-variable model: the Gaussian block G is minimized exactly inside
  // every subproblem, shrinking the effective penalty to rho*k with
  // k = 2*lambda/(2*lambda + rho); dual ascent happens in the marginalized
  // space, which in the original multiplier reads L += rho*(Y-X-S-D).
  const double k = 2.0 * lambda / (2.0 * lambda + rho);
  ToyState four = toy_zero_state(y.rows(), y.cols());

  // Three-variable model with the scaled parameters of the reduction.
  const double scale = 1.0 + rho / (2.0 * lambda);
  const double tau_t = scale * tau;
  const double beta_t = scale * beta;
  const double gamma_t = scale * gamma;
  ToyState three = toy_zero_state(y.rows(), y.cols());

  double worst = 0.0;
  for (int it = 0; it < iters; ++it) {
    toy_step(four, y, tau, beta, gamma, rho, rho * k);
    toy_step(three, y, tau_t, beta_t, gamma_t, rho, rho);
    const double gap = (four.x - three.x).cwiseAbs().maxCoeff() +
                       (four.s - three.s).cwiseAbs().maxCoeff() +
                       (four.d - three.d).cwiseAbs().maxCoeff();
    worst = std::max(worst, gap);
  }
  return worst;
}

}  // namespace hsidn

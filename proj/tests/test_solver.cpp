#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsidn/noise.hpp"
#include "hsidn/metrics.hpp"
#include "hsidn/solver.hpp"
#include "test_util.hpp"

using namespace hsidn;

namespace {

UnfoldedMatrix wrap(const Eigen::MatrixXd& data, int m, int n) {
  return UnfoldedMatrix{data, m, n};
}

SolverState random_state(int m, int n, int bands, int rank,
                         std::uint64_t seed, double rho = 0.8) {
  std::mt19937_64 rng(seed);
  SolverState st;
  st.spatial_rows = m;
  st.spatial_cols = n;
  const Eigen::Index mn = static_cast<Eigen::Index>(m) * n;
  st.u = testutil::random_matrix(mn, rank, rng());
  st.v = testutil::random_orthonormal(bands, rank, rng);
  st.w = testutil::random_matrix(mn, bands, rng(), 0.2, 1.0);
  st.s = testutil::random_matrix(mn, bands, rng(), -0.3, 0.3);
  st.d = testutil::random_matrix(mn, bands, rng(), -0.3, 0.3);
  st.h1 = testutil::random_matrix(mn, rank, rng(), -0.5, 0.5);
  st.h2 = testutil::random_matrix(mn, rank, rng(), -0.5, 0.5);
  st.l1 = testutil::random_matrix(mn, rank, rng(), -0.2, 0.2);
  st.l2 = testutil::random_matrix(mn, rank, rng(), -0.2, 0.2);
  st.l3 = testutil::random_matrix(mn, bands, rng(), -0.2, 0.2);
  st.rho = rho;
  st.rho_cap = 1e6;
  return st;
}

double l21_norm(const Eigen::MatrixXd& m) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) total += m.col(j).norm();
  return total;
}

// Augmented Lagrangian with the standard (unweighted) quadratic penalties;
// identical to the tau-scaled printed form when tau1 = tau2 = 1.
double lagrangian(const SolverState& st, const SolverParams& p,
                  const UnfoldedMatrix& y) {
  const Eigen::MatrixXd g1 = grad(st.coeff(st.u), 1).data;
  const Eigen::MatrixXd g2 = grad(st.coeff(st.u), 2).data;
  const Eigen::MatrixXd fid =
      hadamard(st.w, y.data - st.reconstruction()) - st.s - st.d;
  double total = p.tau1 * st.h1.cwiseAbs().sum() +
                 p.tau2 * st.h2.cwiseAbs().sum() +
                 p.beta * st.s.cwiseAbs().sum() + p.gamma * l21_norm(st.d);
  total += 0.5 * p.alpha *
           (Eigen::MatrixXd::Ones(st.w.rows(), st.w.cols()) - st.w)
               .squaredNorm();
  total += 0.5 * st.rho * (g1 - st.h1 + st.l1 / st.rho).squaredNorm();
  total += 0.5 * st.rho * (g2 - st.h2 + st.l2 / st.rho).squaredNorm();
  total += 0.5 * st.rho * (fid + st.l3 / st.rho).squaredNorm();
  return total;
}

}  // namespace

// ------------------------------------------------------------------ init

TEST_CASE("initialize: exact rank-r input reproduces y at iteration 0") {
  const HsiCube cube = testutil::synthetic_rank3_cube(12, 10, 8, 5);
  const UnfoldedMatrix y = unfold3(cube);
  SolverParams p;
  p.rank = 3;
  const SolverState st = initialize(y, p);
  CHECK((st.u * st.v.transpose() - y.data).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("initialize: auto rho is the inverse spectral norm") {
  // Rank-1 matrix with singular value exactly 4.
  Eigen::MatrixXd u0 = Eigen::MatrixXd::Zero(6, 1);
  u0(0, 0) = 4.0;
  Eigen::MatrixXd v0 = Eigen::MatrixXd::Zero(3, 1);
  v0(0, 0) = 1.0;
  const Eigen::MatrixXd y = u0 * v0.transpose();
  SolverParams p;
  p.rank = 1;
  const SolverState st = initialize(wrap(y, 2, 3), p);
  CHECK(st.rho == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(st.rho_cap == doctest::Approx(0.25e6).epsilon(1e-12));
}

TEST_CASE("initialize: cold-start values") {
  const HsiCube cube = testutil::random_cube(6, 5, 4, 17);
  SolverParams p;
  p.rank = 2;
  const SolverState st = initialize(unfold3(cube), p);
  CHECK((st.w.array() == 1.0).all());
  CHECK(st.s.norm() == 0.0);
  CHECK(st.d.norm() == 0.0);
  CHECK(st.l1.norm() == 0.0);
  CHECK(st.l2.norm() == 0.0);
  CHECK(st.l3.norm() == 0.0);
  CHECK(st.iter == 0);
  // H starts at the gradient of U.
  CHECK((st.h1 - grad(st.coeff(st.u), 1).data).norm() == 0.0);
  // V has orthonormal columns.
  CHECK((st.v.transpose() * st.v - Eigen::MatrixXd::Identity(2, 2)).norm() <
        1e-10);
  SolverParams bad = p;
  bad.rank = 99;
  CHECK_THROWS_AS(initialize(unfold3(cube), bad), RankOutOfRange);
}

// ------------------------------------------------------------------ blocks

TEST_CASE("update_h: zero threshold passes the argument through") {
  SolverState st = random_state(4, 5, 3, 2, 1);
  SolverParams p;
  p.set_tau(0.0);
  SolverState before = st;
  update_h(st, p);
  const Eigen::MatrixXd expect1 =
      grad(before.coeff(before.u), 1).data + before.l1 / before.rho;
  CHECK((st.h1 - expect1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("update_h: constant coefficient maps give zero gradients") {
  SolverState st = random_state(4, 5, 3, 2, 2);
  st.u.setConstant(0.4);
  st.l1.setZero();
  st.l2.setZero();
  SolverParams p;
  p.set_tau(0.3);
  update_h(st, p);
  CHECK(st.h1.norm() == 0.0);
  CHECK(st.h2.norm() == 0.0);
}

TEST_CASE("update_h: entries match the scalar prox oracle") {
  SolverState st = random_state(3, 4, 3, 2, 3);
  SolverParams p;
  p.tau1 = 0.21;
  p.tau2 = 0.12;
  const Eigen::MatrixXd arg1 =
      grad(st.coeff(st.u), 1).data + st.l1 / st.rho;
  update_h(st, p);
  for (Eigen::Index i = 0; i < st.h1.rows(); ++i) {
    for (Eigen::Index j = 0; j < st.h1.cols(); ++j) {
      CHECK(st.h1(i, j) == doctest::Approx(testutil::scalar_soft_oracle(
                                arg1(i, j), p.tau1 / st.rho))
                                .epsilon(1e-6));
    }
  }
}

TEST_CASE("update_u: matches a dense solve of the weighted normal equations") {
  const int m = 4, n = 4, bands = 2, rank = 2;
  SolverState st = random_state(m, n, bands, rank, 4);
  st.s.setZero();
  st.d.setZero();
  st.l3.setZero();
  st.w.setOnes();
  st.h1 = grad(st.coeff(st.u), 1).data;
  st.h2 = grad(st.coeff(st.u), 2).data;
  st.l1.setZero();
  st.l2.setZero();
  const Eigen::MatrixXd y = testutil::random_matrix(m * n, bands, 44);
  SolverParams p;
  p.tau1 = 1.3;
  p.tau2 = 0.8;

  const Eigen::MatrixXd d1 = testutil::dense_circulant_diff(m, n, 1);
  const Eigen::MatrixXd d2 = testutil::dense_circulant_diff(m, n, 2);
  const Eigen::MatrixXd normal =
      st.rho * Eigen::MatrixXd::Identity(m * n, m * n) +
      st.rho * (p.tau1 * d1.transpose() * d1 + p.tau2 * d2.transpose() * d2);
  const Eigen::MatrixXd rhs =
      st.rho * (y * st.v) +
      p.tau1 * d1.transpose() * (st.rho * st.h1) +
      p.tau2 * d2.transpose() * (st.rho * st.h2);
  const Eigen::MatrixXd dense = normal.lu().solve(rhs);

  const DiffFilters filters(m, n);
  update_u(st, p, wrap(y, m, n), filters);
  CHECK((st.u - dense).cwiseAbs().maxCoeff() < 1e-10);

  // Fixed point: feeding the dense solution back returns it unchanged.
  SolverState fixed = st;
  fixed.u = dense;
  fixed.h1 = grad(fixed.coeff(dense), 1).data;
  fixed.h2 = grad(fixed.coeff(dense), 2).data;
  // The H-coupling must match the state the dense solve assumed.
  const Eigen::MatrixXd rhs2 =
      st.rho * (y * fixed.v) +
      p.tau1 * d1.transpose() * (st.rho * fixed.h1) +
      p.tau2 * d2.transpose() * (st.rho * fixed.h2);
  const Eigen::MatrixXd dense2 = normal.lu().solve(rhs2);
  update_u(fixed, p, wrap(y, m, n), filters);
  CHECK((fixed.u - dense2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("update_u: constant data with zero couplings stays constant") {
  const int m = 5, n = 6, bands = 3, rank = 2;
  SolverState st = random_state(m, n, bands, rank, 5);
  st.s.setZero();
  st.d.setZero();
  st.l3.setZero();
  st.w.setOnes();
  st.h1.setZero();
  st.h2.setZero();
  st.l1.setZero();
  st.l2.setZero();
  Eigen::MatrixXd y(m * n, bands);
  for (int b = 0; b < bands; ++b) y.col(b).setConstant(0.2 + 0.1 * b);
  SolverParams p;
  const DiffFilters filters(m, n);
  update_u(st, p, wrap(y, m, n), filters);
  for (int r = 0; r < rank; ++r) {
    const double first = st.u(0, r);
    CHECK((st.u.col(r).array() - first).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("update_u: zero data and couplings give zero") {
  const int m = 3, n = 3;
  SolverState st = random_state(m, n, 2, 1, 6);
  st.s.setZero();
  st.d.setZero();
  st.l3.setZero();
  st.w.setOnes();
  st.h1.setZero();
  st.h2.setZero();
  st.l1.setZero();
  st.l2.setZero();
  const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m * n, 2);
  const DiffFilters filters(m, n);
  SolverParams p;
  update_u(st, p, wrap(y, m, n), filters);
  CHECK(st.u.norm() == 0.0);
}

TEST_CASE("update_v: identity and scaled-rotation anchors") {
  const int m = 2, n = 3, bands = 4, rank = 4;
  SolverState st = random_state(m, n, bands, rank, 7);
  st.s.setZero();
  st.d.setZero();
  st.l3.setZero();
  st.w.setOnes();
  // Anchor equals U itself with orthonormal U columns: anchor' * U = I.
  std::mt19937_64 rng(71);
  st.u = testutil::random_orthonormal(m * n, rank, rng);
  SolverParams p;
  update_v(st, p, wrap(st.u, m, n));
  CHECK((st.v - Eigen::MatrixXd::Identity(rank, rank)).cwiseAbs().maxCoeff() <
        1e-10);

  // Anchor = 2.5*U*Q makes anchor'*U = 2.5*Q', so V = Q'.
  const Eigen::MatrixXd q = testutil::random_orthonormal(rank, rank, rng);
  update_v(st, p, wrap(2.5 * st.u * q, m, n));
  CHECK((st.v - q.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("update_v: never beaten by random orthonormal competitors") {
  const int m = 4, n = 4, bands = 5, rank = 2;
  SolverState st = random_state(m, n, bands, rank, 8);
  const Eigen::MatrixXd y = testutil::random_matrix(m * n, bands, 88);
  SolverParams p;
  const Eigen::MatrixXd anchor =
      y - safe_divide(st.s + st.d, st.w, p.w_floor) + st.l3 / st.rho;
  update_v(st, p, wrap(y, m, n));
  CHECK((st.v.transpose() * st.v - Eigen::MatrixXd::Identity(rank, rank))
            .norm() < 1e-10);
  const double best = (anchor.transpose() * (st.u * st.v.transpose())).trace();
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::MatrixXd q = testutil::random_orthonormal(bands, rank, rng);
    const double other =
        (anchor.transpose() * (st.u * q.transpose())).trace();
    CHECK(other <= best + 1e-9);
  }
}

TEST_CASE("update_s: full shrinkage and passthrough") {
  SolverState st = random_state(4, 4, 3, 2, 9);
  const Eigen::MatrixXd y = testutil::random_matrix(16, 3, 99);
  const Eigen::MatrixXd arg =
      hadamard(st.w, y - st.u * st.v.transpose()) - st.d + st.l3 / st.rho;
  SolverParams p;
  p.beta = st.rho * arg.cwiseAbs().maxCoeff() + 1.0;
  SolverState big = st;
  update_s(big, p, wrap(y, 4, 4));
  CHECK(big.s.norm() == 0.0);
  p.beta = 0.0;
  SolverState zero = st;
  update_s(zero, p, wrap(y, 4, 4));
  CHECK((zero.s - arg).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("update_s: entries match the scalar prox oracle") {
  SolverState st = random_state(3, 5, 4, 2, 10);
  const Eigen::MatrixXd y = testutil::random_matrix(15, 4, 101);
  SolverParams p;
  p.beta = 0.4;
  const Eigen::MatrixXd arg =
      hadamard(st.w, y - st.u * st.v.transpose()) - st.d + st.l3 / st.rho;
  update_s(st, p, wrap(y, 3, 5));
  for (Eigen::Index i = 0; i < st.s.rows(); ++i) {
    for (Eigen::Index j = 0; j < st.s.cols(); ++j) {
      CHECK(st.s(i, j) == doctest::Approx(testutil::scalar_soft_oracle(
                               arg(i, j), p.beta / st.rho))
                               .epsilon(1e-6));
    }
  }
}

TEST_CASE("update_d: gamma extremes and the dominant-column case") {
  const int m = 4, n = 4, bands = 4, rank = 2;
  SolverState st = random_state(m, n, bands, rank, 11);
  st.s.setZero();
  st.l3.setZero();
  st.w.setOnes();
  // y = UV' + E with one dominant column in E.
  Eigen::MatrixXd e = 0.01 * testutil::random_matrix(m * n, bands, 111);
  e.col(2) = testutil::random_matrix(m * n, 1, 112, 0.8, 1.2);
  const Eigen::MatrixXd y = st.u * st.v.transpose() + e;

  SolverParams p;
  p.gamma = 0.0;
  SolverState pass = st;
  update_d(pass, p, wrap(y, m, n));
  CHECK((pass.d - e).cwiseAbs().maxCoeff() < 1e-12);  // identity prox

  p.gamma = 1e9;
  SolverState crush = st;
  update_d(crush, p, wrap(y, m, n));
  CHECK(crush.d.norm() == 0.0);

  // Threshold between the dominant column norm and the small ones.
  const double big_norm = e.col(2).norm();
  p.gamma = st.rho * 0.5 * big_norm;
  SolverState mid = st;
  update_d(mid, p, wrap(y, m, n));
  for (int j = 0; j < bands; ++j) {
    if (j == 2) {
      const double t = p.gamma / st.rho;
      CHECK((mid.d.col(2) - (1.0 - t / big_norm) * e.col(2)).norm() < 1e-10);
      CHECK(mid.d.col(2).norm() ==
            doctest::Approx(testutil::radial_l21_oracle(big_norm, t))
                .epsilon(1e-6));
    } else {
      CHECK(mid.d.col(j).norm() == 0.0);
    }
  }
}

TEST_CASE("update_d: bare-gamma compatibility flag changes the threshold") {
  SolverState st = random_state(3, 3, 3, 2, 12, /*rho=*/4.0);
  const Eigen::MatrixXd y = testutil::random_matrix(9, 3, 113);
  SolverParams p;
  p.gamma = 1.1;
  SolverState scaled = st;
  update_d(scaled, p, wrap(y, 3, 3));
  p.l21_bare_gamma = true;
  SolverState bare = st;
  update_d(bare, p, wrap(y, 3, 3));
  const Eigen::MatrixXd omega =
      hadamard(st.w, y - st.u * st.v.transpose()) - st.s + st.l3 / st.rho;
  CHECK((scaled.d - shrink_l21_columns(omega, p.gamma / st.rho)).norm() == 0.0);
  CHECK((bare.d - shrink_l21_columns(omega, p.gamma)).norm() == 0.0);
}

TEST_CASE("update_w: zero residual keeps the all-ones weight") {
  SolverState st = random_state(4, 4, 3, 2, 13);
  const Eigen::MatrixXd y = st.u * st.v.transpose();  // residual is zero
  SolverParams p;
  update_w(st, p, wrap(y, 4, 4));
  CHECK((st.w.array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("update_w: huge alpha pins the weight to one") {
  SolverState st = random_state(5, 4, 3, 2, 14);
  const Eigen::MatrixXd y = testutil::random_matrix(20, 3, 141);
  SolverParams p;
  p.alpha = 1e9;
  update_w(st, p, wrap(y, 5, 4));
  CHECK((st.w.array() - 1.0).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("update_w: entries minimize the clamped scalar quadratic") {
  SolverState st = random_state(4, 5, 3, 2, 15);
  const Eigen::MatrixXd y = testutil::random_matrix(20, 3, 151);
  SolverParams p;
  p.alpha = 0.7;
  const Eigen::MatrixXd residual = y - st.u * st.v.transpose();
  const Eigen::MatrixXd target = st.s + st.d - st.l3 / st.rho;
  const double rho = st.rho;
  update_w(st, p, wrap(y, 4, 5));
  for (Eigen::Index i = 0; i < st.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < st.w.cols(); ++j) {
      const double r = residual(i, j), s = target(i, j);
      const double wstar = testutil::golden_min(
          [&](double w) {
            return 0.5 * rho * (w * r - s) * (w * r - s) +
                   0.5 * p.alpha * (1.0 - w) * (1.0 - w);
          },
          0.0, 1.0);
      CHECK(st.w(i, j) == doctest::Approx(wstar).epsilon(1e-6));
      CHECK(st.w(i, j) >= 0.0);
      CHECK(st.w(i, j) <= 1.0);
    }
  }
}

TEST_CASE("update_multipliers: feasible state doubles rho only") {
  SolverState st = random_state(4, 4, 3, 2, 16, /*rho=*/1.5);
  const Eigen::MatrixXd y = testutil::random_matrix(16, 3, 161);
  Residuals res;
  res.grad1 = Eigen::MatrixXd::Zero(16, 2);
  res.grad2 = Eigen::MatrixXd::Zero(16, 2);
  res.fidelity = Eigen::MatrixXd::Zero(16, 3);
  SolverParams p;  // eta = 2
  const Eigen::MatrixXd l3_before = st.l3;
  update_multipliers(st, p, res);
  CHECK((st.l3 - l3_before).norm() == 0.0);
  CHECK(st.rho == doctest::Approx(3.0));

  p.eta = 1.0;
  const double rho_before = st.rho;
  update_multipliers(st, p, res);
  CHECK(st.rho == rho_before);
}

TEST_CASE("update_multipliers: dual step equals rho times the residual") {
  SolverState st = random_state(4, 4, 3, 2, 17, /*rho=*/0.9);
  const UnfoldedMatrix y = wrap(testutil::random_matrix(16, 3, 171), 4, 4);
  const Residuals res = residuals(st, y);
  const Eigen::MatrixXd l3_before = st.l3;
  SolverParams p;
  update_multipliers(st, p, res);
  CHECK((st.l3 - l3_before - 0.9 * res.fidelity).cwiseAbs().maxCoeff() <
        1e-14);
  // The cap binds.
  st.rho = st.rho_cap;
  update_multipliers(st, p, res);
  CHECK(st.rho == st.rho_cap);
}

TEST_CASE("check_convergence thresholds") {
  Residuals res;
  res.grad1 = Eigen::MatrixXd::Zero(4, 2);
  res.grad2 = Eigen::MatrixXd::Zero(4, 2);
  res.fidelity = Eigen::MatrixXd::Zero(4, 2);
  CHECK(check_convergence(res, 1.0, 1e-5) == StopState::Converged);
  // One residual at twice the tolerance (squared relative) fails.
  res.grad1.setConstant(std::sqrt(2e-5 / 8.0));
  CHECK(res.grad1.squaredNorm() == doctest::Approx(2e-5));
  CHECK(check_convergence(res, 1.0, 1e-5) == StopState::Continue);
}

// ------------------------------------------------------------------ solve

TEST_CASE("solve: noiseless rank-r input is recovered exactly") {
  const HsiCube cube = testutil::synthetic_rank3_cube(16, 14, 8, 23);
  SolverParams p;
  p.rank = 3;
  p.set_tau(0.0);
  p.beta = 0.0;
  p.gamma = 0.0;
  p.max_iter = 30;
  const SolveResult result = solve(cube, p);
  const UnfoldedMatrix y = unfold3(cube);
  const UnfoldedMatrix x = unfold3(result.x_hat);
  CHECK((x.data - y.data).norm() <= 1e-6 * y.data.norm());
  CHECK(result.converged);
}

TEST_CASE("solve: per-iteration invariants and stopping certificate") {
  const HsiCube clean = testutil::synthetic_rank3_cube(32, 32, 8, 29);
  const auto [noisy, spec] = apply_case(clean, 5, 2025);
  SolverParams p;
  p.rank = 3;
  p.set_tau(1.0);
  p.beta = 1.0;
  p.gamma = 1.0;
  p.max_iter = 40;
  const SolveResult result = solve(noisy, p);
  CHECK(result.trace.records.size() == static_cast<std::size_t>(result.iterations));
  double prev_rho = 0.0;
  for (const auto& rec : result.trace.records) {
    CHECK(rec.rho >= prev_rho);
    prev_rho = rec.rho;
  }
  // W stays in [0,1].
  const UnfoldedMatrix w = unfold3(result.w_hat);
  CHECK(w.data.minCoeff() >= 0.0);
  CHECK(w.data.maxCoeff() <= 1.0);
  // If converged, the recomputed residuals stay under eps.
  if (result.converged) {
    const auto& last = result.trace.records.back();
    CHECK(last.res_grad1 <= p.eps);
    CHECK(last.res_grad2 <= p.eps);
    CHECK(last.res_fidelity <= p.eps);
  }
}

TEST_CASE("solve: variant contract freezes W and D") {
  const HsiCube clean = testutil::synthetic_rank3_cube(24, 24, 6, 31);
  const auto [noisy, spec] = apply_case(clean, 5, 77);
  SolverParams p;
  p.rank = 3;
  p.set_tau(1.0);
  p.beta = 1.0;
  p.gamma = 1.0;
  p.max_iter = 12;
  p.variant = Variant::Baseline;
  const SolveResult base = solve(noisy, p);
  CHECK(unfold3(base.w_hat).data.isOnes());
  CHECK(unfold3(base.d_hat).data.norm() == 0.0);
  p.variant = Variant::BaselinePlusA;
  const SolveResult plus_a = solve(noisy, p);
  CHECK(unfold3(plus_a.w_hat).data.isOnes());
  CHECK(unfold3(plus_a.d_hat).data.norm() > 0.0);
}

TEST_CASE("solve: trace carries PSNR only when truth is given") {
  const HsiCube clean = testutil::synthetic_rank3_cube(16, 16, 6, 37);
  const auto [noisy, spec] = apply_case(clean, 1, 5);
  SolverParams p;
  p.rank = 3;
  p.max_iter = 3;
  p.eps = 1e-12;
  const SolveResult without = solve(noisy, p);
  CHECK_FALSE(without.trace.records.front().psnr_db.has_value());
  const SolveResult with = solve(noisy, p, &clean);
  CHECK(with.trace.records.front().psnr_db.has_value());
  CHECK(std::isfinite(*with.trace.records.front().psnr_db));
}

TEST_CASE("solve: non-finite states are reported with the iteration") {
  const HsiCube clean = testutil::synthetic_rank3_cube(12, 12, 6, 41);
  SolverParams p;
  p.rank = 2;
  p.rho0 = 1e308;  // forces overflow in the first multiplier ascent
  p.rho_max = 1e308;
  p.max_iter = 5;
  CHECK_THROWS_AS(solve(clean, p), NonFiniteState);
}

// ---------------------------------------------------- block-wise descent

TEST_CASE("each closed-form block does not increase the augmented Lagrangian") {
  // tau = 1 so the printed penalty scaling and the standard form agree; the
  // U and V checks run on all-ones-W states where their closed forms solve
  // the exact subproblem (the W-weighted fidelity equals the anchored form).
  const int m = 6, n = 5, bands = 4, rank = 2;
  const UnfoldedMatrix y = wrap(testutil::random_matrix(m * n, bands, 43), m, n);
  const DiffFilters filters(m, n);
  SolverParams p;
  p.set_tau(1.0);
  p.beta = 0.6;
  p.gamma = 0.8;
  p.alpha = 1.0;
  std::mt19937_64 seeds(431);
  for (int trial = 0; trial < 25; ++trial) {
    SolverState st = random_state(m, n, bands, rank, seeds(), 0.7);

    SolverState s1 = st;
    const double before_h = lagrangian(s1, p, y);
    update_h(s1, p);
    CHECK(lagrangian(s1, p, y) <= before_h + 1e-9);

    SolverState s2 = st;
    const double before_s = lagrangian(s2, p, y);
    update_s(s2, p, y);
    CHECK(lagrangian(s2, p, y) <= before_s + 1e-9);

    SolverState s3 = st;
    const double before_d = lagrangian(s3, p, y);
    update_d(s3, p, y);
    CHECK(lagrangian(s3, p, y) <= before_d + 1e-9);

    SolverState s4 = st;
    const double before_w = lagrangian(s4, p, y);
    update_w(s4, p, y);
    CHECK(lagrangian(s4, p, y) <= before_w + 1e-9);

    SolverState s5 = st;
    s5.w.setOnes();
    const double before_u = lagrangian(s5, p, y);
    update_u(s5, p, y, filters);
    CHECK(lagrangian(s5, p, y) <= before_u + 1e-9);

    SolverState s6 = st;
    s6.w.setOnes();
    const double before_v = lagrangian(s6, p, y);
    update_v(s6, p, y);
    CHECK(lagrangian(s6, p, y) <= before_v + 1e-9);
  }
}

// ------------------------------------------------------------------ toys

TEST_CASE("toy equivalence: spec point (1,1,1,1,2) over 20 iterations") {
  const HsiCube y = testutil::random_cube(8, 8, 3, 47, 0.0, 1.0);
  const double gap = toy_equivalence_check(y, 1.0, 1.0, 1.0, 1.0, 2.0, 20);
  CHECK(gap <= 1e-12);
}

TEST_CASE("toy equivalence: huge lambda collapses the scaling to one") {
  const HsiCube y = testutil::random_cube(8, 8, 3, 53, 0.0, 1.0);
  CHECK(toy_equivalence_check(y, 0.7, 1e12, 0.9, 1.1, 1.5, 10) <= 1e-12);
}

TEST_CASE("toy equivalence: zero input stays identically zero") {
  const HsiCube y(6, 6, 3);
  CHECK(toy_equivalence_check(y, 1.0, 1.0, 1.0, 1.0, 2.0, 8) == 0.0);
}

TEST_CASE("toy equivalence: rejects nonpositive parameters") {
  const HsiCube y = testutil::random_cube(4, 4, 2, 59);
  CHECK_THROWS_AS(toy_equivalence_check(y, 0.0, 1, 1, 1, 1, 5),
                  NonpositiveParameter);
  CHECK_THROWS_AS(toy_equivalence_check(y, 1, -1, 1, 1, 1, 5),
                  NonpositiveParameter);
  CHECK_THROWS_AS(toy_equivalence_check(y, 1, 1, 1, 1, 1, 0),
                  NonpositiveParameter);
}

// ------------------------------------------------------------------ params

TEST_CASE("parameter validation") {
  SolverParams p;
  CHECK_THROWS_AS(validate_params(p, 0, 5), EmptyInput);
  p.rank = 10;
  CHECK_THROWS_AS(validate_params(p, 100, 5), RankOutOfRange);
  p.rank = 3;
  p.eta = 0.5;
  CHECK_THROWS_AS(validate_params(p, 100, 5), InvalidParams);
  p.eta = 1.0;  // constant-rho mode is allowed
  validate_params(p, 100, 5);
  p.eps = 0.0;
  CHECK_THROWS_AS(validate_params(p, 100, 5), InvalidParams);
  p.eps = 1e-5;
  p.alpha = 0.0;
  CHECK_THROWS_AS(validate_params(p, 100, 5), InvalidParams);
}

TEST_CASE("variant names round trip") {
  for (const auto v :
       {Variant::Full, Variant::BaselinePlusA, Variant::Baseline}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("fancy"), InvalidParams);
}

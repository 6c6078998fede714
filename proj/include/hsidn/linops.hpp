#pragma once

#include <Eigen/Dense>

#include "hsidn/cube.hpp"

namespace hsidn {

/// Periodic first-difference filters for an M x N grid and their cached
/// frequency responses. F1 differences along rows (vertical), F2 along
/// columns (horizontal). |F(F1)|^2 + |F(F2)|^2 vanishes only at the zero
/// frequency, which is what makes the rho-shifted normal operator invertible.
class DiffFilters {
 public:
  DiffFilters(int spatial_rows, int spatial_cols);

  int spatial_rows() const { return rows_; }
  int spatial_cols() const { return cols_; }

  /// Zero-padded M x N kernel images (wrap-around placement).
  const Eigen::MatrixXd& f1() const { return f1_; }
  const Eigen::MatrixXd& f2() const { return f2_; }

  const Eigen::MatrixXcd& f1_spectrum() const { return f1_hat_; }
  const Eigen::MatrixXcd& f2_spectrum() const { return f2_hat_; }

  /// |F(F1)|^2 and |F(F2)|^2 on the full frequency grid.
  const Eigen::MatrixXd& f1_power() const { return f1_pow_; }
  const Eigen::MatrixXd& f2_power() const { return f2_pow_; }

 private:
  int rows_;
  int cols_;
  Eigen::MatrixXd f1_, f2_;
  Eigen::MatrixXcd f1_hat_, f2_hat_;
  Eigen::MatrixXd f1_pow_, f2_pow_;
};

/// Forward difference with periodic wrap, per column (band):
/// axis 1: out(m,n) = u(m+1 mod M, n) - u(m,n); axis 2 analogously in n.
UnfoldedMatrix grad(const UnfoldedMatrix& u, int axis);

/// Exact adjoint of grad: <grad(u), v> = <u, grad_adjoint(v)>.
UnfoldedMatrix grad_adjoint(const UnfoldedMatrix& v, int axis);

/// Element-wise sign(x) * max(|x| - t, 0); the prox of t*||.||_1.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& x, double t);

/// Column-wise max(1 - t/||col||_2, 0) * col; the prox of t*||.||_{2,1}.
/// Columns with norm <= t collapse to zero.
Eigen::MatrixXd shrink_l21_columns(const Eigen::MatrixXd& omega, double t);

/// Solves (rho*I + rho*(w1*G1'G1 + w2*G2'G2)) U = rhs band-by-band through
/// the FFT diagonalization of the periodic difference operators Gi.
UnfoldedMatrix fft_diag_solve_weighted(const UnfoldedMatrix& rhs, double rho,
                                       double w1, double w2,
                                       const DiffFilters& filters);

/// fft_diag_solve_weighted with unit weights: the plain
/// (rho*I + rho*sum Gi'Gi) system.
UnfoldedMatrix fft_diag_solve(const UnfoldedMatrix& rhs, double rho,
                              const DiffFilters& filters);

/// argmax_{V'V=I} <A, V> for A of size B x R (B >= R): V = P Q' where
/// A = P S Q' is the thin SVD. Rank-deficient A still yields the
/// minimum-norm maximizer.
Eigen::MatrixXd procrustes_orthogonal(const Eigen::MatrixXd& a);

struct TruncatedSvd {
  Eigen::MatrixXd u;      // MN x R, singular values folded in
  Eigen::MatrixXd v;      // B x R, orthonormal columns
  Eigen::VectorXd sigma;  // leading R singular values
};

/// Best rank-r factorization of the unfolded matrix, with a fixed sign
/// convention: the largest-magnitude entry of each right singular vector is
/// positive.
TruncatedSvd truncated_svd(const UnfoldedMatrix& y, int r);

}  // namespace hsidn

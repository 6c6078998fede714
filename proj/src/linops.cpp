#include "hsidn/linops.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <string>

namespace hsidn {

namespace {

// FFTW's planner is not thread-safe; executing distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// c2c 2-D FFT of a real M x N field. Row-major layout matches the pixel
// order of UnfoldedMatrix columns.
Eigen::MatrixXcd fft2(const Eigen::MatrixXd& field) {
  const int m = static_cast<int>(field.rows());
  const int n = static_cast<int>(field.cols());
  std::vector<std::complex<double>> in(static_cast<std::size_t>(m) * n);
  std::vector<std::complex<double>> out(in.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) in[static_cast<std::size_t>(i) * n + j] = field(i, j);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(m, n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  Eigen::MatrixXcd hat(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) hat(i, j) = out[static_cast<std::size_t>(i) * n + j];
  return hat;
}

void check_axis(int axis) {
  if (axis != 1 && axis != 2) {
    throw InvalidParams("difference axis must be 1 or 2, got " +
                        std::to_string(axis));
  }
}

void check_spatial(const UnfoldedMatrix& u) {
  if (u.spatial_rows <= 0 || u.spatial_cols <= 0 ||
      u.data.rows() !=
          static_cast<Eigen::Index>(u.spatial_rows) * u.spatial_cols) {
    throw DimensionMismatch("unfolded matrix has inconsistent spatial dims");
  }
}

}  // namespace

DiffFilters::DiffFilters(int spatial_rows, int spatial_cols)
    : rows_(spatial_rows), cols_(spatial_cols) {
  if (rows_ <= 0 || cols_ <= 0) {
    throw DimensionMismatch("filter grid dims must be positive");
  }
  f1_ = Eigen::MatrixXd::Zero(rows_, cols_);
  f2_ = Eigen::MatrixXd::Zero(rows_, cols_);
  // Wrap-around placement of the first-difference kernels. On a 1-pixel
  // axis the forward difference is identically zero, so the kernel is too.
  if (rows_ > 1) {
    f1_(0, 0) = -1.0;
    f1_(1, 0) = 1.0;
  }
  if (cols_ > 1) {
    f2_(0, 0) = -1.0;
    f2_(0, 1) = 1.0;
  }
  f1_hat_ = fft2(f1_);
  f2_hat_ = fft2(f2_);
  f1_pow_ = f1_hat_.cwiseAbs2();
  f2_pow_ = f2_hat_.cwiseAbs2();
}

UnfoldedMatrix grad(const UnfoldedMatrix& u, int axis) {
  check_axis(axis);
  check_spatial(u);
  const int m = u.spatial_rows, n = u.spatial_cols;
  UnfoldedMatrix out;
  out.spatial_rows = m;
  out.spatial_cols = n;
  out.data.resize(u.data.rows(), u.data.cols());
  for (Eigen::Index col = 0; col < u.data.cols(); ++col) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::Index p = static_cast<Eigen::Index>(i) * n + j;
        Eigen::Index q;
        if (axis == 1) {
          q = static_cast<Eigen::Index>((i + 1) % m) * n + j;
        } else {
          q = static_cast<Eigen::Index>(i) * n + (j + 1) % n;
        }
        out.data(p, col) = u.data(q, col) - u.data(p, col);
      }
    }
  }
  return out;
}

UnfoldedMatrix grad_adjoint(const UnfoldedMatrix& v, int axis) {
  check_axis(axis);
  check_spatial(v);
  const int m = v.spatial_rows, n = v.spatial_cols;
  UnfoldedMatrix out;
  out.spatial_rows = m;
  out.spatial_cols = n;
  out.data.resize(v.data.rows(), v.data.cols());
  for (Eigen::Index col = 0; col < v.data.cols(); ++col) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::Index p = static_cast<Eigen::Index>(i) * n + j;
        Eigen::Index q;
        if (axis == 1) {
          q = static_cast<Eigen::Index>((i + m - 1) % m) * n + j;
        } else {
          q = static_cast<Eigen::Index>(i) * n + (j + n - 1) % n;
        }
        out.data(p, col) = v.data(q, col) - v.data(p, col);
      }
    }
  }
  return out;
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& x, double t) {
  if (!(t >= 0.0)) {
    throw NegativeThreshold("soft threshold must be nonnegative, got " +
                            std::to_string(t));
  }
  return x.array().sign() * (x.array().abs() - t).max(0.0);
}

Eigen::MatrixXd shrink_l21_columns(const Eigen::MatrixXd& omega, double t) {
  if (!(t >= 0.0)) {
    throw NegativeThreshold("l21 threshold must be nonnegative, got " +
                            std::to_string(t));
  }
  Eigen::MatrixXd out(omega.rows(), omega.cols());
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    const double norm = omega.col(j).norm();
    const double scale = norm > t ? 1.0 - t / norm : 0.0;
    out.col(j) = scale * omega.col(j);
  }
  return out;
}

UnfoldedMatrix fft_diag_solve_weighted(const UnfoldedMatrix& rhs, double rho,
                                       double w1, double w2,
                                       const DiffFilters& filters) {
  if (!(rho > 0.0)) {
    throw NonpositiveRho("rho must be positive, got " + std::to_string(rho));
  }
  if (!(w1 >= 0.0) || !(w2 >= 0.0)) {
    throw InvalidParams("difference weights must be nonnegative");
  }
  check_spatial(rhs);
  const int m = rhs.spatial_rows, n = rhs.spatial_cols;
  if (filters.spatial_rows() != m || filters.spatial_cols() != n) {
    throw DimensionMismatch("filter grid does not match rhs spatial dims");
  }

  // Denominator of the diagonalized normal operator.
  Eigen::ArrayXXd denom =
      rho * (1.0 + w1 * filters.f1_power().array() +
             w2 * filters.f2_power().array());

  const auto count = static_cast<std::size_t>(m) * n;
  std::vector<std::complex<double>> buf(count), hat(count);
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_2d(m, n, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(hat.data()),
                           FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(m, n, reinterpret_cast<fftw_complex*>(hat.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()),
                           FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  UnfoldedMatrix out;
  out.spatial_rows = m;
  out.spatial_cols = n;
  out.data.resize(rhs.data.rows(), rhs.data.cols());
  const double inv_count = 1.0 / static_cast<double>(count);
  for (Eigen::Index col = 0; col < rhs.data.cols(); ++col) {
    for (std::size_t p = 0; p < count; ++p) {
      buf[p] = rhs.data(static_cast<Eigen::Index>(p), col);
    }
    fftw_execute(fwd);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        hat[static_cast<std::size_t>(i) * n + j] /= denom(i, j);
      }
    }
    fftw_execute(bwd);
    for (std::size_t p = 0; p < count; ++p) {
      out.data(static_cast<Eigen::Index>(p), col) = buf[p].real() * inv_count;
    }
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  return out;
}

UnfoldedMatrix fft_diag_solve(const UnfoldedMatrix& rhs, double rho,
                              const DiffFilters& filters) {
  return fft_diag_solve_weighted(rhs, rho, 1.0, 1.0, filters);
}

Eigen::MatrixXd procrustes_orthogonal(const Eigen::MatrixXd& a) {
  if (a.rows() < a.cols()) {
    throw DimensionMismatch("procrustes input must have rows >= cols");
  }
  if (!a.allFinite()) {
    throw NonFiniteData("procrustes input contains non-finite entries");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

TruncatedSvd truncated_svd(const UnfoldedMatrix& y, int r) {
  check_spatial(y);
  const auto max_rank =
      static_cast<int>(std::min(y.data.rows(), y.data.cols()));
  if (r < 1 || r > max_rank) {
    throw RankOutOfRange("rank " + std::to_string(r) +
                         " outside [1, " + std::to_string(max_rank) + "]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      y.data, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.sigma = svd.singularValues().head(r);
  out.u = svd.matrixU().leftCols(r) * out.sigma.asDiagonal();
  out.v = svd.matrixV().leftCols(r);
  // Sign convention: largest-magnitude entry of each right vector positive.
  for (int j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.v.rows(); ++i) {
      const double mag = std::abs(out.v(i, j));
      if (mag > best) {
        best = mag;
        imax = i;
      }
    }
    if (out.v(imax, j) < 0.0) {
      out.v.col(j) = -out.v.col(j);
      out.u.col(j) = -out.u.col(j);
    }
  }
  return out;
}

}  // namespace hsidn

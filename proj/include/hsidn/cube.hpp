#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hsidn/errors.hpp"

namespace hsidn {

/// Dense M x N x B hyperspectral cube. Storage is row-major over
/// (row m, col n, band b) with the band index innermost:
/// data[(m*N + n)*B + b]. All entries are finite after construction.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(int rows, int cols, int bands);
  HsiCube(int rows, int cols, int bands, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int bands() const { return bands_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int m, int n, int b) const {
    return data_[index(m, n, b)];
  }
  double& operator()(int m, int n, int b) { return data_[index(m, n, b)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_dims(const HsiCube& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           bands_ == other.bands_;
  }

 private:
  std::size_t index(int m, int n, int b) const {
    return (static_cast<std::size_t>(m) * cols_ + n) * bands_ + b;
  }

  int rows_ = 0;
  int cols_ = 0;
  int bands_ = 0;
  std::vector<double> data_;
};

/// Mode-3 unfolding of a cube: an MN x B matrix whose column j is the
/// vectorization of band j in row-major pixel order (pixel index = m*N + n).
/// The spatial dims ride along so the matrix refolds exactly.
struct UnfoldedMatrix {
  Eigen::MatrixXd data;
  int spatial_rows = 0;  // M
  int spatial_cols = 0;  // N
};

UnfoldedMatrix unfold3(const HsiCube& cube);
HsiCube fold3(const UnfoldedMatrix& mat);

/// Element-wise product. Throws DimensionMismatch on shape disagreement.
Eigen::MatrixXd hadamard(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Element-wise num / max(den, floor). Total on finite numerators.
Eigen::MatrixXd safe_divide(const Eigen::MatrixXd& num,
                            const Eigen::MatrixXd& den, double floor);

/// All-ones matrix of the same shape (the weight reference).
Eigen::MatrixXd ones_like(const Eigen::MatrixXd& a);

}  // namespace hsidn

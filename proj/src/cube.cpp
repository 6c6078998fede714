#include "hsidn/cube.hpp"

#include <cmath>
#include <string>

namespace hsidn {

namespace {

void check_dims(int rows, int cols, int bands) {
  if (rows <= 0 || cols <= 0 || bands <= 0) {
    throw DimensionMismatch("cube dims must be positive, got " +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            "x" + std::to_string(bands));
  }
}

void check_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteData("cube contains a non-finite entry");
    }
  }
}

}  // namespace

HsiCube::HsiCube(int rows, int cols, int bands)
    : rows_(rows), cols_(cols), bands_(bands) {
  check_dims(rows, cols, bands);
  data_.assign(static_cast<std::size_t>(rows) * cols * bands, 0.0);
}

HsiCube::HsiCube(int rows, int cols, int bands, std::vector<double> values)
    : rows_(rows), cols_(cols), bands_(bands), data_(std::move(values)) {
  check_dims(rows, cols, bands);
  const auto expected = static_cast<std::size_t>(rows) * cols * bands;
  if (data_.size() != expected) {
    throw DimensionMismatch("cube data length " + std::to_string(data_.size()) +
                            " does not match dims product " +
                            std::to_string(expected));
  }
  check_finite(data_);
}

UnfoldedMatrix unfold3(const HsiCube& cube) {
  const int m = cube.rows(), n = cube.cols(), b = cube.bands();
  UnfoldedMatrix out;
  out.spatial_rows = m;
  out.spatial_cols = n;
  out.data.resize(static_cast<Eigen::Index>(m) * n, b);
  const double* src = cube.data().data();
  for (Eigen::Index p = 0; p < out.data.rows(); ++p) {
    for (int j = 0; j < b; ++j) {
      out.data(p, j) = src[p * b + j];
    }
  }
  return out;
}

HsiCube fold3(const UnfoldedMatrix& mat) {
  const int m = mat.spatial_rows, n = mat.spatial_cols;
  const auto b = static_cast<int>(mat.data.cols());
  if (m <= 0 || n <= 0 ||
      mat.data.rows() != static_cast<Eigen::Index>(m) * n) {
    throw DimensionMismatch(
        "unfolded row count " + std::to_string(mat.data.rows()) +
        " does not match spatial dims " + std::to_string(m) + "x" +
        std::to_string(n));
  }
  std::vector<double> values(static_cast<std::size_t>(m) * n * b);
  for (Eigen::Index p = 0; p < mat.data.rows(); ++p) {
    for (int j = 0; j < b; ++j) {
      values[p * b + j] = mat.data(p, j);
    }
  }
  return HsiCube(m, n, b, std::move(values));
}

Eigen::MatrixXd hadamard(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("hadamard operands differ in shape");
  }
  return a.cwiseProduct(b);
}

Eigen::MatrixXd safe_divide(const Eigen::MatrixXd& num,
                            const Eigen::MatrixXd& den, double floor) {
  if (num.rows() != den.rows() || num.cols() != den.cols()) {
    throw DimensionMismatch("safe_divide operands differ in shape");
  }
  if (!(floor > 0.0)) {
    throw InvalidParams("safe_divide floor must be positive");
  }
  return num.cwiseQuotient(den.cwiseMax(floor));
}

Eigen::MatrixXd ones_like(const Eigen::MatrixXd& a) {
  return Eigen::MatrixXd::Ones(a.rows(), a.cols());
}

}  // namespace hsidn

#include "lhv/tridiagonal.hpp"

#include <cmath>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace lhv {

void TridiagonalMatrix::apply(std::span<const double> x, std::span<double> y) const {
  simd::tridiag_apply(lower, diag, upper, x, y, periodic);
}

std::vector<double> TridiagonalMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(size());
  apply(x, y);
  return y;
}

TridiagonalMatrix TridiagonalMatrix::transposed() const {
  const std::size_t n = size();
  TridiagonalMatrix t(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = diag[i];
    if (i > 0) t.lower[i] = upper[i - 1];
    if (i + 1 < n) t.upper[i] = lower[i + 1];
  }
  if (periodic && n > 0) {
    t.lower[0] = upper[n - 1];
    t.upper[n - 1] = lower[0];
  }
  return t;
}

TridiagonalMatrix TridiagonalMatrix::shifted_identity(double scale) const {
  TridiagonalMatrix m(size(), periodic);
  for (std::size_t i = 0; i < size(); ++i) {
    m.lower[i] = scale * lower[i];
    m.diag[i] = 1.0 + scale * diag[i];
    m.upper[i] = scale * upper[i];
  }
  return m;
}

double TridiagonalMatrix::at(std::size_t row, std::size_t col) const {
  const std::size_t n = size();
  if (row == col) return diag[row];
  if (col + 1 == row) return lower[row];
  if (row + 1 == col) return upper[row];
  if (periodic && row == 0 && col == n - 1) return lower[0];
  if (periodic && row == n - 1 && col == 0) return upper[n - 1];
  return 0.0;
}

TridiagonalSolver::TridiagonalSolver(const TridiagonalMatrix& m)
    : n_(m.size()), periodic_(m.periodic) {
  if (n_ < 3) throw Error(ErrorCode::invalid_argument, "tridiagonal solver needs n >= 3");

  std::vector<double> diag = m.diag;
  if (periodic_) {
    alpha_ = m.upper[n_ - 1];  // bottom-left corner
    beta_ = m.lower[0];        // top-right corner
    gamma_ = -diag[0];
    diag[0] -= gamma_;
    diag[n_ - 1] -= alpha_ * beta_ / gamma_;
  }

  lower_ = m.lower;
  cprime_.resize(n_);
  inv_denom_.resize(n_);
  double denom = diag[0];
  for (std::size_t i = 0; i < n_; ++i) {
    if (i > 0) denom = diag[i] - lower_[i] * cprime_[i - 1];
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw Error(ErrorCode::stability, "singular tridiagonal system");
    }
    inv_denom_[i] = 1.0 / denom;
    cprime_[i] = m.upper[i] * inv_denom_[i];
  }

  if (periodic_) {
    z_.assign(n_, 0.0);
    z_[0] = gamma_;
    z_[n_ - 1] = alpha_;
    solve_open(z_);
    z_factor_ = 1.0 + z_[0] + beta_ * z_[n_ - 1] / gamma_;
  }
}

void TridiagonalSolver::solve_open(std::span<double> d) const {
  d[0] *= inv_denom_[0];
  for (std::size_t i = 1; i < n_; ++i) d[i] = (d[i] - lower_[i] * d[i - 1]) * inv_denom_[i];
  for (std::size_t i = n_ - 1; i-- > 0;) d[i] -= cprime_[i] * d[i + 1];
}

void TridiagonalSolver::solve(std::span<double> rhs) const {
  if (rhs.size() != n_) throw Error(ErrorCode::invalid_argument, "rhs length mismatch");
  solve_open(rhs);
  if (!periodic_) return;
  const double fact = (rhs[0] + beta_ * rhs[n_ - 1] / gamma_) / z_factor_;
  for (std::size_t i = 0; i < n_; ++i) rhs[i] -= fact * z_[i];
}

}  // namespace lhv

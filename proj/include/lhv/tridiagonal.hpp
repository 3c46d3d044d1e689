#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lhv {

/// Tridiagonal (or cyclic tridiagonal, when periodic) n x n matrix stored by
/// diagonals. Row i reads lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1];
/// in the periodic case x[-1] = x[n-1] and x[n] = x[0].
struct TridiagonalMatrix {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  bool periodic = false;

  explicit TridiagonalMatrix(std::size_t n = 0, bool periodic_ = false)
      : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), periodic(periodic_) {}

  std::size_t size() const noexcept { return diag.size(); }

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  TridiagonalMatrix transposed() const;
  /// identity + scale * this
  TridiagonalMatrix shifted_identity(double scale) const;
  /// Dense entry (row, col); zero outside the band.
  double at(std::size_t row, std::size_t col) const;
};

/// Thomas factorization; the cyclic case goes through Sherman-Morrison.
/// Factor once, solve many right-hand sides in place.
class TridiagonalSolver {
 public:
  explicit TridiagonalSolver(const TridiagonalMatrix& m);
  void solve(std::span<double> rhs) const;

 private:
  void solve_open(std::span<double> rhs) const;

  std::size_t n_ = 0;
  bool periodic_ = false;
  std::vector<double> lower_;
  std::vector<double> cprime_;
  std::vector<double> inv_denom_;
  // Cyclic correction.
  std::vector<double> z_;
  double gamma_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double z_factor_ = 0.0;
};

}  // namespace lhv

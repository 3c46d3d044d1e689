#include <gtest/gtest.h>

#include <random>

#include "lhv/error.hpp"
#include "lhv/random.hpp"
#include "lhv/tridiagonal.hpp"

namespace {

lhv::TridiagonalMatrix diagonally_dominant(std::size_t n, bool periodic, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  lhv::TridiagonalMatrix m(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    m.lower[i] = u(rng);
    m.upper[i] = u(rng);
    m.diag[i] = 3.0 + u(rng);
  }
  return m;
}

}  // namespace

TEST(TridiagonalSolver, SolvesOpenAndCyclicSystems) {
  for (bool periodic : {false, true}) {
    for (std::size_t n : {3u, 4u, 17u, 256u}) {
      const lhv::TridiagonalMatrix m = diagonally_dominant(n, periodic, static_cast<unsigned>(n));
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.3 * static_cast<double>(i)) + 0.5;
      std::vector<double> b = m.apply(x);
      lhv::TridiagonalSolver(m).solve(b);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b[i], x[i], 1e-12) << n << " " << periodic;
    }
  }
}

TEST(TridiagonalMatrix, TransposeMatchesDenseEntries) {
  const lhv::TridiagonalMatrix m = diagonally_dominant(6, true, 1);
  const lhv::TridiagonalMatrix t = m.transposed();
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(t.at(r, c), m.at(c, r)) << r << "," << c;
  }
}

TEST(TridiagonalMatrix, ShiftedIdentity) {
  const lhv::TridiagonalMatrix m = diagonally_dominant(5, false, 2);
  const lhv::TridiagonalMatrix s = m.shifted_identity(-0.5);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      EXPECT_DOUBLE_EQ(s.at(r, c), (r == c ? 1.0 : 0.0) - 0.5 * m.at(r, c));
    }
  }
}

TEST(TridiagonalSolver, SingularSystemIsReported) {
  lhv::TridiagonalMatrix m(4, false);
  EXPECT_THROW(lhv::TridiagonalSolver{m}, lhv::Error);
}

TEST(Random, DerivedSeedsDiffer) {
  EXPECT_NE(lhv::derive_seed(1, 0), lhv::derive_seed(1, 1));
  EXPECT_NE(lhv::derive_seed(1, 0), lhv::derive_seed(2, 0));
  EXPECT_EQ(lhv::derive_seed(7, 3), lhv::derive_seed(7, 3));
}

TEST(Random, ChunkedWorkIsIndependentOfThreadCount) {
  const std::size_t total = 50'000;
  auto run = [&](unsigned threads) {
    std::vector<double> out(total);
    lhv::for_each_chunk(total, 4096, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      lhv::Rng rng(lhv::derive_seed(11, chunk));
      for (std::size_t i = begin; i < end; ++i) out[i] = rng.normal();
    });
    return out;
  };
  const auto one = run(1);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
}

TEST(Random, WorkerExceptionsPropagate) {
  EXPECT_THROW(lhv::for_each_chunk(10'000, 100, 4,
                                   [](std::size_t chunk, std::size_t, std::size_t) {
                                     if (chunk == 7) throw std::runtime_error("boom");
                                   }),
               std::runtime_error);
}

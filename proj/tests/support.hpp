#pragma once

#include <random>

#include "nhb/linalg.hpp"

namespace nhb::test {

// Deterministic sampler for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  VecX vec(int n) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  VecX unit(int n) {
    VecX v = vec(n);
    while (v.norm() < 1e-3) v = vec(n);
    return v / v.norm();
  }

  MatX skew(int n) {
    MatX a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal();
    return a - a.transpose();
  }

  // Orthogonal matrix; reflection included when `reflect` is set.
  MatX orthogonal(int n, bool reflect) {
    MatX a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal();
    Eigen::HouseholderQR<MatX> qr(a);
    MatX q = qr.householderQ();
    if ((q.determinant() < 0.0) != reflect) q.col(0) *= -1.0;
    return q;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace nhb::test

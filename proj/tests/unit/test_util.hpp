#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace blurgp::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>()(gen_); }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  Eigen::VectorXd vector(int d, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Eigen::VectorXd unit_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v.normalized();
  }

  // Random rotation with eigenvalues drawn from [lo, hi].
  Eigen::MatrixXd psd(int d, double lo, double hi) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd lam(d);
    for (int i = 0; i < d; ++i) lam[i] = uniform(lo, hi);
    Eigen::MatrixXd c = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (c + c.transpose());
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace blurgp::testing

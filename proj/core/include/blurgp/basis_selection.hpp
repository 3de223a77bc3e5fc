#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blurgp/kernel.hpp"

namespace blurgp {

struct Clustering {
  Matrix centers;                 // M x d
  std::vector<int> assignment;    // cluster index per point
  std::vector<int> counts;        // points per cluster
  int iterations = 0;
  /// Sum of squared distances after each assignment step.
  std::vector<double> objective_history;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic given
/// (points, m, seed). Empty clusters are reseeded at the point farthest from
/// its current center. Throws InvalidConfig unless 1 <= m <= N.
Clustering kmeans(const Matrix& points, int m, std::uint64_t seed,
                  int max_iters = 100);

enum class CovKind { Full, Sphere, Zero };

std::string to_string(CovKind kind);
CovKind parse_cov_kind(const std::string& name);

struct CovMode {
  CovKind kind = CovKind::Full;
  /// Full mode adds ridge * trace(C_k) / d to the diagonal.
  double ridge = 1e-6;
};

inline constexpr double kDefaultVirtualPrecision = 1e6;

struct LocalCovariances {
  BasisSet basis;
  /// Clusters that had fewer than two points in Full mode and were given the
  /// Sphere estimate instead.
  std::vector<int> sphere_fallbacks;
};

/// One blurred basis per cluster: center = cluster mean, covariance from the
/// cluster's 1/n scatter according to `mode`.
LocalCovariances local_covariances(
    const Clustering& clustering, const Matrix& points, const CovMode& mode,
    double precision = kDefaultVirtualPrecision);

}  // namespace blurgp

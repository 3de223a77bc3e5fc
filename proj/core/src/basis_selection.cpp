#include "blurgp/basis_selection.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "blurgp/error.hpp"

namespace blurgp {
namespace {

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b,
               Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix seed_plus_plus(const Matrix& points, int m, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(m, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Eigen::Index pick = first(rng);
  centers.row(0) = points.row(pick);
  taken[static_cast<std::size_t>(pick)] = true;

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    d2[static_cast<std::size_t>(i)] = sq_dist(points, i, centers, 0);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 1; k < m; ++k) {
    double total = 0.0;
    for (double v : d2) total += v;
    pick = -1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc >= target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick < 0) {
      // All remaining mass is zero (duplicates): take the first unused point.
      for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
        if (!taken[static_cast<std::size_t>(i)]) pick = i;
      }
    }
    centers.row(k) = points.row(pick);
    taken[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], sq_dist(points, i, centers, k));
    }
  }
  return centers;
}

// Returns the objective; ties go to the lowest cluster index.
double assign(const Matrix& points, const Matrix& centers,
              std::vector<int>& assignment) {
  double objective = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      const double d = sq_dist(points, i, centers, k);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
    objective += best_d;
  }
  return objective;
}

std::vector<int> count(const std::vector<int>& assignment, int m) {
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
  return counts;
}

// Moves each empty cluster onto the point farthest from its center, taken
// from a cluster that can spare it. Returns true if anything changed.
bool repair_empty(const Matrix& points, Matrix& centers,
                  std::vector<int>& assignment) {
  const int m = static_cast<int>(centers.rows());
  auto counts = count(assignment, m);
  bool changed = false;
  for (int k = 0; k < m; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int a = assignment[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(a)] < 2) continue;
      const double d = sq_dist(points, i, centers, a);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) break;
    --counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(far)])];
    assignment[static_cast<std::size_t>(far)] = k;
    counts[static_cast<std::size_t>(k)] = 1;
    centers.row(k) = points.row(far);
    changed = true;
  }
  return changed;
}

void update_centers(const Matrix& points, const std::vector<int>& assignment,
                    Matrix& centers) {
  const auto counts = count(assignment, static_cast<int>(centers.rows()));
  Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
  }
  for (Eigen::Index k = 0; k < centers.rows(); ++k) {
    const int c = counts[static_cast<std::size_t>(k)];
    if (c > 0) centers.row(k) = sums.row(k) / c;
  }
}

}  // namespace

Clustering kmeans(const Matrix& points, int m, std::uint64_t seed,
                  int max_iters) {
  const Eigen::Index n = points.rows();
  if (n < 1 || points.cols() < 1) {
    throw DataError("k-means needs a non-empty point set");
  }
  if (m < 1 || m > n) {
    throw InvalidConfig("k-means needs 1 <= M <= N (M = " + std::to_string(m) +
                        ", N = " + std::to_string(n) + ")");
  }
  if (max_iters < 1) {
    throw InvalidConfig("k-means max_iters must be >= 1");
  }
  std::mt19937_64 rng(seed);
  Clustering out;
  out.centers = seed_plus_plus(points, m, rng);
  out.assignment.assign(static_cast<std::size_t>(n), -1);

  std::vector<int> previous;
  for (int it = 1; it <= max_iters; ++it) {
    double objective = assign(points, out.centers, out.assignment);
    if (repair_empty(points, out.centers, out.assignment)) {
      objective = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        objective += sq_dist(points, i, out.centers,
                             out.assignment[static_cast<std::size_t>(i)]);
      }
    }
    out.objective_history.push_back(objective);
    out.iterations = it;
    if (out.assignment == previous) break;
    previous = out.assignment;
    update_centers(points, out.assignment, out.centers);
  }
  out.counts = count(out.assignment, m);
  return out;
}

std::string to_string(CovKind kind) {
  switch (kind) {
    case CovKind::Full: return "full";
    case CovKind::Sphere: return "sphere";
    case CovKind::Zero: return "zero";
  }
  return "?";
}

CovKind parse_cov_kind(const std::string& name) {
  if (name == "full") return CovKind::Full;
  if (name == "sphere") return CovKind::Sphere;
  if (name == "zero") return CovKind::Zero;
  throw InvalidConfig("unknown covariance mode '" + name +
                      "' (expected full, sphere or zero)");
}

LocalCovariances local_covariances(const Clustering& clustering,
                                   const Matrix& points, const CovMode& mode,
                                   double precision) {
  const auto m = clustering.centers.rows();
  const auto d = clustering.centers.cols();
  if (points.cols() != d ||
      clustering.assignment.size() != static_cast<std::size_t>(points.rows())) {
    throw ShapeError("clustering does not match the point set");
  }
  if (!(mode.ridge >= 0.0)) {
    throw InvalidConfig("covariance ridge must be non-negative");
  }
  std::vector<Matrix> scatter(static_cast<std::size_t>(m), Matrix::Zero(d, d));
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int a = clustering.assignment[static_cast<std::size_t>(i)];
    const Vector r = (points.row(i) - clustering.centers.row(a)).transpose();
    scatter[static_cast<std::size_t>(a)] += r * r.transpose();
    ++counts[static_cast<std::size_t>(a)];
  }

  std::vector<BlurredBasis> bases;
  std::vector<int> fallbacks;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    Matrix full = counts[idx] > 0 ? Matrix(scatter[idx] / counts[idx])
                                  : Matrix(Matrix::Zero(d, d));
    const double iso = full.trace() / static_cast<double>(d);
    Matrix cov;
    switch (mode.kind) {
      case CovKind::Full:
        if (counts[idx] < 2) {
          cov = iso * Matrix::Identity(d, d);
          fallbacks.push_back(static_cast<int>(k));
        } else {
          cov = full;
          cov.diagonal().array() += mode.ridge * iso;
        }
        break;
      case CovKind::Sphere:
        cov = iso * Matrix::Identity(d, d);
        break;
      case CovKind::Zero:
        cov = Matrix::Zero(d, d);
        break;
    }
    cov = 0.5 * (cov + Matrix(cov.transpose()));
    bases.push_back({clustering.centers.row(k).transpose(), cov, precision, 0.0});
  }
  return {BasisSet(std::move(bases)), std::move(fallbacks)};
}

}  // namespace blurgp

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "blurgp/basis_selection.hpp"
#include "blurgp/data.hpp"

namespace blurgp {

/// Settings for the comparative benchmark. Repeat r draws its data with seed
/// base_seed + r and runs K-means with seed base_seed + 1000 + r, so all
/// covariance modes within a repeat see the same data and clustering.
struct BenchmarkConfig {
  /// "circle", "synth-classes" or "csv".
  std::string dataset = "synth-classes";
  std::filesystem::path csv_path;
  Task csv_task = Task::Classification;
  /// Fraction of a CSV dataset used for training; the rest is the test set.
  double train_fraction = 0.5;

  std::vector<int> ms{3};
  std::vector<CovKind> modes{CovKind::Zero, CovKind::Sphere, CovKind::Full};
  int repeats = 10;
  std::uint64_t base_seed = 1;

  double sigma = 0.5;
  double vy = 0.01;
  double epsilon = 0.0;
  double ridge = 1e-6;

  /// Zero means the dataset default (circle 100/200, classes 200/2000).
  int n_train = 0;
  int n_test = 0;

  /// Add one "full-gp" reference row per repeat.
  bool reference = true;
};

struct BenchmarkRow {
  std::string dataset;
  int m = 0;
  std::string mode;
  int repeat = 0;
  std::string metric;
  double value = 0.0;
  int sweeps = 0;
  bool converged = false;

  // Not part of the CSV; used by the acceptance suite.
  long long skipped_updates = 0;
  long long total_updates = 0;
  /// min eigenvalue of the basis covariance over its largest diagonal entry.
  double basis_cov_min_eig_ratio = 0.0;
  std::string failure;
};

/// Rows in (M, mode, repeat) order, then the reference rows by repeat. A run
/// that throws yields value = NaN and the message in `failure`.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg);

void write_benchmark_csv(std::ostream& out,
                         const std::vector<BenchmarkRow>& rows);

}  // namespace blurgp

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "blurgp/kernel.hpp"

namespace blurgp {

enum class Task { Regression, Classification };

std::string to_string(Task task);
Task parse_task(const std::string& name);

/// N samples (x_i, y_i). Classification targets are -1 or +1.
struct Dataset {
  Matrix inputs;
  Vector targets;
  Task task = Task::Regression;

  Eigen::Index size() const noexcept { return inputs.rows(); }
  int dim() const noexcept { return static_cast<int>(inputs.cols()); }
  Vector input(Eigen::Index i) const { return inputs.row(i).transpose(); }

  /// Throws DataError unless N >= 1, shapes agree, all values are finite and
  /// classification labels are +-1.
  void validate() const;
};

/// Generator settings for points on a circle whose target depends on the
/// quadrant of the angle.
struct CircleOptions {
  double radius = 1.0;
  /// Target level for quadrants 1..4 (angle in [0, pi/2), [pi/2, pi), ...).
  std::vector<double> levels{2.0, -2.0, 2.0, -2.0};
};

/// Quadrant level of an angle in radians.
double circle_level(double angle, const CircleOptions& opts = {});

/// n points at uniform random angles, jittered by isotropic Gaussian noise
/// of sd noise_xy; targets are quadrant levels plus Gaussian noise of sd
/// noise_y. Throws InvalidConfig when n < 4.
Dataset synth_circle(int n, double noise_xy, double noise_y,
                     std::uint64_t seed, const CircleOptions& opts = {});

inline constexpr double kCircleNoiseXy = 0.05;
inline constexpr double kCircleNoiseY = 0.1;

/// Same construction at caller-chosen angles.
Dataset circle_from_angles(const std::vector<double>& angles, double noise_xy,
                           double noise_y, std::uint64_t seed,
                           const CircleOptions& opts = {});

/// n noise-free points at evenly spaced angles 2 pi (k + 1/2) / n.
Dataset circle_grid(int n, const CircleOptions& opts = {});

/// Two Gaussian classes, label +1 for the first component and -1 for the
/// second.
struct GaussianClasses {
  Vector mean_pos;
  Matrix cov_pos;
  Vector mean_neg;
  Matrix cov_neg;

  /// Tight class N(0, 0.25 I) inside a broad class N(0, 2 I), in 2-D.
  static GaussianClasses nested_default();
};

/// Balanced train/test sets: ceil(n/2) points of class +1, the rest -1.
std::pair<Dataset, Dataset> synth_gaussian_classes(int n_train, int n_test,
                                                   std::uint64_t seed,
                                                   const GaussianClasses& classes);

/// CSV with header x0,...,x{d-1},y.
Dataset load_csv(const std::filesystem::path& path, Task task);

/// Reads only the input columns; a trailing y column is accepted and kept
/// when present (targets left empty otherwise).
Dataset load_inputs_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const Dataset& data);

/// Number formatting shared by every writer: 17 significant digits, enough
/// for an exact round trip.
std::string format_double(double v);

struct Standardization {
  Vector mean;
  Vector sd;
};

struct Standardized {
  Dataset train;
  Dataset test;
  Standardization stats;
};

/// Column-wise (x - mean) / sd using train statistics only. A column with
/// zero spread gets sd = 1.
Standardized standardize(const Dataset& train, const Dataset& test);

/// Seeded split into a fraction-sized first part and the rest. Classification
/// splits are stratified per label. Either part being empty is an error.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed);

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows);

}  // namespace blurgp

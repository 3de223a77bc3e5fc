#pragma once

#include "blurgp/likelihood.hpp"
#include "blurgp/posterior.hpp"

namespace blurgp {

struct RegressionPrediction {
  Vector mean;
  /// Latent variance plus `noise_var`.
  Vector var;
};

RegressionPrediction predict_regression(const PosteriorState& state,
                                        const Matrix& inputs,
                                        double noise_var = 0.0);

/// Class-(+1) probabilities for each input row.
Vector predict_probability(const PosteriorState& state, const Matrix& inputs,
                           const LabelNoise& lik);

double rmse(const Vector& predicted, const Vector& target);

/// Fraction of rows whose thresholded probability (>= 0.5 means +1)
/// disagrees with the +-1 label.
double error_rate(const Vector& probability, const Vector& labels);

}  // namespace blurgp

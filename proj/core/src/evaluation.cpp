#include "blurgp/evaluation.hpp"

#include <cmath>

#include "blurgp/ep.hpp"
#include "blurgp/error.hpp"

namespace blurgp {

RegressionPrediction predict_regression(const PosteriorState& state,
                                        const Matrix& inputs,
                                        double noise_var) {
  const Matrix k = state.prior->features.rows(inputs);
  RegressionPrediction out{k * state.alpha, Vector(inputs.rows())};
  const Matrix kb = k * state.beta;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out.var[i] = 1.0 - kb.row(i).dot(k.row(i)) + noise_var;
  }
  return out;
}

Vector predict_probability(const PosteriorState& state, const Matrix& inputs,
                           const LabelNoise& lik) {
  Vector out(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out[i] = predictive_class_probability(state, inputs.row(i).transpose(), lik);
  }
  return out;
}

double rmse(const Vector& predicted, const Vector& target) {
  if (predicted.size() != target.size() || target.size() == 0) {
    throw ShapeError("rmse needs two non-empty vectors of equal length");
  }
  return std::sqrt((predicted - target).squaredNorm() /
                   static_cast<double>(target.size()));
}

double error_rate(const Vector& probability, const Vector& labels) {
  if (probability.size() != labels.size() || labels.size() == 0) {
    throw ShapeError("error_rate needs two non-empty vectors of equal length");
  }
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double predicted = probability[i] >= 0.5 ? 1.0 : -1.0;
    if (predicted != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

}  // namespace blurgp

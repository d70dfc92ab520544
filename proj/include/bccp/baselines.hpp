#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bccp/conformal.hpp"
#include "bccp/interval.hpp"
#include "bccp/models.hpp"
#include "bccp/transform.hpp"

namespace bccp {

/// Standard normal quantile.
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Residual bootstrap

/// Which difference a pooled error stores. Adding prediction-minus-truth
/// errors to y_hat reflects the error distribution about the prediction;
/// truth-minus-prediction adds the residuals themselves.
enum class ResidualSign { prediction_minus_truth, truth_minus_prediction };

struct ResidualPool {
  std::vector<double> residuals;  // on `scale`
  OutcomeTransform scale;
  ResidualSign sign = ResidualSign::prediction_minus_truth;

  /// Errors of calibration pairs, both given in raw units, measured on
  /// `scale`. Raw predictions below the scale's domain are clamped to it.
  static ResidualPool from_calibration(std::span<const double> y_true,
                                       std::span<const double> y_pred,
                                       OutcomeTransform scale = {},
                                       ResidualSign sign = ResidualSign::prediction_minus_truth);
};

/// One bootstrap distribution of B resampled errors. Intervals for any
/// y_hat are y_hat plus the empirical alpha/2 and 1-alpha/2 quantiles of
/// the draws, mapped back from the pool's scale.
class ResidualBootstrap {
 public:
  ResidualBootstrap(const ResidualPool& pool, std::size_t draws,
                    std::uint64_t seed);

  /// `y_hat` is on the pool's scale. Bounds below `support_min` are raised
  /// to it.
  PredictionInterval interval(double y_hat, double alpha,
                              double support_min = -kInf) const;
  const std::vector<double>& draws() const noexcept { return draws_; }

 private:
  OutcomeTransform scale_;
  std::vector<double> draws_;  // sorted
};

PredictionInterval bootstrap_interval(double y_hat, const ResidualPool& pool,
                                      double alpha, std::size_t draws,
                                      std::uint64_t seed,
                                      double support_min = -kInf);

// ---------------------------------------------------------------------------
// Parametric intervals

/// Sample standard deviation of T(y_true) - T(y_pred).
double residual_sd(std::span<const double> y_true,
                   std::span<const double> y_pred, OutcomeTransform scale);

/// inverse(y_hat_t -/+ z_{1-alpha/2} * sigma). With the log scale this is the
/// log-normal interval exp(y_hat_log -/+ z sigma).
PredictionInterval lognormal_interval(double y_hat_t, double sigma, double alpha,
                                      OutcomeTransform scale = OutcomeTransform(OutcomeTransform::Kind::log));

/// Equal-tailed Poisson interval: smallest k with CDF(k) >= alpha/2 and
/// smallest k with CDF(k) >= 1 - alpha/2.
PredictionInterval poisson_interval(double mu, double alpha);

/// Same for the negative binomial with mean mu and variance mu + mu^2/size.
PredictionInterval negbinom_interval(double mu, double size, double alpha);

struct DispersionFit {
  double size = kInf;  // NB size parameter
  bool poisson_fallback = false;
};

/// Method of moments: mu = mean(y_pred), variance = mean((y - y_pred)^2),
/// size = mu^2 / (variance - mu). Variance <= mu falls back to Poisson.
DispersionFit estimate_nb_dispersion(std::span<const double> y_true,
                                     std::span<const double> y_pred);

FlaggedInterval count_interval(double mu, const DispersionFit& fit, double alpha);

// ---------------------------------------------------------------------------
// Linear quantile regression

/// u * (tau - 1{u < 0}).
inline double pinball(double u, double tau) noexcept {
  return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}
double mean_pinball_loss(const Matrix& design, std::span<const double> y,
                         const Vector& coefficients, double tau);

struct QuantRegOptions {
  double epsilon = 1e-6;       // smoothing floor on |residual| in the weights
  int max_iterations = 500;
  double tolerance = 1e-8;     // max coefficient change
};

struct QuantileFit {
  double tau = 0.5;
  Vector coefficients;  // intercept first
  int iterations = 0;
  bool converged = false;
  bool vertex_refined = false;
  double loss = 0.0;    // mean pinball loss at the solution
};

/// Minimizes the mean pinball loss of y on [1, features] by iteratively
/// reweighted least squares, then polishes to an interpolating vertex when
/// that does not increase the loss. Throws non_convergence if neither the
/// iteration nor the vertex check settles.
QuantileFit quantreg_fit(const Matrix& features, std::span<const double> y,
                         double tau, const QuantRegOptions& options = {});

struct QuantRegModel {
  QuantileFit lower;  // tau = alpha/2
  QuantileFit upper;  // tau = 1 - alpha/2
  OutcomeTransform transform;
};

/// Fits both tails on T(y).
QuantRegModel quantreg_fit_interval(const Matrix& features,
                                    std::span<const double> y, double alpha,
                                    OutcomeTransform transform = {},
                                    const QuantRegOptions& options = {});

/// Bounds mapped back through the transform; crossed bounds are swapped and
/// flagged.
FlaggedInterval quantreg_interval(const QuantRegModel& model,
                                  std::span<const double> x);

}  // namespace bccp

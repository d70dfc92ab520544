#include "bccp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "bccp/error.hpp"
#include "bccp/rng.hpp"

namespace bccp {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
}

double clamp_to_domain(double y, OutcomeTransform t) {
  if (t.kind() == OutcomeTransform::Kind::log1p && y < 0.0) return 0.0;
  return y;
}

// Smallest k whose CDF reaches each target, walking the pmf upward from 0.
// `log_pmf_step(k)` returns log(pmf(k+1)/pmf(k)).
template <class Step>
PredictionInterval walk_count_quantiles(double log_pmf0, Step log_pmf_step,
                                        double lower_target, double upper_target,
                                        std::size_t max_steps) {
  double log_pmf = log_pmf0;
  double cdf = std::exp(log_pmf);
  std::size_t k = 0;
  double lower = -1.0;
  while (true) {
    if (lower < 0.0 && cdf >= lower_target) lower = static_cast<double>(k);
    if (cdf >= upper_target) return {lower, static_cast<double>(k)};
    if (k >= max_steps)
      throw Error(ErrorCode::non_convergence,
                  "count quantile search exceeded its step budget");
    log_pmf += log_pmf_step(k);
    ++k;
    cdf += std::exp(log_pmf);
  }
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::invalid_argument, "normal quantile level outside (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

ResidualPool ResidualPool::from_calibration(std::span<const double> y_true,
                                            std::span<const double> y_pred,
                                            OutcomeTransform scale,
                                            ResidualSign sign) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::shape_mismatch, "y_true and y_pred lengths differ");
  ResidualPool pool{{}, scale, sign};
  pool.residuals.reserve(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double truth = scale.forward(y_true[i]);
    const double pred = scale.forward(clamp_to_domain(y_pred[i], scale));
    pool.residuals.push_back(sign == ResidualSign::prediction_minus_truth
                                 ? pred - truth
                                 : truth - pred);
  }
  return pool;
}

ResidualBootstrap::ResidualBootstrap(const ResidualPool& pool,
                                     std::size_t draws, std::uint64_t seed)
    : scale_(pool.scale) {
  if (pool.residuals.empty())
    throw Error(ErrorCode::empty_calibration, "empty residual pool");
  if (draws < 100)
    throw Error(ErrorCode::invalid_argument, "bootstrap needs at least 100 draws");
  Rng rng(seed);
  draws_.reserve(draws);
  for (std::size_t b = 0; b < draws; ++b)
    draws_.push_back(pool.residuals[rng.below(pool.residuals.size())]);
  std::sort(draws_.begin(), draws_.end());
}

PredictionInterval ResidualBootstrap::interval(double y_hat, double alpha,
                                               double support_min) const {
  check_alpha(alpha);
  // Quantiles of y_hat + r equal y_hat plus quantiles of r, and the
  // back-transform is monotone.
  const double lo = scale_.inverse(y_hat + quantile_type7_sorted(draws_, alpha / 2.0));
  const double hi = scale_.inverse(y_hat + quantile_type7_sorted(draws_, 1.0 - alpha / 2.0));
  const double lower = std::max(lo, support_min);
  return {lower, std::max(lower, hi)};
}

PredictionInterval bootstrap_interval(double y_hat, const ResidualPool& pool,
                                      double alpha, std::size_t draws,
                                      std::uint64_t seed, double support_min) {
  return ResidualBootstrap(pool, draws, seed).interval(y_hat, alpha, support_min);
}

double residual_sd(std::span<const double> y_true,
                   std::span<const double> y_pred, OutcomeTransform scale) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::shape_mismatch, "y_true and y_pred lengths differ");
  if (y_true.size() < 2)
    throw Error(ErrorCode::empty_calibration, "need two residuals for a spread");
  std::vector<double> r(y_true.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = scale.forward(y_true[i]) - scale.forward(clamp_to_domain(y_pred[i], scale));
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(r.size() - 1));
}

PredictionInterval lognormal_interval(double y_hat_t, double sigma, double alpha,
                                      OutcomeTransform scale) {
  check_alpha(alpha);
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::invalid_dispersion, "sigma must be positive and finite");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double lo = scale.inverse(y_hat_t - z * sigma);
  const double hi = scale.inverse(y_hat_t + z * sigma);
  return {lo, std::max(lo, hi)};
}

PredictionInterval poisson_interval(double mu, double alpha) {
  check_alpha(alpha);
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw Error(ErrorCode::invalid_argument, "Poisson mean must be finite and >= 0");
  if (mu == 0.0) return {0.0, 0.0};
  const double log_mu = std::log(mu);
  const auto budget = static_cast<std::size_t>(mu + 50.0 * std::sqrt(mu) + 100.0);
  return walk_count_quantiles(
      -mu, [log_mu](std::size_t k) { return log_mu - std::log(static_cast<double>(k + 1)); },
      alpha / 2.0, 1.0 - alpha / 2.0, budget);
}

PredictionInterval negbinom_interval(double mu, double size, double alpha) {
  check_alpha(alpha);
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw Error(ErrorCode::invalid_argument, "NB mean must be finite and >= 0");
  if (!(size > 0.0))
    throw Error(ErrorCode::invalid_dispersion, "NB size must be positive");
  if (mu == 0.0) return {0.0, 0.0};
  if (size == kInf) return poisson_interval(mu, alpha);
  // p = size / (size + mu); pmf(0) = p^size; ratio (k + size)/(k + 1) * (1 - p).
  const double log_p = std::log(size) - std::log(size + mu);
  const double log_q = std::log(mu) - std::log(size + mu);
  return walk_count_quantiles(
      size * log_p,
      [size, log_q](std::size_t k) {
        const auto kd = static_cast<double>(k);
        return std::log(kd + size) - std::log(kd + 1.0) + log_q;
      },
      alpha / 2.0, 1.0 - alpha / 2.0, 50'000'000);
}

DispersionFit estimate_nb_dispersion(std::span<const double> y_true,
                                     std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::shape_mismatch, "y_true and y_pred lengths differ");
  if (y_true.empty())
    throw Error(ErrorCode::empty_calibration, "empty calibration set");
  double mu = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    mu += y_pred[i];
    var += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  mu /= static_cast<double>(y_true.size());
  var /= static_cast<double>(y_true.size());
  if (!(var > mu) || !(mu > 0.0)) return {kInf, true};
  return {mu * mu / (var - mu), false};
}

FlaggedInterval count_interval(double mu, const DispersionFit& fit, double alpha) {
  FlaggedInterval out;
  if (fit.poisson_fallback) {
    out.flags.set(Flag::poisson_fallback);
    out.interval = poisson_interval(mu, alpha);
  } else {
    out.interval = negbinom_interval(mu, fit.size, alpha);
  }
  return out;
}

// ---------------------------------------------------------------------------

double mean_pinball_loss(const Matrix& design, std::span<const double> y,
                         const Vector& coefficients, double tau) {
  const Vector fitted = design * coefficients;
  double total = 0.0;
  for (Eigen::Index i = 0; i < design.rows(); ++i)
    total += pinball(y[static_cast<std::size_t>(i)] - fitted[i], tau);
  return total / static_cast<double>(design.rows());
}

namespace {

struct Vertex {
  Vector beta;
  double loss = 0.0;
  std::vector<Eigen::Index> basis;  // rows interpolated exactly
};

// Among the `pool` observations with the smallest absolute residuals, try
// every p-subset as an interpolation basis and return the best vertex.
std::optional<Vertex> best_vertex(const Matrix& design, std::span<const double> y,
                                  const Vector& residuals, double tau) {
  const auto n = design.rows();
  const auto p = design.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto pool = std::min<Eigen::Index>(n, p + (p <= 4 ? 3 : 1));
  std::partial_sort(order.begin(), order.begin() + pool, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return std::abs(residuals[a]) < std::abs(residuals[b]);
                    });

  std::optional<Vertex> best;
  std::vector<char> pick(static_cast<std::size_t>(pool), 0);
  std::fill(pick.begin(), pick.begin() + p, 1);
  do {
    Matrix basis(p, p);
    Vector rhs(p);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index j = 0; j < pool; ++j) {
      if (!pick[static_cast<std::size_t>(j)]) continue;
      const auto idx = order[static_cast<std::size_t>(j)];
      basis.row(static_cast<Eigen::Index>(rows.size())) = design.row(idx);
      rhs[static_cast<Eigen::Index>(rows.size())] = y[static_cast<std::size_t>(idx)];
      rows.push_back(idx);
    }
    Eigen::FullPivLU<Matrix> lu(basis);
    if (!lu.isInvertible()) continue;
    Vector beta = lu.solve(rhs);
    const double loss = mean_pinball_loss(design, y, beta, tau);
    if (!best || loss < best->loss) best = Vertex{std::move(beta), loss, std::move(rows)};
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Exact descent over vertices (one basis row leaves per step, the entering
// row found by a line search over residual breakpoints). Zero residuals
// outside the basis count as positive, which resolves degenerate vertices
// consistently. Returns true when the optimality conditions hold.
bool simplex_descent(const Matrix& design, std::span<const double> y, double tau,
                     Vertex& v, int max_steps) {
  const auto n = design.rows();
  const auto p = design.cols();
  const Eigen::Map<const Vector> target(y.data(), n);
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (auto i : v.basis) in_basis[static_cast<std::size_t>(i)] = 1;
  struct Breakpoint {
    double t;
    Eigen::Index row;
    double jump;
  };
  std::vector<Breakpoint> breaks;

  for (int step = 0; step < max_steps; ++step) {
    Matrix xb(p, p);
    Vector yb(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      xb.row(k) = design.row(v.basis[static_cast<std::size_t>(k)]);
      yb[k] = target[v.basis[static_cast<std::size_t>(k)]];
    }
    const Eigen::PartialPivLU<Matrix> lu(xb);
    v.beta = lu.solve(yb);
    const Vector r = target - design * v.beta;

    Vector g = Vector::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)]) continue;
      g += design.row(i).transpose() * (r[i] < 0.0 ? tau - 1.0 : tau);
    }
    const Vector mult = -Eigen::PartialPivLU<Matrix>(xb.transpose()).solve(g);

    // Most violated basis multiplier; moving that row off the fit lowers
    // the loss with slope (v_j + 1 - tau) upward or (tau - v_j) downward.
    Eigen::Index leave = -1;
    double sigma = 0.0, slope = -1e-10;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double up = mult[k] + 1.0 - tau, down = tau - mult[k];
      if (up < slope) slope = up, sigma = 1.0, leave = k;
      if (down < slope) slope = down, sigma = -1.0, leave = k;
    }
    if (leave < 0) {
      v.loss = mean_pinball_loss(design, y, v.beta, tau);
      return true;
    }

    Vector unit = Vector::Zero(p);
    unit[leave] = sigma;
    const Vector d = lu.solve(unit);
    const Vector a = design * d;
    breaks.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || a[i] == 0.0) continue;
      const double t = r[i] / a[i];
      if (t > 0.0 || (r[i] == 0.0 && a[i] > 0.0)) breaks.push_back({std::max(t, 0.0), i, std::abs(a[i])});
    }
    std::sort(breaks.begin(), breaks.end(), [](const Breakpoint& x, const Breakpoint& z) {
      return x.t < z.t || (x.t == z.t && x.row < z.row);
    });
    Eigen::Index enter = -1;
    for (const auto& b : breaks) {
      slope += b.jump;
      if (slope >= 0.0) {
        enter = b.row;
        break;
      }
    }
    if (enter < 0) return false;  // unbounded direction: the design is degenerate
    in_basis[static_cast<std::size_t>(v.basis[static_cast<std::size_t>(leave)])] = 0;
    in_basis[static_cast<std::size_t>(enter)] = 1;
    v.basis[static_cast<std::size_t>(leave)] = enter;
  }
  v.loss = mean_pinball_loss(design, y, v.beta, tau);
  return false;
}

}  // namespace

QuantileFit quantreg_fit(const Matrix& features, std::span<const double> y,
                         double tau, const QuantRegOptions& options) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorCode::invalid_argument, "tau must lie in (0, 1)");
  if (static_cast<std::size_t>(features.rows()) != y.size())
    throw Error(ErrorCode::shape_mismatch, "feature rows and y length differ");
  const Matrix design = with_intercept(features);
  const auto n = design.rows();
  const auto p = design.cols();
  if (n < p)
    throw Error(ErrorCode::singular_design, "fewer rows than coefficients");

  const Eigen::Map<const Vector> target(y.data(), n);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < p)
    throw Error(ErrorCode::singular_design, "design matrix is rank deficient");

  QuantileFit fit;
  fit.tau = tau;
  fit.coefficients = qr.solve(Vector(target));
  Vector residuals = target - design * fit.coefficients;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = residuals[i];
      w[i] = (r > 0.0 ? tau : 1.0 - tau) / std::max(std::abs(r), options.epsilon);
    }
    const Matrix gram = design.transpose() * w.asDiagonal() * design;
    const Vector rhs = design.transpose() * w.cwiseProduct(target);
    Vector next = gram.ldlt().solve(rhs);
    if (!next.allFinite()) break;
    const double change = (next - fit.coefficients).cwiseAbs().maxCoeff();
    fit.coefficients = std::move(next);
    residuals = target - design * fit.coefficients;
    fit.iterations = it;
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.loss = mean_pinball_loss(design, y, fit.coefficients, tau);

  if (auto vertex = best_vertex(design, y, residuals, tau)) {
    const int steps = options.max_iterations + 10 * static_cast<int>(p);
    const bool optimal = simplex_descent(design, y, tau, *vertex, steps);
    const double slack = 1e-12 * (1.0 + std::abs(fit.loss));
    if (optimal || vertex->loss <= fit.loss + slack) {
      fit.coefficients = std::move(vertex->beta);
      fit.loss = vertex->loss;
      fit.vertex_refined = true;
      fit.converged = true;
    }
  }
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "quantile regression (tau=" << tau << ") did not converge after "
        << fit.iterations << " iterations; loss " << fit.loss;
    throw Error(ErrorCode::non_convergence, msg.str());
  }
  return fit;
}

QuantRegModel quantreg_fit_interval(const Matrix& features,
                                    std::span<const double> y, double alpha,
                                    OutcomeTransform transform,
                                    const QuantRegOptions& options) {
  check_alpha(alpha);
  std::vector<double> target(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) target[i] = transform.forward(y[i]);
  return {quantreg_fit(features, target, alpha / 2.0, options),
          quantreg_fit(features, target, 1.0 - alpha / 2.0, options), transform};
}

FlaggedInterval quantreg_interval(const QuantRegModel& model,
                                  std::span<const double> x) {
  const auto p = model.lower.coefficients.size();
  if (static_cast<Eigen::Index>(x.size()) + 1 != p)
    throw Error(ErrorCode::shape_mismatch, "feature length mismatch");
  auto linear = [&x](const Vector& beta) {
    double s = beta[0];
    for (std::size_t j = 0; j < x.size(); ++j)
      s += beta[static_cast<Eigen::Index>(j) + 1] * x[j];
    return s;
  };
  double lo = model.transform.inverse(linear(model.lower.coefficients));
  double hi = model.transform.inverse(linear(model.upper.coefficients));
  FlaggedInterval out;
  if (lo > hi) {
    std::swap(lo, hi);
    out.flags.set(Flag::quantile_crossing);
  }
  out.interval = {lo, hi};
  return out;
}

}  // namespace bccp

#include "priors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jdfm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

double MeanChf::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  switch (family) {
    case Family::weibull:
      return std::pow(t / scale, shape);
    case Family::exponential:
      return t / scale;
  }
  return 0.0;
}

MeanChf MeanChf::weibull(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("weibull mean: shape and scale must be positive");
  return MeanChf{Family::weibull, shape, scale};
}

MeanChf MeanChf::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential mean must be positive");
  return MeanChf{Family::exponential, 1.0, mean};
}

std::vector<double> prior_increment_shapes(const GammaProcessPrior& prior, const TimeGrid& grid) {
  if (!(prior.precision > 0.0))
    throw std::invalid_argument("prior_increment_shapes: precision must be positive");
  std::vector<double> shapes(grid.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double cur = prior.mean_chf(grid.times[j]);
    if (cur < prev) throw std::invalid_argument("prior mean CHF is decreasing");
    shapes[j] = prior.precision * (cur - prev);
    prev = cur;
  }
  return shapes;
}

namespace {

// Cholesky factor (lower) of a symmetric positive definite matrix.
std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a) {
  const std::size_t d = a.size();
  std::vector<std::vector<double>> l(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(s > 0.0)) throw std::invalid_argument("covariance is not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

}  // namespace

double NormalPrior::logpdf(const std::vector<double>& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("normal prior: dimension mismatch");
  if (covariance.empty()) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double v = variance[k];
      if (!(v > 0.0)) throw std::invalid_argument("normal prior: variance must be positive");
      const double d = x[k] - mean[k];
      acc += -0.5 * (d * d / v + std::log(v) + kLog2Pi);
    }
    return acc;
  }
  // Solve L y = (x - mean); logpdf = -0.5 (|y|^2 + log|Sigma| + d log 2pi).
  const auto l = cholesky(covariance);
  const std::size_t d = x.size();
  std::vector<double> y(d);
  double logdet = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = x[i] - mean[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
    logdet += 2.0 * std::log(l[i][i]);
  }
  double quad = 0.0;
  for (double v : y) quad += v * v;
  return -0.5 * (quad + logdet + static_cast<double>(d) * kLog2Pi);
}

std::vector<double> NormalPrior::grad_logpdf(const std::vector<double>& x) const {
  if (!covariance.empty()) {
    // grad = -Sigma^{-1} (x - mean) via two triangular solves.
    const auto l = cholesky(covariance);
    const std::size_t d = x.size();
    std::vector<double> y(d), g(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = x[i] - mean[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
      y[i] = s / l[i][i];
    }
    for (std::size_t ii = d; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < d; ++k) s -= l[k][ii] * g[k];
      g[ii] = s / l[ii][ii];
    }
    for (double& v : g) v = -v;
    return g;
  }
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) g[k] = -(x[k] - mean[k]) / variance[k];
  return g;
}

double GammaPrior::logpdf(double x) const {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

std::vector<std::vector<unsigned char>> same_type_structure(std::size_t n_types) {
  std::vector<std::vector<unsigned char>> free(n_types, std::vector<unsigned char>(n_types, 0));
  for (std::size_t q = 0; q < n_types; ++q) free[q][q] = 1;
  return free;
}

std::vector<std::vector<unsigned char>> full_structure(std::size_t n_types) {
  return std::vector<std::vector<unsigned char>>(n_types,
                                                 std::vector<unsigned char>(n_types, 1));
}

double log_prior_beta(const PriorSpec& spec, std::size_t process, const std::vector<double>& beta) {
  return spec.parametric.beta.at(process).logpdf(beta);
}

double log_prior_coeffs(const PriorSpec& spec, std::size_t process, const std::vector<double>& values) {
  const std::size_t nq = spec.n_types();
  if (values.size() != nq) throw std::invalid_argument("coeff block: dimension mismatch");
  double acc = 0.0;
  if (process == 0) {
    for (std::size_t l = 0; l < nq; ++l) acc += spec.parametric.gamma.at(l).logpdf(values[l]);
    return acc;
  }
  const auto& free = spec.alpha_free.at(process - 1);
  const auto& priors = spec.parametric.alpha.at(process - 1);
  for (std::size_t l = 0; l < nq; ++l) {
    if (free[l]) acc += priors.at(l).logpdf(values[l]);
  }
  return acc;
}

double log_prior_nu(const PriorSpec& spec, double nu) { return spec.parametric.nu.logpdf(nu); }

}  // namespace jdfm

#ifndef BLINDID_NUMERICS_HPP
#define BLINDID_NUMERICS_HPP

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace blindid {

/// Degrees of freedom and noncentrality of a chi-squared law.
/// A zero noncentrality is the central distribution.
struct ChiSquaredParams {
  int dof = 1;
  double noncentrality = 0.0;
};

void validate(const ChiSquaredParams& params);

/// Gauss-Legendre rule on a truncated fading support.
///
/// The |h| integrals are cut at the point where the neglected tail carries
/// at most `tail_cutoff_mass` of probability.
struct QuadratureSpec {
  int node_count = 256;
  double tail_cutoff_mass = 1e-10;
};

void validate(const QuadratureSpec& spec);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// log(1 + u) - u, accurate for small |u|.
double log1pmx(double u);

// Regularized incomplete beta I_x(a, b) and its inverse in x.
double beta_inc(double a, double b, double x);
double beta_inc_inv(double a, double b, double p);

double normal_sf(double x);
double normal_quantile(double p);

/// Central chi-squared CDF. Rejects x < 0 and dof < 1.
double chi2_cdf(int dof, double x);
double chi2_sf(int dof, double x);
double chi2_cdf(const ChiSquaredParams& params, double x);

/// Inverse of chi2_cdf on the open interval (0, 1).
///
/// Bracketed bisection seeded by the Wilson-Hilferty approximation.
double chi2_inv_cdf(int dof, double p);
double chi2_inv_cdf(const ChiSquaredParams& params, double p);

/// Noncentral chi-squared CDF as a Poisson(delta/2) mixture of central
/// CDFs. Whichever tail lies beyond the mean is summed directly and the
/// other is its complement; terms are dropped once they fall below a
/// 1e-14 share of the running sum. Relative accuracy holds down to 1e-30,
/// absolute accuracy below that.
double noncentral_chi2_cdf(const ChiSquaredParams& params, double x);
/// Upper tail 1 - noncentral_chi2_cdf with the same accuracy.
double noncentral_chi2_sf(const ChiSquaredParams& params, double x);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule; safe to call concurrently.
const GaussLegendreRule& gauss_legendre(int node_count);

/// Gauss-Legendre integral of f over [lo, hi]. Throws std::domain_error on a
/// non-finite evaluation.
double integrate(const std::function<double(double)>& f, double lo, double hi, int node_count);

/// |h| density when h ~ CN(0, 1): 2x exp(-x^2).
inline double rayleigh_pdf(double x) { return x <= 0.0 ? 0.0 : 2.0 * x * std::exp(-x * x); }
inline double rayleigh_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x * x); }

/// Truncation point sqrt(-ln(tail mass)) beyond which the Rayleigh tail is dropped.
double rayleigh_upper_limit(const QuadratureSpec& spec);

/// E[f(|h|)] for Rayleigh |h|.
///
/// `breakpoints` are points where f may jump; each panel between them gets
/// its own rule so step-like integrands integrate to full accuracy.
double rayleigh_expectation(const std::function<double(double)>& f, const QuadratureSpec& spec,
                            std::span<const double> breakpoints = {});

/// Integral of f(x) * rayleigh_pdf(x) over [lo, hi] (hi clipped to the truncation point).
double rayleigh_integral(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureSpec& spec, std::span<const double> breakpoints = {});

}  // namespace blindid

#endif  // BLINDID_NUMERICS_HPP

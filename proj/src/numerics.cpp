#include "blindid/numerics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace blindid {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10'000'000;
// Poisson mass allowed to fall outside the mixture, per direction, relative
// to the tail value; below kMixtureFloor the cut is absolute.
constexpr double kMixtureTail = 0.5e-14;
constexpr double kMixtureFloor = 1e-30;

// lnGamma(a) - [(a - 1/2) ln a - a + ln sqrt(2 pi)], valid for a >= 20.
double stirling_correction(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0)))));
}

// ln(x^a e^{-x} / Gamma(a)). The large-a branch avoids the cancellation
// between a ln x and lnGamma(a).
double log_gamma_prefix(double a, double x) {
  if (a < 20.0) return a * std::log(x) - x - std::lgamma(a);
  return a * log1pmx((x - a) / a) + 0.5 * std::log(a / (2.0 * std::numbers::pi)) -
         stirling_correction(a);
}

double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * std::exp(log_gamma_prefix(a, x));
  }
  throw std::runtime_error("gamma_p: series did not converge");
}

double upper_gamma_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h * std::exp(log_gamma_prefix(a, x));
  }
  throw std::runtime_error("gamma_q: continued fraction did not converge");
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("incomplete gamma: a must be positive");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be nonnegative");
}

double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("beta_inc: continued fraction did not converge");
}

void check_chi2_args(int dof, double x) {
  if (dof < 1) throw std::domain_error("chi-squared: dof must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi-squared: x must be nonnegative");
}

// Poisson mixture sum_j w_j G(a + j, y) for the lower (P) or upper (Q) tail.
//
// With t(s) = y^s e^{-y} / Gamma(s + 1), P(s + 1, y) = P(s, y) - t(s) and
// Q(s + 1, y) = Q(s, y) + t(s). Each recursion is only run in the direction
// where it adds, so the side where the tail shrinks is seeded at its far end.
double noncentral_tail(const ChiSquaredParams& params, double x, bool upper) {
  const double a = 0.5 * params.dof;
  const double y = 0.5 * x;
  const double lambda = 0.5 * params.noncentrality;
  if (lambda == 0.0) return upper ? gamma_q(a, y) : gamma_p(a, y);
  if (y == 0.0) return upper ? 1.0 : 0.0;

  auto weight = [&](double j) { return std::exp(-lambda + j * std::log(lambda) - std::lgamma(j + 1.0)); };
  auto step = [&](double s) { return std::exp(log_gamma_prefix(s, y)) / s; };
  auto tail = [&](double s) { return upper ? gamma_q(s, y) : gamma_p(s, y); };

  const double mode = std::floor(lambda);
  const double w_mode = weight(mode);
  const double g_mode = tail(a + mode);
  double sum = w_mode * g_mode;

  if (upper) {
    double w = w_mode, g = g_mode, t = step(a + mode);
    for (double j = mode + 1.0;; j += 1.0) {
      g = std::min(1.0, g + t);
      t = t > 0.0 ? t * y / (a + j) : step(a + j);
      w *= lambda / j;
      sum += w * g;
      const double ratio = lambda / (j + 1.0);
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) <= kMixtureTail * std::max(sum, kMixtureFloor)) break;
      if (j - mode > kMaxIterations) throw std::runtime_error("noncentral chi-squared: series did not converge");
    }
  } else {
    double w = w_mode, g = g_mode, t = step(a + mode);
    for (double j = mode - 1.0; j >= 0.0; j -= 1.0) {
      t = t > 0.0 ? t * (a + j + 1.0) / y : step(a + j);
      g = std::min(1.0, g + t);
      w *= (j + 1.0) / lambda;
      sum += w * g;
      const double ratio = j / lambda;
      if (w * ratio / (1.0 - ratio) <= kMixtureTail * std::max(sum, kMixtureFloor)) break;
    }
  }

  // Shrinking side: every term is at most w_j * g_mode.
  double far = mode;
  double w = w_mode;
  if (upper) {
    while (far > 0.0) {
      const double ratio = far / lambda;
      if (w * ratio / (1.0 - ratio) * g_mode <= kMixtureTail * std::max(sum, kMixtureFloor)) break;
      w *= far / lambda;
      far -= 1.0;
    }
    if (far < mode) {
      double g = tail(a + far), t = step(a + far);
      w = weight(far);
      for (double j = far; j < mode; j += 1.0) {
        sum += w * g;
        g = std::min(1.0, g + t);
        t *= y / (a + j + 1.0);
        w *= lambda / (j + 1.0);
      }
    }
  } else {
    for (;;) {
      const double ratio = lambda / (far + 1.0);
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) * g_mode <= kMixtureTail * std::max(sum, kMixtureFloor)) break;
      far += 1.0;
      w *= lambda / far;
      if (far - mode > kMaxIterations) throw std::runtime_error("noncentral chi-squared: series did not converge");
    }
    if (far > mode) {
      double g = tail(a + far), t = step(a + far - 1.0);
      w = weight(far);
      for (double j = far; j > mode; j -= 1.0) {
        sum += w * g;
        g = std::min(1.0, g + t);
        t *= (a + j - 1.0) / y;
        w *= j / lambda;
      }
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

// The tail on the far side of the mean is the small one; the other is its complement.
double noncentral_chi2(const ChiSquaredParams& params, double x, bool upper) {
  validate(params);
  check_chi2_args(params.dof, x);
  const bool right = x > params.dof + params.noncentrality;
  const double small = noncentral_tail(params, x, right);
  return right == upper ? small : 1.0 - small;
}

}  // namespace

void validate(const ChiSquaredParams& params) {
  if (params.dof < 1) throw std::domain_error("chi-squared: dof must be >= 1");
  if (!(params.noncentrality >= 0.0) || !std::isfinite(params.noncentrality))
    throw std::domain_error("chi-squared: noncentrality must be finite and nonnegative");
}

void validate(const QuadratureSpec& spec) {
  if (spec.node_count < 16) throw std::invalid_argument("quadrature: node_count must be >= 16");
  if (!(spec.tail_cutoff_mass > 0.0) || spec.tail_cutoff_mass > 1e-10)
    throw std::invalid_argument("quadrature: tail_cutoff_mass must lie in (0, 1e-10]");
}

double log1pmx(double u) {
  if (u <= -1.0) return u == -1.0 ? -std::numeric_limits<double>::infinity() : std::nan("");
  if (std::abs(u) > 0.5) return std::log1p(u) - u;
  // -u^2/2 + u^3/3 - ...
  double power = -u * u;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    const double term = power / k;
    sum += term;
    if (std::abs(term) <= std::abs(sum) * kEps) break;
    power *= -u;
  }
  return sum;
}

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::min(1.0, lower_gamma_series(a, x));
  return std::max(0.0, 1.0 - upper_gamma_fraction(a, x));
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return std::max(0.0, 1.0 - lower_gamma_series(a, x));
  return std::min(1.0, upper_gamma_fraction(a, x));
}

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_inc: a and b must be positive");
  if (!(x >= 0.0) || x > 1.0) throw std::domain_error("beta_inc: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double beta_inc_inv(double a, double b, double p) {
  if (!(p >= 0.0) || p > 1.0) throw std::domain_error("beta_inc_inv: p must lie in [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && hi - lo > kEps * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (beta_inc(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = p <= 0.5 ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                            : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double chi2_cdf(int dof, double x) {
  check_chi2_args(dof, x);
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(int dof, double x) {
  check_chi2_args(dof, x);
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_cdf(const ChiSquaredParams& params, double x) {
  validate(params);
  if (params.noncentrality != 0.0) throw std::domain_error("chi2_cdf: central distribution expected");
  return chi2_cdf(params.dof, x);
}

double chi2_inv_cdf(int dof, double p) {
  if (dof < 1) throw std::domain_error("chi2_inv_cdf: dof must be >= 1");
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("chi2_inv_cdf: p must lie in (0, 1)");

  // Upper-half probabilities compare survival values, which are exact there.
  const bool use_sf = p > 0.5;
  const double target = use_sf ? 1.0 - p : p;
  auto below = [&](double x) { return use_sf ? chi2_sf(dof, x) > target : chi2_cdf(dof, x) < target; };

  const double k = dof;
  const double h = 2.0 / (9.0 * k);
  const double cube = 1.0 - h + normal_quantile(p) * std::sqrt(h);
  double seed = k * cube * cube * cube;
  if (!(seed > 0.0)) seed = 1e-3 * k;

  double lo = seed;
  double hi = seed;
  if (below(seed)) {
    hi = 2.0 * seed + 1.0;
    while (below(hi)) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    lo = 0.5 * seed;
    while (lo > kTiny && !below(lo)) {
      hi = lo;
      lo *= 0.5;
    }
    if (lo <= kTiny) lo = 0.0;
  }
  for (int i = 0; i < 4000 && hi - lo > 2.0 * kEps * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double chi2_inv_cdf(const ChiSquaredParams& params, double p) {
  validate(params);
  if (params.noncentrality != 0.0) throw std::domain_error("chi2_inv_cdf: central distribution expected");
  return chi2_inv_cdf(params.dof, p);
}

double noncentral_chi2_cdf(const ChiSquaredParams& params, double x) {
  return noncentral_chi2(params, x, false);
}

double noncentral_chi2_sf(const ChiSquaredParams& params, double x) {
  return noncentral_chi2(params, x, true);
}

const GaussLegendreRule& gauss_legendre(int node_count) {
  if (node_count < 1) throw std::domain_error("gauss_legendre: node_count must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[node_count];
  if (slot) return *slot;

  auto rule = std::make_unique<GaussLegendreRule>();
  const int n = node_count;
  rule->nodes.assign(n, 0.0);
  rule->weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      derivative = n * (z * p1 - p2) / (z * z - 1.0);
      const double previous = z;
      z = previous - p1 / derivative;
      if (std::abs(z - previous) < 1e-15) break;
    }
    double p1 = 1.0;
    double p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    derivative = n * (z * p1 - p2) / (z * z - 1.0);
    rule->nodes[i] = -z;
    rule->nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
    rule->weights[i] = w;
    rule->weights[n - 1 - i] = w;
  }
  slot = std::move(rule);
  return *slot;
}

double integrate(const std::function<double(double)>& f, double lo, double hi, int node_count) {
  if (hi <= lo) return 0.0;
  const auto& rule = gauss_legendre(node_count);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double value = f(mid + half * rule.nodes[i]);
    if (!std::isfinite(value)) throw std::domain_error("integrate: non-finite integrand value");
    sum += rule.weights[i] * value;
  }
  return half * sum;
}

double rayleigh_upper_limit(const QuadratureSpec& spec) {
  validate(spec);
  return std::sqrt(-std::log(spec.tail_cutoff_mass));
}

double rayleigh_integral(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureSpec& spec, std::span<const double> breakpoints) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, rayleigh_upper_limit(spec));
  if (!(hi > lo)) return 0.0;

  std::vector<double> edges{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.push_back(hi);

  auto weighted = [&](double x) { return f(x) * rayleigh_pdf(x); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    total += integrate(weighted, edges[i], edges[i + 1], spec.node_count);
  return total;
}

double rayleigh_expectation(const std::function<double(double)>& f, const QuadratureSpec& spec,
                            std::span<const double> breakpoints) {
  return rayleigh_integral(f, 0.0, std::numeric_limits<double>::infinity(), spec, breakpoints);
}

}  // namespace blindid

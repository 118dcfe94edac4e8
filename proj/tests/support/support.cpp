#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace blindid::oracle {

namespace {

// Kolmogorov limiting distribution tail, P(K > t).
double kolmogorov_sf(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::vector<int> quantile_bins(const std::vector<double>& v, int bins) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<int> cell(v.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    cell[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(bins) / order.size());
  return cell;
}

}  // namespace

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  // Stephens' finite-sample correction.
  const double root = std::sqrt(n);
  return {d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d)};
}

double independence_p_value(const std::vector<double>& x, const std::vector<double>& y, int bins) {
  const auto bx = quantile_bins(x, bins);
  const auto by = quantile_bins(y, bins);
  std::vector<double> table(static_cast<std::size_t>(bins * bins), 0.0);
  std::vector<double> rows(bins, 0.0);
  std::vector<double> cols(bins, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    table[static_cast<std::size_t>(bx[i] * bins + by[i])] += 1.0;
    rows[bx[i]] += 1.0;
    cols[by[i]] += 1.0;
  }
  const double n = static_cast<double>(x.size());
  double stat = 0.0;
  for (int r = 0; r < bins; ++r) {
    for (int c = 0; c < bins; ++c) {
      const double expected = rows[r] * cols[c] / n;
      const double diff = table[static_cast<std::size_t>(r * bins + c)] - expected;
      stat += diff * diff / expected;
    }
  }
  const boost::math::chi_squared law((bins - 1) * (bins - 1));
  return boost::math::cdf(boost::math::complement(law, stat));
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double binomial_sigmas(std::uint64_t successes, std::uint64_t trials, double p) {
  const double n = static_cast<double>(trials);
  return std::abs(static_cast<double>(successes) - n * p) / std::sqrt(n * p * (1.0 - p));
}

}  // namespace blindid::oracle

#ifndef BLINDID_TESTS_SUPPORT_HPP
#define BLINDID_TESTS_SUPPORT_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace blindid::oracle {

// Two-sided one-sample Kolmogorov-Smirnov test against a continuous CDF.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Pearson chi-squared test of independence on a bins x bins grid of
// empirical quantile cells.
double independence_p_value(const std::vector<double>& x, const std::vector<double>& y, int bins = 4);

double correlation(const std::vector<double>& x, const std::vector<double>& y);

// |observed - expected| measured in binomial standard deviations.
double binomial_sigmas(std::uint64_t successes, std::uint64_t trials, double p);

}  // namespace blindid::oracle

#endif  // BLINDID_TESTS_SUPPORT_HPP

#ifndef BLINDID_ANALYSIS_HPP
#define BLINDID_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blindid/bler.hpp"
#include "blindid/channel.hpp"
#include "blindid/numerics.hpp"
#include "blindid/receiver.hpp"
#include "blindid/spectrum.hpp"

namespace blindid {

/// Probability that a non-target at pair level d accepts, for |h| = x fixed.
///
/// mse rule: F_{2n-2, delta}(2T), delta = 2nPx^2 (1 - d/n^2).
/// Two-look: times 1 - F_{2, delta'}(2nP h_bar^2), delta' = 2nPx^2 d/n^2.
double conditional_type2(int n, double P, std::int64_t d, const DecodingRule& rule, double x);

/// conditional_type2 averaged over the fading law. Requires 0 <= d <= n^2.
double lambda2_of_d(int n, double P, std::int64_t d, const DecodingRule& rule, const FadingModel& fading,
                    const QuadratureSpec& spec);

/// lambda2 at the guaranteed level d_min(spectrum, M).
double lambda2_gv(const WeightSpectrum& spectrum, std::uint64_t M, double P, const DecodingRule& rule,
                  const FadingModel& fading, const QuadratureSpec& spec);

/// sum_d P_d lambda2(d) over the spectrum support, summed in ascending d.
double lambda2_approx(const WeightSpectrum& spectrum, const std::function<double(std::int64_t)>& lambda2,
                      int workers = 1);
double lambda2_approx(const WeightSpectrum& spectrum, double P, const DecodingRule& rule,
                      const FadingModel& fading, const QuadratureSpec& spec, int workers = 1);

/// int P(target rejects | x) (1 - bler(P x^2)) p(x) dx.
double pat_p1_bound(int n, double P, const DecodingRule& rule, const FadingModel& fading, const BlerModel& bler,
                    const QuadratureSpec& spec);

/// Two-look false activation, per level and spectrum-averaged.
double pat_p2(int n, double P, std::int64_t d, const TwoLook& rule, const FadingModel& fading,
              const QuadratureSpec& spec);
double pat_p2(const WeightSpectrum& spectrum, double P, const TwoLook& rule, const FadingModel& fading,
              const QuadratureSpec& spec, int workers = 1);

struct ErrorBoundRow {
  std::int64_t d = 0;
  double p_d = 0.0;
  double lambda2_mse = 0.0;
  std::optional<double> lambda2_twolook;
};

struct ErrorBoundReport {
  int n = 0;
  std::uint64_t M = 0;
  double P = 0.0;
  std::int64_t d_min_used = 0;
  double lambda2_gv = 0.0;
  double lambda2_approx = 0.0;
  std::optional<double> lambda2_gv_twolook;
  std::optional<double> lambda2_approx_twolook;
  std::string assumptions;
  std::vector<ErrorBoundRow> rows;
};

/// Per-level table over the spectrum support plus the GV and averaged values.
ErrorBoundReport error_bound_report(const WeightSpectrum& spectrum, std::uint64_t M, double P, const MseOnly& mse,
                                    const std::optional<TwoLook>& two_look, const FadingModel& fading,
                                    const QuadratureSpec& spec, int workers = 1);

/// Columns d,P_d,lambda2_mse,lambda2_twolook (empty when no two-look rule).
void write_report_csv(std::ostream& out, const ErrorBoundReport& report);

}  // namespace blindid

#endif  // BLINDID_ANALYSIS_HPP

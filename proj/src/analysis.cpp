#include "blindid/analysis.hpp"
#include "blindid/format.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>

#include "blindid/parallel.hpp"

namespace blindid {

namespace {

void check_level(int n, std::int64_t d) {
  if (n < 2) throw std::invalid_argument("analysis: n must be >= 2");
  if (d < 0 || d > static_cast<std::int64_t>(n) * n) throw std::invalid_argument("analysis: d must lie in [0, n^2]");
}

// Second-look acceptance factor P(|h_hat| >= h_bar) for a non-target at level d.
double estimate_pass(int n, double P, std::int64_t d, double h_bar, double x) {
  if (h_bar == std::numeric_limits<double>::infinity()) return 0.0;
  const double energy = static_cast<double>(n) * n;
  const double delta = 2.0 * n * P * x * x * static_cast<double>(d) / energy;
  return noncentral_chi2_sf({2, delta}, 2.0 * n * P * h_bar * h_bar);
}

bool is_continuous(const FadingModel& fading) {
  return std::holds_alternative<RayleighFading>(fading) || std::holds_alternative<TruncatedRayleigh>(fading);
}

// |h| at which a step BLER jumps, so quadrature can split there.
std::optional<double> bler_jump(const BlerModel& bler, double P) {
  if (const auto* step = std::get_if<StepBler>(&bler)) return std::sqrt(std::pow(10.0, step->threshold_snr_db / 10.0) / P);
  return std::nullopt;
}

std::vector<double> sweep(const WeightSpectrum& spectrum, const std::function<double(std::int64_t)>& lambda2,
                          int workers) {
  const auto& levels = spectrum.support();
  std::vector<double> values(levels.size(), 0.0);
  parallel_for(levels.size(), workers, [&](std::size_t i) { values[i] = lambda2(levels[i]); });
  return values;
}

}  // namespace

double conditional_type2(int n, double P, std::int64_t d, const DecodingRule& rule, double x) {
  check_level(n, d);
  const double fraction = static_cast<double>(d) / (static_cast<double>(n) * n);
  const double delta = 2.0 * n * P * x * x * (1.0 - fraction);
  const double mse_pass = noncentral_chi2_cdf({2 * n - 2, delta}, 2.0 * threshold_of(rule));
  if (const auto* two = std::get_if<TwoLook>(&rule)) return mse_pass * estimate_pass(n, P, d, two->h_bar, x);
  return mse_pass;
}

double lambda2_of_d(int n, double P, std::int64_t d, const DecodingRule& rule, const FadingModel& fading,
                    const QuadratureSpec& spec) {
  check_level(n, d);
  validate(rule);
  return magnitude_expectation(fading, [&](double x) { return conditional_type2(n, P, d, rule, x); }, spec);
}

double lambda2_gv(const WeightSpectrum& spectrum, std::uint64_t M, double P, const DecodingRule& rule,
                  const FadingModel& fading, const QuadratureSpec& spec) {
  return lambda2_of_d(spectrum.n(), P, d_min(spectrum, M), rule, fading, spec);
}

double lambda2_approx(const WeightSpectrum& spectrum, const std::function<double(std::int64_t)>& lambda2,
                      int workers) {
  const auto values = sweep(spectrum, lambda2, workers);
  const auto& levels = spectrum.support();
  double total = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) total += spectrum.probability(levels[i]) * values[i];
  return total;
}

double lambda2_approx(const WeightSpectrum& spectrum, double P, const DecodingRule& rule,
                      const FadingModel& fading, const QuadratureSpec& spec, int workers) {
  return lambda2_approx(
      spectrum, [&](std::int64_t d) { return lambda2_of_d(spectrum.n(), P, d, rule, fading, spec); }, workers);
}

double pat_p1_bound(int n, double P, const DecodingRule& rule, const FadingModel& fading, const BlerModel& bler,
                    const QuadratureSpec& spec) {
  if (n < 2) throw std::invalid_argument("pat_p1_bound: n must be >= 2");
  validate(rule);
  validate(bler);
  const double mse_reject = chi2_sf(2 * n - 2, 2.0 * threshold_of(rule));
  const auto* two = std::get_if<TwoLook>(&rule);
  auto integrand = [&](double x) {
    double reject = mse_reject;
    if (two != nullptr) {
      const double estimate_reject =
          two->h_bar == std::numeric_limits<double>::infinity()
              ? 1.0
              : noncentral_chi2_cdf({2, 2.0 * n * P * x * x}, 2.0 * n * P * two->h_bar * two->h_bar);
      reject = 1.0 - (1.0 - mse_reject) * (1.0 - estimate_reject);
    }
    return reject * (1.0 - bler_eval(bler, P * x * x));
  };
  const auto jump = bler_jump(bler, P);
  if (jump && is_continuous(fading)) {
    return magnitude_expectation(fading, integrand, spec, 0.0, *jump) +
           magnitude_expectation(fading, integrand, spec, *jump);
  }
  return magnitude_expectation(fading, integrand, spec);
}

double pat_p2(int n, double P, std::int64_t d, const TwoLook& rule, const FadingModel& fading,
              const QuadratureSpec& spec) {
  return lambda2_of_d(n, P, d, rule, fading, spec);
}

double pat_p2(const WeightSpectrum& spectrum, double P, const TwoLook& rule, const FadingModel& fading,
              const QuadratureSpec& spec, int workers) {
  return lambda2_approx(spectrum, P, rule, fading, spec, workers);
}

ErrorBoundReport error_bound_report(const WeightSpectrum& spectrum, std::uint64_t M, double P, const MseOnly& mse,
                                    const std::optional<TwoLook>& two_look, const FadingModel& fading,
                                    const QuadratureSpec& spec, int workers) {
  ErrorBoundReport report;
  report.n = spectrum.n();
  report.M = M;
  report.P = P;
  report.d_min_used = d_min(spectrum, M);
  report.assumptions = "fading=" + to_string(fading) + ";mse=" + to_string(DecodingRule{mse});
  if (two_look) report.assumptions += ";twolook=" + to_string(DecodingRule{*two_look});

  const int n = spectrum.n();
  const auto mse_values =
      sweep(spectrum, [&](std::int64_t d) { return lambda2_of_d(n, P, d, mse, fading, spec); }, workers);
  std::vector<double> two_values;
  if (two_look) {
    two_values =
        sweep(spectrum, [&](std::int64_t d) { return lambda2_of_d(n, P, d, *two_look, fading, spec); }, workers);
  }

  const auto& levels = spectrum.support();
  double approx = 0.0;
  double approx_two = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ErrorBoundRow row;
    row.d = levels[i];
    row.p_d = spectrum.probability(levels[i]);
    row.lambda2_mse = mse_values[i];
    approx += row.p_d * mse_values[i];
    if (two_look) {
      row.lambda2_twolook = two_values[i];
      approx_two += row.p_d * two_values[i];
    }
    report.rows.push_back(row);
  }
  report.lambda2_approx = approx;
  report.lambda2_gv = lambda2_of_d(n, P, report.d_min_used, mse, fading, spec);
  if (two_look) {
    report.lambda2_approx_twolook = approx_two;
    report.lambda2_gv_twolook = lambda2_of_d(n, P, report.d_min_used, *two_look, fading, spec);
  }
  return report;
}

void write_report_csv(std::ostream& out, const ErrorBoundReport& report) {
  out << "d,P_d,lambda2_mse,lambda2_twolook\n";
  for (const auto& row : report.rows) {
    out << row.d << ',' << format_double(row.p_d) << ',' << format_double(row.lambda2_mse) << ',';
    if (row.lambda2_twolook) out << format_double(*row.lambda2_twolook);
    out << '\n';
  }
}

}  // namespace blindid

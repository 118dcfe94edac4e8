#include "blindid/receiver.hpp"
#include "blindid/format.hpp"

#include <limits>
#include <vector>

#include "blindid/parallel.hpp"

namespace blindid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double magnitude_quantile(const FadingModel& fading, double q) {
  if (std::holds_alternative<RayleighFading>(fading)) return std::sqrt(-std::log1p(-q));
  const auto& t = std::get<TruncatedRayleigh>(fading);
  const double z = std::exp(-t.lower) - std::exp(-t.upper);
  return std::sqrt(-std::log(std::exp(-t.lower) - q * z));
}

// int_{u_h}^inf P(|h_hat| < h_bar | |h| = x) p(x) dx for the target receiver.
double estimate_look_mass(int n, double P, double u_h, double h_bar, const FadingModel& fading,
                          const QuadratureSpec& spec) {
  const double scale = 2.0 * n * P;
  if (h_bar == kInf) return magnitude_expectation(fading, [](double) { return 1.0; }, spec, u_h);
  const double z = scale * h_bar * h_bar;
  return magnitude_expectation(
      fading, [&](double x) { return noncentral_chi2_cdf({2, scale * x * x}, z); }, spec, u_h);
}

double weak_channel_term(double P, double u_h, const FadingModel& fading, const BlerModel& bler_lb) {
  return magnitude_cdf(fading, u_h) * (1.0 - bler_eval(bler_lb, P * u_h * u_h));
}

struct SplitOutcome {
  bool feasible = false;
  double h_bar = -1.0;
};

SplitOutcome best_h_bar(int n, double P, double u_h, double budget, const FadingModel& fading,
                        const BlerModel& bler_lb, const QuadratureSpec& spec, double tolerance) {
  const double first = weak_channel_term(P, u_h, fading, bler_lb);
  if (first > budget) return {};
  const double room = budget - first;
  if (estimate_look_mass(n, P, u_h, kInf, fading, spec) <= room) return {true, kInf};

  auto fits = [&](double h_bar) { return estimate_look_mass(n, P, u_h, h_bar, fading, spec) <= room; };
  double lo = 0.0;
  double hi = 1.0;
  while (fits(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {true, lo};
}

}  // namespace

void validate(const DecodingRule& rule) {
  std::visit(overloaded{
                 [](const MseOnly& r) {
                   if (!(r.T > 0.0)) throw std::invalid_argument("decoding rule: T must be positive");
                 },
                 [](const TwoLook& r) {
                   if (!(r.T > 0.0)) throw std::invalid_argument("decoding rule: T must be positive");
                   if (!(r.h_bar >= 0.0)) throw std::invalid_argument("decoding rule: h_bar must be nonnegative");
                 },
             },
             rule);
}

std::string to_string(const DecodingRule& rule) {
  if (const auto* two = std::get_if<TwoLook>(&rule))
    return "twolook(T=" + format_double(two->T) + ",h_bar=" + format_double(two->h_bar) + ")";
  return "mse(T=" + format_double(std::get<MseOnly>(rule).T) + ")";
}

double threshold_of(const DecodingRule& rule) {
  return std::visit([](const auto& r) { return r.T; }, rule);
}

double mse_threshold(int n, double lambda1) {
  if (n < 2) throw std::invalid_argument("mse_threshold: n must be >= 2");
  return 0.5 * chi2_inv_cdf(2 * n - 2, 1.0 - lambda1);
}

double two_look_estimate_budget_use(int n, double P, double u_h, double h_bar, const FadingModel& fading,
                                    const BlerModel& bler_lb, const QuadratureSpec& spec) {
  return weak_channel_term(P, u_h, fading, bler_lb) + estimate_look_mass(n, P, u_h, h_bar, fading, spec);
}

CalibrationResult calibrate_two_look(int n, double P, double lambda1, const FadingModel& fading,
                                     const BlerModel& bler_lb, const QuadratureSpec& spec,
                                     const CalibrationOptions& options) {
  if (n < 2) throw std::invalid_argument("calibrate_two_look: n must be >= 2");
  if (!(P > 0.0)) throw std::invalid_argument("calibrate_two_look: P must be positive");
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw std::invalid_argument("calibrate_two_look: lambda1 must lie in (0, 1)");
  if (!(options.mse_share > 0.0 && options.mse_share < 1.0))
    throw std::invalid_argument("calibrate_two_look: mse_share must lie in (0, 1)");
  if (!std::holds_alternative<RayleighFading>(fading) && !std::holds_alternative<TruncatedRayleigh>(fading))
    throw std::invalid_argument("calibrate_two_look: needs Rayleigh or truncated Rayleigh fading");
  validate(fading);
  validate(bler_lb);
  validate(spec);

  const double T = 0.5 * chi2_inv_cdf(2 * n - 2, 1.0 - lambda1 * options.mse_share);
  const double budget = lambda1 * (1.0 - options.mse_share);

  std::vector<double> grid;
  if (options.forced_u_h) {
    if (!(*options.forced_u_h >= 0.0)) throw std::invalid_argument("calibrate_two_look: u_h must be nonnegative");
    grid.push_back(*options.forced_u_h);
  } else {
    if (options.grid_points < 2) throw std::invalid_argument("calibrate_two_look: need at least two grid points");
    constexpr double q_lo = 1e-4;
    constexpr double q_hi = 1.0 - 1e-4;
    for (int i = 0; i < options.grid_points; ++i) {
      const double q = q_lo + (q_hi - q_lo) * i / (options.grid_points - 1);
      grid.push_back(magnitude_quantile(fading, q));
    }
  }

  std::vector<SplitOutcome> outcomes(grid.size());
  parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    outcomes[i] = best_h_bar(n, P, grid[i], budget, fading, bler_lb, spec, options.tolerance);
  });

  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!outcomes[i].feasible) continue;
    if (best == grid.size() || outcomes[i].h_bar > outcomes[best].h_bar) best = i;
  }
  if (best == grid.size()) throw std::runtime_error("calibrate_two_look: no split point meets the type-I budget");

  CalibrationResult result;
  result.rule = TwoLook{T, outcomes[best].h_bar};
  result.u_h = grid[best];
  result.p1_bound = two_look_estimate_budget_use(n, P, result.u_h, result.rule.h_bar, fading, bler_lb, spec) +
                    lambda1 * options.mse_share;
  return result;
}

}  // namespace blindid

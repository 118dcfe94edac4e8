#ifndef BLINDID_RECEIVER_HPP
#define BLINDID_RECEIVER_HPP

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "blindid/bler.hpp"
#include "blindid/channel.hpp"
#include "blindid/numerics.hpp"
#include "blindid/types.hpp"

namespace blindid {

/// Channel estimate and residual energy of a block against one codeword.
template <typename Real>
struct ReceiverMetrics {
  std::complex<Real> h_hat;
  Real mse;
};

/// h_hat = c^H y / (nP), mse = ||y - h_hat c||^2.
template <typename DerivedC, typename DerivedY>
auto compute_metrics(const Eigen::MatrixBase<DerivedC>& codeword, const Eigen::MatrixBase<DerivedY>& y,
                     typename DerivedC::RealScalar P) {
  using Real = typename DerivedC::RealScalar;
  if (codeword.size() != y.size()) throw std::invalid_argument("compute_metrics: length mismatch");
  const Real energy = static_cast<Real>(codeword.size()) * P;
  const std::complex<Real> h_hat = codeword.dot(y) / energy;
  const Real mse = (y - h_hat * codeword).squaredNorm();
  return ReceiverMetrics<Real>{h_hat, mse};
}

/// Accept iff mse <= T.
struct MseOnly {
  double T = 0.0;
};

/// Accept iff mse <= T and |h_hat| >= h_bar.
struct TwoLook {
  double T = 0.0;
  double h_bar = 0.0;
};

using DecodingRule = std::variant<MseOnly, TwoLook>;

void validate(const DecodingRule& rule);
std::string to_string(const DecodingRule& rule);
double threshold_of(const DecodingRule& rule);

template <typename Real>
bool decide(const DecodingRule& rule, const ReceiverMetrics<Real>& m) {
  if (const auto* two = std::get_if<TwoLook>(&rule)) {
    return m.mse <= two->T && std::abs(m.h_hat) >= two->h_bar;
  }
  return m.mse <= std::get<MseOnly>(rule).T;
}

/// T = F^{-1}_{2n-2}(1 - lambda1) / 2: the target rejects with probability
/// exactly lambda1 for every h.
double mse_threshold(int n, double lambda1);

struct CalibrationOptions {
  /// Share of lambda1 spent on the mse look; the rest bounds the estimate look.
  double mse_share = 0.5;
  int grid_points = 200;
  /// Skip the grid search and use this split point.
  std::optional<double> forced_u_h;
  double tolerance = 1e-9;
  int workers = 1;
};

struct CalibrationResult {
  TwoLook rule;
  double u_h = 0.0;
  /// Certified bound on the overall type-I rate (<= lambda1).
  double p1_bound = 0.0;
};

/// Chooses (T, h_bar) for the two-look rule.
///
/// T takes lambda1 * mse_share. For every split point u_h the largest h_bar
/// keeping
///   P(|h| <= u_h) (1 - bler_lb(P u_h^2)) + int_{u_h}^inf F_{2, 2nPx^2}(2nP h_bar^2) p(x) dx
/// within the remaining budget is found by bisection; the split with the
/// largest h_bar wins (smallest u_h on ties). h_bar is +inf when the budget
/// never binds.
CalibrationResult calibrate_two_look(int n, double P, double lambda1, const FadingModel& fading,
                                     const BlerModel& bler_lb, const QuadratureSpec& spec,
                                     const CalibrationOptions& options = {});

/// The bound calibrate_two_look certifies, for a given split and h_bar,
/// without the mse share.
double two_look_estimate_budget_use(int n, double P, double u_h, double h_bar, const FadingModel& fading,
                                    const BlerModel& bler_lb, const QuadratureSpec& spec);

}  // namespace blindid

#endif  // BLINDID_RECEIVER_HPP

#ifndef BLINDID_PAT_HPP
#define BLINDID_PAT_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>

#include "blindid/analysis.hpp"
#include "blindid/bler.hpp"
#include "blindid/montecarlo.hpp"

namespace blindid {

/// Pilot-assisted transmission: the identification codeword is the pilot and
/// the payload decodes with probability 1 - bler(P |h|^2).
struct PatPlan {
  std::shared_ptr<const Codebook> codebook;
  DecodingRule rule = MseOnly{};
  FadingModel fading = RayleighFading{};
  BlerModel bler = NormalApproximation{};
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  PairSampling pair_sampling = SampledPairs{};
  int workers = 1;
};

struct PatResult {
  /// Target rejects a payload that would have decoded.
  Estimate p1_overall;
  /// Non-target accepts.
  Estimate p2_overall;
  std::optional<CalibrationResult> calibration;
};

void validate(const PatPlan& plan);

/// Same trial streams as run_experiment, plus one uniform per trial for the
/// payload coin after the receiver draws.
PatResult simulate_pat(const PatPlan& plan);

/// Analytical side of one configuration.
struct PatAnalysis {
  int n = 0;
  double P = 0.0;
  double lambda1 = 0.0;
  DecodingRule rule = MseOnly{};
  FadingModel fading = RayleighFading{};
  BlerModel bler = NormalApproximation{};
  double p1_bound = 0.0;
  /// Spectrum-averaged false activation under `rule`.
  double p2 = 0.0;
};

PatAnalysis analyze_pat(const WeightSpectrum& spectrum, double P, double lambda1, const DecodingRule& rule,
                        const FadingModel& fading, const BlerModel& bler, const QuadratureSpec& spec,
                        int workers = 1);

struct PatReportRow {
  PatAnalysis analysis;
  std::uint64_t M = 0;
  PatResult simulation;
};

/// Joins analysis and simulation; throws std::invalid_argument when their
/// configurations differ.
PatReportRow pat_report_row(const PatAnalysis& analysis, const PatPlan& plan, const PatResult& simulation);

/// Header always; one row per entry.
void write_pat_report(std::ostream& out, std::span<const PatReportRow> rows);

}  // namespace blindid

#endif  // BLINDID_PAT_HPP

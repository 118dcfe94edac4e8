#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "blindid/pat.hpp"
#include "support.hpp"

using namespace blindid;

namespace {

const QuadratureSpec kSpec;

PatPlan plan_for(int n, std::uint64_t M, const DecodingRule& rule, const BlerModel& bler, std::uint64_t trials,
                 std::uint64_t seed) {
  PatPlan plan;
  plan.codebook = std::make_shared<const Codebook>(random_codebook(CodeConfig{n, M, 1.0}, seed));
  plan.rule = rule;
  plan.bler = bler;
  plan.trials = trials;
  plan.master_seed = seed;
  return plan;
}

// Upper end of a 3-sigma band around p for t trials.
double three_sigma_above(double p, std::uint64_t t) { return p + 3.0 * std::sqrt(p * (1.0 - p) / t); }

}  // namespace

TEST(SimulatePat, UndecodablePayloadsAreNeverMissed) {
  const auto plan = plan_for(16, 10, MseOnly{mse_threshold(16, 0.2)}, ConstantBler{1.0}, 5000, 1);
  const auto result = simulate_pat(plan);
  EXPECT_EQ(result.p1_overall.successes, 0U);
  EXPECT_EQ(result.p1_overall.ci_low, 0.0);
}

TEST(SimulatePat, AlwaysDecodablePayloadReducesToIdentification) {
  const double lambda1 = 0.05;
  const auto plan = plan_for(16, 10, MseOnly{mse_threshold(16, lambda1)}, ConstantBler{0.0}, 40000, 2);
  const auto result = simulate_pat(plan);
  EXPECT_LT(oracle::binomial_sigmas(result.p1_overall.successes, plan.trials, lambda1), 3.0);
}

TEST(SimulatePat, SharesTrialStreamsWithTheIdentificationExperiment) {
  auto plan = plan_for(12, 20, TwoLook{mse_threshold(12, 0.02), 0.3}, NormalApproximation{128, 64}, 4000, 3);
  const auto pat = simulate_pat(plan);
  ExperimentPlan experiment{plan.codebook, plan.rule, plan.fading, plan.trials, plan.master_seed, plan.pair_sampling};
  const auto rates = run_experiment(experiment);
  EXPECT_EQ(pat.p2_overall.successes, rates.type2_avg.successes);
  EXPECT_EQ(pat.p2_overall.ci_high, rates.type2_avg.ci_high);
  EXPECT_LE(pat.p1_overall.successes, rates.type1.successes);

  plan.workers = 3;
  const auto parallel = simulate_pat(plan);
  EXPECT_EQ(parallel.p1_overall.successes, pat.p1_overall.successes);
  EXPECT_EQ(parallel.p2_overall.successes, pat.p2_overall.successes);
}

TEST(SimulatePat, CalibratedTwoLookKeepsTheCertificate) {
  const int n = 64;
  const double lambda1 = 0.05;
  const BlerModel bler = NormalApproximation{128, 64};
  const auto calibration = calibrate_two_look(n, 1.0, lambda1, RayleighFading{}, bler, kSpec);
  ASSERT_LE(calibration.p1_bound, lambda1);

  auto two = plan_for(n, 50, calibration.rule, bler, 40000, 4);
  auto mse = two;
  mse.rule = MseOnly{mse_threshold(n, lambda1)};
  const auto a = simulate_pat(two);
  const auto b = simulate_pat(mse);
  EXPECT_LE(a.p1_overall.value, three_sigma_above(lambda1, two.trials));
  EXPECT_LT(a.p2_overall.ci_high, b.p2_overall.ci_low);
}

TEST(PatReport, EmptySweepIsHeaderOnly) {
  std::ostringstream out;
  write_pat_report(out, {});
  EXPECT_EQ(out.str(),
            "n,M,P,lambda1,rule,fading,bler,p1_bound,p2_analytic,p1_empirical,p1_ci_low,p1_ci_high,"
            "p2_empirical,p2_ci_low,p2_ci_high,trials\n");
}

TEST(PatReport, SingleRowAndMismatch) {
  const int n = 8;
  const double lambda1 = 0.1;
  const DecodingRule rule = MseOnly{mse_threshold(n, lambda1)};
  const BlerModel bler = StepBler{0.0};
  const auto spectrum = weight_spectrum(n, SpectrumMode::exact);
  const auto analysis = analyze_pat(spectrum, 1.0, lambda1, rule, RayleighFading{}, bler, kSpec);
  // Step at 0 dB: only |h| >= 1 decodes. The quadrature drops 1e-10 of tail mass.
  EXPECT_NEAR(analysis.p1_bound, lambda1 * std::exp(-1.0), 2e-11);
  EXPECT_EQ(analysis.p2, lambda2_approx(spectrum, 1.0, rule, RayleighFading{}, kSpec));

  const auto plan = plan_for(n, 4, rule, bler, 1000, 5);
  const auto sim = simulate_pat(plan);
  const std::vector<PatReportRow> rows{pat_report_row(analysis, plan, sim)};
  std::ostringstream out;
  write_pat_report(out, rows);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
  EXPECT_EQ(line.rfind("8,4,1,0.1,mse(T=", 0), 0U) << line;
  EXPECT_NE(line.find(",rayleigh,step:0,"), std::string::npos) << line;
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "1000");
  EXPECT_FALSE(std::getline(lines, line));

  auto other = plan;
  other.bler = ConstantBler{0.5};
  EXPECT_THROW(pat_report_row(analysis, other, sim), std::invalid_argument);
  other = plan;
  other.rule = MseOnly{1.0};
  EXPECT_THROW(pat_report_row(analysis, other, sim), std::invalid_argument);
  other = plan_for(n + 1, 4, rule, bler, 1000, 5);
  EXPECT_THROW(pat_report_row(analysis, other, sim), std::invalid_argument);
}

TEST(PatBound, StepModelAtTheSplitCountsEveryWeakChannel) {
  for (double u : {0.1, 0.48, 1.3}) {
    const BlerModel step = StepBler{10.0 * std::log10(2.0 * u * u)};
    EXPECT_DOUBLE_EQ(two_look_estimate_budget_use(32, 2.0, u, 0.0, RayleighFading{}, step, kSpec),
                     magnitude_cdf(RayleighFading{}, u));
  }
}

TEST(PatBound, LambdaSweepBoundsTheSimulation) {
  const int n = 32;
  const BlerModel bler = NormalApproximation{128, 64};
  const auto spectrum = weight_spectrum(n, SpectrumMode::log_domain);
  for (double lambda1 : {0.1, 0.01, 0.001}) {
    const auto calibration = calibrate_two_look(n, 1.0, lambda1, RayleighFading{}, bler, kSpec);
    const auto analysis = analyze_pat(spectrum, 1.0, lambda1, calibration.rule, RayleighFading{}, bler, kSpec);
    EXPECT_LE(analysis.p1_bound, lambda1);
    const auto sim = simulate_pat(plan_for(n, 20, calibration.rule, bler, 20000, 6));
    EXPECT_LE(sim.p1_overall.value, three_sigma_above(analysis.p1_bound, 20000)) << lambda1;
  }
}

TEST(PatPlanValidation, RejectsBadInputs) {
  auto plan = plan_for(8, 4, MseOnly{1.0}, ConstantBler{0.0}, 10, 1);
  plan.trials = 0;
  EXPECT_THROW(simulate_pat(plan), std::invalid_argument);
  plan.trials = 10;
  plan.bler = BlerTable{};
  EXPECT_THROW(simulate_pat(plan), std::invalid_argument);
}

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "blindid/analysis.hpp"
#include "blindid/channel.hpp"
#include "blindid/codebook.hpp"
#include "blindid/random.hpp"
#include "support.hpp"

using namespace blindid;

namespace {

QpskCodeword nth_sequence(int n, std::uint64_t index) {
  std::vector<std::uint8_t> symbols(static_cast<std::size_t>(n));
  for (auto& s : symbols) {
    s = static_cast<std::uint8_t>(index & 3U);
    index >>= 2;
  }
  return QpskCodeword(symbols);
}

const QuadratureSpec kSpec;

}  // namespace

TEST(Lambda2OfD, FullOverlapBehavesLikeTheTarget) {
  const double lambda1 = 0.01;
  const std::vector<FadingModel> models{RayleighFading{}, FixedCoefficient{{0.3, -2.0}},
                                        FixedMagnitudeUniformPhase{4.0}, TruncatedRayleigh{0.2, 3.0}};
  for (int n : {4, 16, 64}) {
    const DecodingRule rule = MseOnly{mse_threshold(n, lambda1)};
    for (double P : {0.5, 1.0, 10.0})
      for (const auto& fading : models)
        EXPECT_NEAR(lambda2_of_d(n, P, static_cast<std::int64_t>(n) * n, rule, fading, kSpec), 1.0 - lambda1, 1e-9);
  }
}

TEST(Lambda2OfD, NoSignalMakesEveryReceiverATarget) {
  const int n = 16;
  const double lambda1 = 0.05;
  const DecodingRule rule = MseOnly{mse_threshold(n, lambda1)};
  for (std::int64_t d : {0, 10, 128, 256}) {
    EXPECT_NEAR(lambda2_of_d(n, 1.0, d, rule, FixedCoefficient{{0.0, 0.0}}, kSpec), 1.0 - lambda1, 1e-12);
    EXPECT_NEAR(conditional_type2(n, 1.0, d, rule, 0.0), 1.0 - lambda1, 1e-12);
  }
  EXPECT_THROW(lambda2_of_d(n, 1.0, -1, rule, RayleighFading{}, kSpec), std::invalid_argument);
  EXPECT_THROW(lambda2_of_d(n, 1.0, 257, rule, RayleighFading{}, kSpec), std::invalid_argument);
}

TEST(Lambda2OfD, MatchesSimulationOfAPairAtLevel64) {
  constexpr int n = 16;
  constexpr int trials = 100000;
  const double lambda1 = 0.01;
  const DecodingRule rule = MseOnly{mse_threshold(n, lambda1)};
  // Eight zeros, four +j and four -j against the all-zero word: inner product 8.
  const auto sent = QpskCodeword::from_string("0000000000000000");
  const auto other = QpskCodeword::from_string("0000000011113333");
  ASSERT_EQ(pair_level_d(sent, other), 64);
  const auto c = modulate(sent, 1.0);
  const auto c_other = modulate(other, 1.0);

  std::uint64_t accepts = 0;
  for (int t = 0; t < trials; ++t) {
    RandomStream stream(31, static_cast<std::uint64_t>(t));
    const Complex h = sample_fading(FixedMagnitudeUniformPhase{1.0}, stream);
    const auto y = transmit(c, h, 1.0, NoiseSource::gaussian(stream)).y;
    if (decide(rule, compute_metrics(c_other, y, 1.0))) ++accepts;
  }
  const double expected = lambda2_of_d(n, 1.0, 64, rule, FixedMagnitudeUniformPhase{1.0}, kSpec);
  EXPECT_LT(oracle::binomial_sigmas(accepts, trials, expected), 3.0) << expected;
}

TEST(Lambda2OfD, NondecreasingInTheLevel) {
  const std::vector<FadingModel> models{RayleighFading{}, FixedMagnitudeUniformPhase{1.0},
                                        FixedMagnitudeUniformPhase{0.25}};
  for (int n : {8, 16, 32}) {
    const std::int64_t top = static_cast<std::int64_t>(n) * n;
    const DecodingRule rule = MseOnly{mse_threshold(n, 0.01)};
    for (const auto& fading : models) {
      double previous = 0.0;
      for (std::int64_t d : {std::int64_t{0}, top / 4, top / 2, 3 * top / 4, top}) {
        const double value = lambda2_of_d(n, 1.0, d, rule, fading, kSpec);
        EXPECT_GE(value, previous - 1e-15);
        EXPECT_LE(value, 1.0);
        previous = value;
      }
    }
  }
}

TEST(Lambda2Gv, SmallestCodebookUsesOrthogonalPairs) {
  const auto spectrum = weight_spectrum(2, SpectrumMode::exact);
  const DecodingRule rule = MseOnly{mse_threshold(2, 0.1)};
  EXPECT_EQ(lambda2_gv(spectrum, 2, 1.0, rule, RayleighFading{}, kSpec),
            lambda2_of_d(2, 1.0, 0, rule, RayleighFading{}, kSpec));
}

TEST(Lambda2Gv, NondecreasingInM) {
  const auto spectrum = weight_spectrum(12, SpectrumMode::exact);
  const DecodingRule rule = MseOnly{mse_threshold(12, 0.01)};
  double previous = 0.0;
  for (std::uint64_t M : {2U, 5U, 50U, 500U, 50000U}) {
    const double value = lambda2_gv(spectrum, M, 1.0, rule, RayleighFading{}, kSpec);
    EXPECT_GE(value, previous);
    previous = value;
  }
}

TEST(Lambda2Gv, ComposesWithBruteForceLevel) {
  constexpr int n = 8;
  constexpr std::uint64_t M = 16;
  std::map<std::int64_t, std::uint64_t> counts;
  const auto reference = nth_sequence(n, 0);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << (2 * n)); ++i) ++counts[pair_level_d(reference, nth_sequence(n, i))];
  std::int64_t level = -1;
  for (std::int64_t d = 0; d <= n * n && level < 0; ++d) {
    std::uint64_t above = 0;
    for (const auto& [l, c] : counts)
      if (l > d) above += c;
    if (static_cast<double>(above) < 65536.0 / (M - 1)) level = d;
  }
  const DecodingRule rule = MseOnly{mse_threshold(n, 0.01)};
  EXPECT_EQ(lambda2_gv(weight_spectrum(n, SpectrumMode::exact), M, 1.0, rule, RayleighFading{}, kSpec),
            lambda2_of_d(n, 1.0, level, rule, RayleighFading{}, kSpec));
}

TEST(Lambda2Gv, FlatAcrossUserCountsAtN64) {
  const auto spectrum = weight_spectrum(64, SpectrumMode::log_domain);
  const DecodingRule rule = MseOnly{mse_threshold(64, 0.01)};
  const double few = lambda2_gv(spectrum, 10, 1.0, rule, RayleighFading{}, kSpec);
  const double many = lambda2_gv(spectrum, 1000, 1.0, rule, RayleighFading{}, kSpec);
  EXPECT_LE(few, many);
  EXPECT_LT(many / few, 2.0);
}

TEST(Lambda2Approx, ConstantStubIsReturned) {
  for (int n : {1, 5, 16, 40}) {
    const auto spectrum = weight_spectrum(n, n <= 16 ? SpectrumMode::exact : SpectrumMode::log_domain);
    EXPECT_NEAR(lambda2_approx(spectrum, [](std::int64_t) { return 0.375; }), 0.375, 1e-12);
    EXPECT_NEAR(lambda2_approx(spectrum, [](std::int64_t) { return 0.375; }, 3), 0.375, 1e-12);
  }
}

TEST(Lambda2Approx, MatchesExhaustiveAverage) {
  RandomStream stream(12, 0);
  for (int n = 2; n <= 8; ++n) {
    const DecodingRule rule = MseOnly{mse_threshold(n, 0.01)};
    std::map<std::int64_t, double> memo;
    auto lambda2 = [&](std::int64_t d) {
      auto it = memo.find(d);
      if (it == memo.end()) it = memo.emplace(d, lambda2_of_d(n, 1.0, d, rule, RayleighFading{}, kSpec)).first;
      return it->second;
    };
    const std::uint64_t total = std::uint64_t{1} << (2 * n);
    const auto reference = nth_sequence(n, stream.uniform_index(total));
    double sum = 0.0;
    for (std::uint64_t i = 0; i < total; ++i) sum += lambda2(pair_level_d(reference, nth_sequence(n, i)));
    const auto spectrum = weight_spectrum(n, SpectrumMode::exact);
    EXPECT_NEAR(lambda2_approx(spectrum, 1.0, rule, RayleighFading{}, kSpec), sum / static_cast<double>(total), 1e-9)
        << n;
  }
}

TEST(Lambda2Approx, WorkerCountDoesNotChangeTheSum) {
  const auto spectrum = weight_spectrum(24, SpectrumMode::log_domain);
  const DecodingRule rule = MseOnly{mse_threshold(24, 0.01)};
  EXPECT_EQ(lambda2_approx(spectrum, 1.0, rule, RayleighFading{}, kSpec, 1),
            lambda2_approx(spectrum, 1.0, rule, RayleighFading{}, kSpec, 3));
}

TEST(PatBound, DegenerateBlerModels) {
  const int n = 32;
  const double lambda1 = 0.01;
  const DecodingRule mse = MseOnly{mse_threshold(n, lambda1)};
  const DecodingRule two = TwoLook{mse_threshold(n, lambda1 / 2), 0.3};
  EXPECT_EQ(pat_p1_bound(n, 1.0, mse, RayleighFading{}, ConstantBler{1.0}, kSpec), 0.0);
  EXPECT_EQ(pat_p1_bound(n, 1.0, two, RayleighFading{}, ConstantBler{1.0}, kSpec), 0.0);
  EXPECT_NEAR(pat_p1_bound(n, 1.0, mse, RayleighFading{}, ConstantBler{0.0}, kSpec), lambda1, 1e-12);
  EXPECT_NEAR(pat_p1_bound(n, 1.0, mse, RayleighFading{}, ConstantBler{0.4}, kSpec), 0.6 * lambda1, 1e-12);
}

TEST(PatBound, CalibratedTwoLookStaysWithinLambda1) {
  const int n = 64;
  const std::vector<std::pair<double, BlerModel>> cases{{0.1, NormalApproximation{128, 64}}, {0.01, StepBler{0.0}}};
  for (const auto& [lambda1, bler] : cases) {
    {
      const auto calibration = calibrate_two_look(n, 1.0, lambda1, RayleighFading{}, bler, kSpec);
      const double p1 = pat_p1_bound(n, 1.0, calibration.rule, RayleighFading{}, bler, kSpec);
      EXPECT_LE(p1, calibration.p1_bound + 1e-12);
      EXPECT_LE(p1, lambda1);
      EXPECT_GT(p1, 0.0);
    }
  }
}

TEST(PatP2, ReducesToTheMseRuleAndVanishesForLargeThreshold) {
  const int n = 32;
  const double T = mse_threshold(n, 0.01);
  for (std::int64_t d : {0, 100, 512, 1024}) {
    EXPECT_NEAR(pat_p2(n, 1.0, d, TwoLook{T, 0.0}, RayleighFading{}, kSpec),
                lambda2_of_d(n, 1.0, d, MseOnly{T}, RayleighFading{}, kSpec), 1e-14);
    EXPECT_LT(pat_p2(n, 1.0, d, TwoLook{T, 1e3}, RayleighFading{}, kSpec), 1e-300);
    EXPECT_EQ(pat_p2(n, 1.0, d, TwoLook{T, 0.4}, RayleighFading{}, kSpec),
              lambda2_of_d(n, 1.0, d, TwoLook{T, 0.4}, RayleighFading{}, kSpec));
  }
  const auto spectrum = weight_spectrum(n, SpectrumMode::log_domain);
  EXPECT_EQ(pat_p2(spectrum, 1.0, TwoLook{T, 0.4}, RayleighFading{}, kSpec),
            lambda2_approx(spectrum, 1.0, TwoLook{T, 0.4}, RayleighFading{}, kSpec));
}

TEST(Report, RowsAndCsv) {
  const int n = 4;
  const auto spectrum = weight_spectrum(n, SpectrumMode::exact);
  const MseOnly mse{mse_threshold(n, 0.1)};
  const auto plain = error_bound_report(spectrum, 8, 1.0, mse, std::nullopt, RayleighFading{}, kSpec);
  EXPECT_EQ(plain.n, n);
  EXPECT_EQ(plain.d_min_used, d_min(spectrum, 8));
  EXPECT_EQ(plain.rows.size(), spectrum.support().size());
  EXPECT_EQ(plain.lambda2_gv, lambda2_gv(spectrum, 8, 1.0, mse, RayleighFading{}, kSpec));
  EXPECT_EQ(plain.lambda2_approx, lambda2_approx(spectrum, 1.0, mse, RayleighFading{}, kSpec));
  EXPECT_FALSE(plain.lambda2_gv_twolook.has_value());
  double mass = 0.0;
  for (const auto& row : plain.rows) {
    EXPECT_FALSE(row.lambda2_twolook.has_value());
    EXPECT_GE(row.lambda2_mse, 0.0);
    EXPECT_LE(row.lambda2_mse, 1.0);
    mass += row.p_d;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);

  std::ostringstream csv;
  write_report_csv(csv, plain);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "d,P_d,lambda2_mse,lambda2_twolook");
  std::getline(lines, line);
  EXPECT_EQ(line.back(), ',');

  const auto both = error_bound_report(spectrum, 8, 1.0, mse, TwoLook{mse.T, 0.5}, RayleighFading{}, kSpec);
  ASSERT_TRUE(both.lambda2_approx_twolook.has_value());
  EXPECT_LE(*both.lambda2_approx_twolook, both.lambda2_approx);
  for (const auto& row : both.rows) {
    ASSERT_TRUE(row.lambda2_twolook.has_value());
    EXPECT_LE(*row.lambda2_twolook, row.lambda2_mse);
  }
  EXPECT_NE(both.assumptions.find("rayleigh"), std::string::npos);
}

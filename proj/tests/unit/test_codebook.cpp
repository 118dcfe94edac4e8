#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "blindid/codebook.hpp"
#include "blindid/random.hpp"
#include "blindid/spectrum.hpp"
#include "support.hpp"

using namespace blindid;

namespace {

QpskCodeword word(const char* text) { return QpskCodeword::from_string(text); }

QpskCodeword nth_sequence(int n, std::uint64_t index) {
  std::vector<std::uint8_t> symbols(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    symbols[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index & 3U);
    index >>= 2;
  }
  return QpskCodeword(symbols);
}

std::map<std::int64_t, std::uint64_t> brute_force_spectrum(int n) {
  const QpskCodeword reference(std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
  std::map<std::int64_t, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << (2 * n)); ++i) ++counts[pair_level_d(reference, nth_sequence(n, i))];
  return counts;
}

}  // namespace

TEST(PairLevel, Examples) {
  const auto c = word("0123301");
  EXPECT_EQ(pair_level_d(c, c), 49);
  for (int shift = 1; shift < 4; ++shift) {
    std::vector<std::uint8_t> rotated;
    for (auto s : c.symbols()) rotated.push_back(static_cast<std::uint8_t>((s + shift) % 4));
    EXPECT_EQ(pair_level_d(c, QpskCodeword(rotated)), 49);
  }
  EXPECT_EQ(pair_level_d(word("00"), word("02")), 0);
  EXPECT_THROW(pair_level_d(word("00"), word("000")), std::invalid_argument);
}

TEST(PairLevel, EqualsNormalizedInnerProductAndIsSymmetric) {
  RandomStream stream(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = nth_sequence(12, stream.uniform_index(1U << 24));
    const auto b = nth_sequence(12, stream.uniform_index(1U << 24));
    const double P = 2.5;
    const double direct = std::norm(modulate(a, P).dot(modulate(b, P))) / (P * P);
    EXPECT_NEAR(static_cast<double>(pair_level_d(a, b)), direct, 1e-9);
    EXPECT_EQ(pair_level_d(a, b), pair_level_d(b, a));
  }
}

TEST(Modulate, SymbolsAndPower) {
  const auto x = modulate(word("0123"), 2.0);
  EXPECT_NEAR(x.squaredNorm(), 8.0, 1e-12);
  EXPECT_NEAR(std::arg(x(0)), std::numbers::pi / 4, 1e-12);
  EXPECT_NEAR(std::arg(x(1)), 3 * std::numbers::pi / 4, 1e-12);
  const auto xf = modulate<float>(word("0123"), 2.0f);
  EXPECT_NEAR(xf.squaredNorm(), 8.0f, 1e-5f);
}

TEST(WeightSpectrum, SmallLengths) {
  const auto one = weight_spectrum(1, SpectrumMode::exact);
  EXPECT_EQ(one.count(1), 4U);
  EXPECT_EQ(one.count(0), 0U);
  EXPECT_EQ(one.support(), (std::vector<std::int64_t>{1}));

  const auto two = weight_spectrum(2, SpectrumMode::exact);
  EXPECT_EQ(two.count(0), 4U);
  EXPECT_EQ(two.count(2), 8U);
  EXPECT_EQ(two.count(4), 4U);
  EXPECT_EQ(two.cumulative(0), 16U);
  EXPECT_EQ(two.cumulative(2), 12U);
  EXPECT_EQ(two.cumulative(3), 4U);
}

TEST(WeightSpectrum, ExactMatchesExhaustiveEnumeration) {
  for (int n = 1; n <= 8; ++n) {
    const auto spectrum = weight_spectrum(n, SpectrumMode::exact);
    const auto oracle = brute_force_spectrum(n);
    for (std::int64_t d = 0; d <= spectrum.max_level(); ++d) {
      const auto it = oracle.find(d);
      EXPECT_EQ(spectrum.count(d), it == oracle.end() ? 0U : it->second) << "n=" << n << " d=" << d;
    }
  }
}

TEST(WeightSpectrum, InvariantsAndLogModeAgreement) {
  for (int n : {3, 9, 16}) {
    const auto exact = weight_spectrum(n, SpectrumMode::exact);
    const auto logd = weight_spectrum(n, SpectrumMode::log_domain, 3);
    EXPECT_EQ(exact.cumulative(0), std::uint64_t{1} << (2 * n));
    EXPECT_EQ(exact.cumulative(exact.max_level()), 4U);
    for (std::int64_t d = 0; d <= exact.max_level(); ++d) {
      EXPECT_LE(exact.cumulative(d + 1), exact.cumulative(d));
      if (exact.count(d) == 0) {
        EXPECT_EQ(logd.log_count(d), -std::numeric_limits<double>::infinity());
      } else {
        EXPECT_NEAR(std::exp(logd.log_count(d) - std::log(static_cast<double>(exact.count(d)))), 1.0, 1e-10);
      }
    }
  }
}

TEST(WeightSpectrum, TopLevelIsTheFourRotationsUpToN64) {
  for (int n : {1, 5, 17, 32, 48, 64}) {
    const auto spectrum = weight_spectrum(n, SpectrumMode::log_domain);
    EXPECT_NEAR(std::exp(spectrum.log_cumulative(spectrum.max_level())) / 4.0, 1.0, 1e-8) << n;
    EXPECT_NEAR(spectrum.log_cumulative(0) / (n * std::log(4.0)), 1.0, 1e-8) << n;
    double total = 0.0;
    for (auto d : spectrum.support()) total += spectrum.probability(d);
    EXPECT_NEAR(total, 1.0, 1e-8);
  }
}

TEST(WeightSpectrum, WorkerCountDoesNotChangeLogValues) {
  const auto a = weight_spectrum(40, SpectrumMode::log_domain, 1);
  const auto b = weight_spectrum(40, SpectrumMode::log_domain, 4);
  for (auto d : a.support()) EXPECT_EQ(a.log_count(d), b.log_count(d));
}

TEST(WeightSpectrum, RejectsExactBeyond16) {
  EXPECT_THROW(weight_spectrum(17, SpectrumMode::exact), std::invalid_argument);
  EXPECT_THROW(weight_spectrum(0, SpectrumMode::log_domain), std::invalid_argument);
}

TEST(DMin, Examples) {
  EXPECT_EQ(d_min(weight_spectrum(2, SpectrumMode::exact), 3), 2);
  EXPECT_EQ(d_min(weight_spectrum(3, SpectrumMode::exact), (1U << 6) + 1), 9);

  const auto spectrum = weight_spectrum(8, SpectrumMode::exact);
  const auto oracle = brute_force_spectrum(8);
  const double bound = 65536.0 / 63.0;
  std::int64_t expected = -1;
  for (std::int64_t d = 0; d <= 64 && expected < 0; ++d) {
    std::uint64_t above = 0;
    for (const auto& [level, count] : oracle)
      if (level >= d + 1) above += count;
    if (static_cast<double>(above) < bound) expected = d;
  }
  EXPECT_EQ(d_min(spectrum, 64), expected);
  EXPECT_EQ(d_min(weight_spectrum(8, SpectrumMode::log_domain), 64), expected);
}

TEST(DMin, NondecreasingInM) {
  const auto spectrum = weight_spectrum(12, SpectrumMode::exact);
  std::int64_t previous = 0;
  for (std::uint64_t M : {2U, 3U, 10U, 100U, 1000U, 100000U}) {
    const auto d = d_min(spectrum, M);
    EXPECT_GE(d, previous);
    previous = d;
  }
}

TEST(RandomCodebook, DeterministicDistinctAndSelfConsistent) {
  const CodeConfig config{4, 16, 1.0};
  const auto a = random_codebook(config, 77);
  const auto b = random_codebook(config, 77);
  EXPECT_EQ(a.codewords, b.codewords);
  EXPECT_NO_THROW(a.validate());
  for (const auto& c : a.codewords) EXPECT_EQ(pair_level_d(c, c), 16);
  EXPECT_THROW(random_codebook(CodeConfig{2, 17, 1.0}, 1), std::invalid_argument);
}

TEST(RandomCodebook, SymbolsAreUniform) {
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t total = 0;
  for (std::uint64_t seed = 0; seed < 63; ++seed) {
    for (const auto& c : random_codebook(CodeConfig{16, 1000, 1.0}, seed).codewords) {
      for (auto s : c.symbols()) ++counts[s];
      total += c.size();
    }
  }
  ASSERT_GE(total, 1'000'000U);
  for (auto c : counts) EXPECT_LT(oracle::binomial_sigmas(c, total, 0.25), 4.0);
}

TEST(GreedyGv, WeakestConstraint) {
  const auto result = greedy_gv_codebook(CodeConfig{6, 4, 1.0}, 35, 5);
  ASSERT_TRUE(result.complete());
  EXPECT_TRUE(check_pairwise(result.codebook, 35).passed);
}

TEST(GreedyGv, SucceedsAtTheGuaranteedLevel) {
  const auto d = d_min(weight_spectrum(8, SpectrumMode::exact), 16);
  const auto result = greedy_gv_codebook(CodeConfig{8, 16, 1.0}, d, 1);
  ASSERT_TRUE(result.complete());
  EXPECT_EQ(result.codebook.config.M, 16U);
  EXPECT_TRUE(check_pairwise(result.codebook, d).passed);
}

TEST(GreedyGv, ReportsExhaustedBudget) {
  // At most two mutually orthogonal vectors exist in C^2.
  const auto result = greedy_gv_codebook(CodeConfig{2, 4, 1.0}, 0, 9, 5000);
  EXPECT_FALSE(result.complete());
  EXPECT_EQ(result.codebook.codewords.size(), 2U);
  EXPECT_EQ(result.codebook.config.M, 2U);
  EXPECT_THROW(greedy_gv_codebook(CodeConfig{2, 4, 1.0}, 4, 9), std::invalid_argument);
}

TEST(CheckPairwise, RotationAndOrthogonality) {
  Codebook rotated{{3, 2, 1.0}, {word("012"), word("123")}};
  const auto check = check_pairwise(rotated, 8);
  EXPECT_FALSE(check.passed);
  EXPECT_EQ(check.max_level, 9);

  const std::vector<ComplexVector> pair{modulate(word("00"), 1.0), modulate(word("02"), 1.0)};
  EXPECT_TRUE(check_pairwise(pair, 0.5).passed);
  const std::vector<ComplexVector> same{modulate(word("01"), 1.0), modulate(word("12"), 1.0)};
  EXPECT_FALSE(check_pairwise(same, 0.01).passed);
}

TEST(CheckPairwise, MaxLevelMatchesDoubleLoop) {
  const auto book = random_codebook(CodeConfig{10, 40, 1.0}, 12);
  std::int64_t worst = 0;
  for (std::size_t i = 0; i < book.codewords.size(); ++i)
    for (std::size_t j = i + 1; j < book.codewords.size(); ++j)
      worst = std::max(worst, pair_level_d(book.codewords[i], book.codewords[j]));
  const auto check = check_pairwise(book, 100);
  EXPECT_EQ(check.max_level, worst);
  EXPECT_EQ(pair_level_d(book.codewords[check.first], book.codewords[check.second]), worst);
}

TEST(CodebookFile, RoundTrip) {
  const auto book = random_codebook(CodeConfig{5, 7, 0.5}, 4);
  std::stringstream buffer;
  write_codebook(buffer, book);
  const auto back = read_codebook(buffer);
  EXPECT_EQ(back.config.n, 5);
  EXPECT_EQ(back.config.M, 7U);
  EXPECT_EQ(back.config.P, 0.5);
  EXPECT_EQ(back.codewords, book.codewords);
}

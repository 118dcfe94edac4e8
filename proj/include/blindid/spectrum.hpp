#ifndef BLINDID_SPECTRUM_HPP
#define BLINDID_SPECTRUM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace blindid {

enum class SpectrumMode { exact, log_domain };

/// Pair-level distribution of QPSK sequences against a fixed reference.
///
/// A_d counts the 4^n sequences at level exactly d; N_d = sum_{d' >= d} A_d'.
/// Exact mode keeps integer counts (n <= 16, so 4^n fits in 64 bits); log
/// mode keeps natural logs and scales to any n.
class WeightSpectrum {
 public:
  static constexpr int kMaxExactLength = 16;

  int n() const { return n_; }
  SpectrumMode mode() const { return mode_; }
  std::int64_t max_level() const { return static_cast<std::int64_t>(n_) * n_; }

  /// Exact A_d / N_d. Throws in log mode.
  std::uint64_t count(std::int64_t d) const;
  std::uint64_t cumulative(std::int64_t d) const;

  /// ln A_d / ln N_d; -inf where the count is zero or d is out of range.
  double log_count(std::int64_t d) const;
  double log_cumulative(std::int64_t d) const;

  /// A_d / 4^n, the probability that a uniform sequence sits at level d.
  double probability(std::int64_t d) const;

  /// Levels with A_d > 0, ascending.
  const std::vector<std::int64_t>& support() const { return support_; }

 private:
  friend WeightSpectrum weight_spectrum(int n, SpectrumMode mode, int workers);

  int n_ = 0;
  SpectrumMode mode_ = SpectrumMode::exact;
  std::vector<std::uint64_t> exact_counts_;
  std::vector<std::uint64_t> exact_cumulative_;
  std::vector<double> log_counts_;
  std::vector<double> log_cumulative_;
  std::vector<std::int64_t> support_;
};

/// Sums n!/(m0! m1! m2! m3!) over compositions into level (m0-m2)^2 + (m1-m3)^2.
/// Exact mode rejects n > 16. Output does not depend on `workers`.
WeightSpectrum weight_spectrum(int n, SpectrumMode mode, int workers = 1);

/// Least d with N_{d+1} < 4^n / (M - 1).
std::int64_t d_min(const WeightSpectrum& spectrum, std::uint64_t M);

/// CSV: "d,A_d,N_d" (exact) or "d,log2_A_d,log2_N_d" (log), zero rows omitted.
void write_spectrum_csv(std::ostream& out, const WeightSpectrum& spectrum);

}  // namespace blindid

#endif  // BLINDID_SPECTRUM_HPP

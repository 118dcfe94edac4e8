#ifndef BLINDID_CODEBOOK_HPP
#define BLINDID_CODEBOOK_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindid/types.hpp"

namespace blindid {

/// Block length n, number of messages M and per-symbol power P (= SNR, unit noise).
struct CodeConfig {
  int n = 0;
  std::uint64_t M = 0;
  double P = 1.0;

  void validate() const;
};

/// Length-n sequence over {0,1,2,3}; symbol k stands for sqrt(P) e^{j(pi/4 + k pi/2)}.
class QpskCodeword {
 public:
  QpskCodeword() = default;
  explicit QpskCodeword(std::vector<std::uint8_t> symbols);

  /// Parses a string of '0'..'3' characters.
  static QpskCodeword from_string(std::string_view text);

  std::size_t size() const { return symbols_.size(); }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const std::uint8_t> symbols() const { return symbols_; }
  std::string to_string() const;

  friend bool operator==(const QpskCodeword&, const QpskCodeword&) = default;

 private:
  std::vector<std::uint8_t> symbols_;
};

/// Complex baseband vector of a codeword at power P; ||c||^2 = nP.
template <typename Scalar = double>
CVector<Scalar> modulate(const QpskCodeword& codeword, Scalar P) {
  const Scalar amplitude = std::sqrt(P);
  CVector<Scalar> out(static_cast<Eigen::Index>(codeword.size()));
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    const Scalar phase = std::numbers::pi_v<Scalar> * (Scalar(0.25) + Scalar(0.5) * codeword[i]);
    out(static_cast<Eigen::Index>(i)) = std::polar(amplitude, phase);
  }
  return out;
}

/// Differences (c_i - c'_i) mod 4 tallied as (m0, m1, m2, m3).
std::array<std::int64_t, 4> difference_counts(const QpskCodeword& c, const QpskCodeword& other);

/// |<c, c'>|^2 / P^2 = (m0 - m2)^2 + (m1 - m3)^2, an integer in [0, n^2].
std::int64_t pair_level_d(const QpskCodeword& c, const QpskCodeword& other);

struct Codebook {
  CodeConfig config;
  std::vector<QpskCodeword> codewords;

  /// Checks lengths, config.M == size and distinctness.
  void validate() const;
  std::vector<ComplexVector> modulated() const;
};

/// M distinct uniform codewords, deterministic in `seed`.
Codebook random_codebook(const CodeConfig& config, std::uint64_t seed);

struct GreedyResult {
  Codebook codebook;
  std::uint64_t requested = 0;
  std::uint64_t attempts = 0;

  bool complete() const { return codebook.codewords.size() == requested; }
};

/// Sequential construction: random candidates are accepted when their pair
/// level to every accepted codeword is at most `d_max`. Stops at M codewords or
/// after `attempt_budget` candidates (0 selects 1000 M); the caller checks
/// complete() for the exhausted case.
GreedyResult greedy_gv_codebook(const CodeConfig& config, std::int64_t d_max, std::uint64_t seed,
                                std::uint64_t attempt_budget = 0);

template <typename Level>
struct PairwiseCheck {
  bool passed = true;
  Level max_level{};
  std::size_t first = 0;
  std::size_t second = 0;
};

/// All pairs satisfy pair_level_d <= d_max. max_level is the largest level found.
PairwiseCheck<std::int64_t> check_pairwise(const Codebook& codebook, std::int64_t d_max);

/// Generic complex codebook: |<c_i, c_j>|^2 / (||c_i||^2 ||c_j||^2) <= 1 - rho for all
/// pairs. max_level is the largest normalized squared correlation.
PairwiseCheck<double> check_pairwise(std::span<const ComplexVector> codewords, double rho);

/// Text format: header "n M P", then one line of n symbols per codeword.
void write_codebook(std::ostream& out, const Codebook& codebook);
Codebook read_codebook(std::istream& in);

}  // namespace blindid

#endif  // BLINDID_CODEBOOK_HPP

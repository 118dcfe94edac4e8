#include "blindid/spectrum.hpp"
#include "blindid/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "blindid/parallel.hpp"

namespace blindid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::int64_t level_of(int m0, int m1, int m2, int m3) {
  const std::int64_t re = m0 - m2;
  const std::int64_t im = m1 - m3;
  return re * re + im * im;
}

struct Neumaier {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      compensation += (sum - t) + x;
    } else {
      compensation += (x - t) + sum;
    }
    sum = t;
  }
  void scale(double factor) {
    sum *= factor;
    compensation *= factor;
  }
  double value() const { return sum + compensation; }
};

// Compensated sum of exp(log terms) kept relative to a running maximum.
class LogAccumulator {
 public:
  void add(double log_value) {
    if (log_value == kNegInf) return;
    if (log_value > max_) {
      acc_.scale(max_ == kNegInf ? 0.0 : std::exp(max_ - log_value));
      max_ = log_value;
    }
    acc_.add(std::exp(log_value - max_));
  }

  double log_value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(acc_.value()); }

 private:
  double max_ = kNegInf;
  Neumaier acc_;
};

void check_level(std::int64_t d) {
  if (d < 0) throw std::out_of_range("weight spectrum: negative level");
}

}  // namespace

std::uint64_t WeightSpectrum::count(std::int64_t d) const {
  if (mode_ != SpectrumMode::exact) throw std::logic_error("weight spectrum: exact counts need exact mode");
  check_level(d);
  return d > max_level() ? 0 : exact_counts_[static_cast<std::size_t>(d)];
}

std::uint64_t WeightSpectrum::cumulative(std::int64_t d) const {
  if (mode_ != SpectrumMode::exact) throw std::logic_error("weight spectrum: exact counts need exact mode");
  check_level(d);
  return d > max_level() ? 0 : exact_cumulative_[static_cast<std::size_t>(d)];
}

double WeightSpectrum::log_count(std::int64_t d) const {
  check_level(d);
  return d > max_level() ? kNegInf : log_counts_[static_cast<std::size_t>(d)];
}

double WeightSpectrum::log_cumulative(std::int64_t d) const {
  check_level(d);
  return d > max_level() ? kNegInf : log_cumulative_[static_cast<std::size_t>(d)];
}

double WeightSpectrum::probability(std::int64_t d) const {
  if (mode_ == SpectrumMode::exact) {
    return std::ldexp(static_cast<double>(count(d)), -2 * n_);
  }
  return std::exp(log_count(d) - n_ * 2.0 * std::numbers::ln2);
}

WeightSpectrum weight_spectrum(int n, SpectrumMode mode, int workers) {
  if (n < 1) throw std::invalid_argument("weight_spectrum: n must be >= 1");
  if (mode == SpectrumMode::exact && n > WeightSpectrum::kMaxExactLength)
    throw std::invalid_argument("exact mode requires n <= 16");

  WeightSpectrum s;
  s.n_ = n;
  s.mode_ = mode;
  const std::size_t levels = static_cast<std::size_t>(n) * n + 1;

  if (mode == SpectrumMode::exact) {
    std::vector<std::vector<std::uint64_t>> binom(n + 1, std::vector<std::uint64_t>(n + 1, 0));
    for (int i = 0; i <= n; ++i) {
      binom[i][0] = 1;
      for (int j = 1; j <= i; ++j) binom[i][j] = binom[i - 1][j - 1] + (j < i ? binom[i - 1][j] : 0);
    }
    s.exact_counts_.assign(levels, 0);
    for (int m0 = 0; m0 <= n; ++m0)
      for (int m1 = 0; m0 + m1 <= n; ++m1)
        for (int m2 = 0; m0 + m1 + m2 <= n; ++m2) {
          const int m3 = n - m0 - m1 - m2;
          const std::uint64_t multinomial = binom[n][m0] * binom[n - m0][m1] * binom[n - m0 - m1][m2];
          s.exact_counts_[static_cast<std::size_t>(level_of(m0, m1, m2, m3))] += multinomial;
        }
    s.exact_cumulative_.assign(levels, 0);
    std::uint64_t running = 0;
    for (std::size_t d = levels; d-- > 0;) {
      running += s.exact_counts_[d];
      s.exact_cumulative_[d] = running;
    }
    s.log_counts_.resize(levels);
    s.log_cumulative_.resize(levels);
    for (std::size_t d = 0; d < levels; ++d) {
      s.log_counts_[d] = s.exact_counts_[d] ? std::log(static_cast<double>(s.exact_counts_[d])) : kNegInf;
      s.log_cumulative_[d] =
          s.exact_cumulative_[d] ? std::log(static_cast<double>(s.exact_cumulative_[d])) : kNegInf;
    }
  } else {
    std::vector<double> log_factorial(n + 1);
    for (int k = 0; k <= n; ++k) log_factorial[k] = std::lgamma(k + 1.0);
    auto log_term = [&](int m0, int m1, int m2, int m3) {
      return log_factorial[n] - log_factorial[m0] - log_factorial[m1] - log_factorial[m2] - log_factorial[m3];
    };
    auto for_block = [&](std::size_t begin, std::size_t end, auto&& visit) {
      for (int m0 = static_cast<int>(begin); m0 < static_cast<int>(end); ++m0)
        for (int m1 = 0; m0 + m1 <= n; ++m1)
          for (int m2 = 0; m0 + m1 + m2 <= n; ++m2) {
            const int m3 = n - m0 - m1 - m2;
            visit(static_cast<std::size_t>(level_of(m0, m1, m2, m3)), log_term(m0, m1, m2, m3));
          }
    };

    // Blocks of m0 are fixed so the reduction order never depends on workers.
    const std::size_t blocks = std::min<std::size_t>(16, static_cast<std::size_t>(n) + 1);
    std::vector<std::vector<double>> block_max(blocks, std::vector<double>(levels, kNegInf));
    parallel_blocks(static_cast<std::size_t>(n) + 1, blocks, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      auto& mx = block_max[b];
      for_block(begin, end, [&](std::size_t d, double t) { mx[d] = std::max(mx[d], t); });
    });
    std::vector<double> level_max(levels, kNegInf);
    for (const auto& mx : block_max)
      for (std::size_t d = 0; d < levels; ++d) level_max[d] = std::max(level_max[d], mx[d]);

    std::vector<std::vector<Neumaier>> block_sum(blocks, std::vector<Neumaier>(levels));
    parallel_blocks(static_cast<std::size_t>(n) + 1, blocks, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      auto& acc = block_sum[b];
      for_block(begin, end, [&](std::size_t d, double t) { acc[d].add(std::exp(t - level_max[d])); });
    });

    s.log_counts_.assign(levels, kNegInf);
    for (std::size_t d = 0; d < levels; ++d) {
      if (level_max[d] == kNegInf) continue;
      Neumaier total;
      for (const auto& acc : block_sum) {
        total.add(acc[d].sum);
        total.add(acc[d].compensation);
      }
      s.log_counts_[d] = level_max[d] + std::log(total.value());
    }
    s.log_cumulative_.assign(levels, kNegInf);
    LogAccumulator running;
    for (std::size_t d = levels; d-- > 0;) {
      running.add(s.log_counts_[d]);
      s.log_cumulative_[d] = running.log_value();
    }
  }

  for (std::size_t d = 0; d < levels; ++d)
    if (s.log_counts_[d] != kNegInf) s.support_.push_back(static_cast<std::int64_t>(d));
  return s;
}

std::int64_t d_min(const WeightSpectrum& spectrum, std::uint64_t M) {
  if (M < 2) throw std::invalid_argument("d_min: M must be >= 2");
  const std::int64_t top = spectrum.max_level();
  if (spectrum.mode() == SpectrumMode::exact) {
    __extension__ typedef unsigned __int128 u128;
    const u128 total = u128{1} << (2 * spectrum.n());
    for (std::int64_t d = 0; d <= top; ++d) {
      if (static_cast<u128>(spectrum.cumulative(d + 1)) * (M - 1) < total) return d;
    }
    return top;
  }
  const double log_bound = spectrum.n() * 2.0 * std::numbers::ln2 - std::log(static_cast<double>(M - 1));
  for (std::int64_t d = 0; d <= top; ++d) {
    if (spectrum.log_cumulative(d + 1) < log_bound) return d;
  }
  return top;
}

void write_spectrum_csv(std::ostream& out, const WeightSpectrum& spectrum) {
  if (spectrum.mode() == SpectrumMode::exact) {
    out << "d,A_d,N_d\n";
    for (auto d : spectrum.support()) out << d << ',' << spectrum.count(d) << ',' << spectrum.cumulative(d) << '\n';
    return;
  }
  out << "d,log2_A_d,log2_N_d\n";
  for (auto d : spectrum.support())
    out << d << ',' << format_double(spectrum.log_count(d) / std::numbers::ln2) << ','
        << format_double(spectrum.log_cumulative(d) / std::numbers::ln2) << '\n';
}

}  // namespace blindid

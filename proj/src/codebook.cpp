#include "blindid/codebook.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "blindid/random.hpp"

namespace blindid {

namespace {

// 4^n when it fits, saturating otherwise.
std::uint64_t sequence_count(int n) {
  return n >= 32 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << (2 * n));
}

class SymbolSource {
 public:
  explicit SymbolSource(std::uint64_t seed) : stream_(seed, 0) {}

  QpskCodeword draw(int n) {
    std::vector<std::uint8_t> symbols(static_cast<std::size_t>(n));
    for (auto& s : symbols) {
      if (bits_left_ == 0) {
        word_ = stream_.next_u32();
        bits_left_ = 32;
      }
      s = static_cast<std::uint8_t>(word_ & 3u);
      word_ >>= 2;
      bits_left_ -= 2;
    }
    return QpskCodeword(std::move(symbols));
  }

 private:
  RandomStream stream_;
  std::uint32_t word_ = 0;
  int bits_left_ = 0;
};

}  // namespace

void CodeConfig::validate() const {
  if (n < 2) throw std::invalid_argument("code config: n must be >= 2");
  if (M < 2) throw std::invalid_argument("code config: M must be >= 2");
  if (!(P > 0.0) || !std::isfinite(P)) throw std::invalid_argument("code config: P must be positive");
}

QpskCodeword::QpskCodeword(std::vector<std::uint8_t> symbols) : symbols_(std::move(symbols)) {
  for (auto s : symbols_)
    if (s > 3) throw std::invalid_argument("QPSK symbol out of range");
}

QpskCodeword QpskCodeword::from_string(std::string_view text) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(text.size());
  for (char ch : text) {
    if (ch < '0' || ch > '3') throw std::invalid_argument("QPSK codeword: expected characters 0-3");
    symbols.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return QpskCodeword(std::move(symbols));
}

std::string QpskCodeword::to_string() const {
  std::string out(symbols_.size(), '0');
  for (std::size_t i = 0; i < symbols_.size(); ++i) out[i] = static_cast<char>('0' + symbols_[i]);
  return out;
}

std::array<std::int64_t, 4> difference_counts(const QpskCodeword& c, const QpskCodeword& other) {
  if (c.size() != other.size()) throw std::invalid_argument("pair_level_d: length mismatch");
  std::array<std::int64_t, 4> m{};
  const auto a = c.symbols();
  const auto b = other.symbols();
  for (std::size_t i = 0; i < a.size(); ++i) ++m[(a[i] - b[i]) & 3];
  return m;
}

std::int64_t pair_level_d(const QpskCodeword& c, const QpskCodeword& other) {
  const auto m = difference_counts(c, other);
  const std::int64_t re = m[0] - m[2];
  const std::int64_t im = m[1] - m[3];
  return re * re + im * im;
}

void Codebook::validate() const {
  config.validate();
  if (codewords.size() != config.M) throw std::invalid_argument("codebook: M does not match codeword count");
  std::unordered_set<std::string> seen;
  for (const auto& c : codewords) {
    if (c.size() != static_cast<std::size_t>(config.n)) throw std::invalid_argument("codebook: wrong codeword length");
    if (!seen.insert(c.to_string()).second) throw std::invalid_argument("codebook: duplicate codeword");
  }
}

std::vector<ComplexVector> Codebook::modulated() const {
  std::vector<ComplexVector> out;
  out.reserve(codewords.size());
  for (const auto& c : codewords) out.push_back(modulate(c, config.P));
  return out;
}

Codebook random_codebook(const CodeConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.M > sequence_count(config.n)) throw std::invalid_argument("random_codebook: M exceeds 4^n");

  SymbolSource source(seed);
  Codebook book{config, {}};
  book.codewords.reserve(config.M);
  std::unordered_set<std::string> seen;
  const std::uint64_t max_rejections = 1000 * config.M + 1000;
  std::uint64_t rejections = 0;
  while (book.codewords.size() < config.M) {
    auto candidate = source.draw(config.n);
    if (seen.insert(candidate.to_string()).second) {
      book.codewords.push_back(std::move(candidate));
    } else if (++rejections > max_rejections) {
      throw std::runtime_error("random_codebook: too many duplicate draws");
    }
  }
  return book;
}

GreedyResult greedy_gv_codebook(const CodeConfig& config, std::int64_t d_max, std::uint64_t seed,
                                std::uint64_t attempt_budget) {
  config.validate();
  const std::int64_t n2 = static_cast<std::int64_t>(config.n) * config.n;
  if (d_max < 0 || d_max >= n2) throw std::invalid_argument("greedy_gv_codebook: d_max must lie in [0, n^2)");
  if (attempt_budget == 0) attempt_budget = 1000 * config.M;

  SymbolSource source(seed);
  GreedyResult result{{config, {}}, config.M, 0};
  auto& accepted = result.codebook.codewords;
  while (accepted.size() < config.M && result.attempts < attempt_budget) {
    ++result.attempts;
    auto candidate = source.draw(config.n);
    bool fits = true;
    for (const auto& c : accepted) {
      if (pair_level_d(candidate, c) > d_max) {
        fits = false;
        break;
      }
    }
    if (fits) accepted.push_back(std::move(candidate));
  }
  result.codebook.config.M = accepted.size();
  return result;
}

PairwiseCheck<std::int64_t> check_pairwise(const Codebook& codebook, std::int64_t d_max) {
  const auto& words = codebook.codewords;
  if (words.size() < 2) throw std::invalid_argument("check_pairwise: need at least two codewords");
  PairwiseCheck<std::int64_t> out{true, -1, 0, 0};
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const auto level = pair_level_d(words[i], words[j]);
      if (level > out.max_level) out = {true, level, i, j};
    }
  }
  out.passed = out.max_level <= d_max;
  return out;
}

PairwiseCheck<double> check_pairwise(std::span<const ComplexVector> codewords, double rho) {
  if (codewords.size() < 2) throw std::invalid_argument("check_pairwise: need at least two codewords");
  PairwiseCheck<double> out{true, -1.0, 0, 0};
  for (std::size_t i = 0; i < codewords.size(); ++i) {
    for (std::size_t j = i + 1; j < codewords.size(); ++j) {
      if (codewords[i].size() != codewords[j].size()) throw std::invalid_argument("check_pairwise: length mismatch");
      const double inner = std::norm(codewords[j].dot(codewords[i]));
      const double level = inner / (codewords[i].squaredNorm() * codewords[j].squaredNorm());
      if (level > out.max_level) out = {true, level, i, j};
    }
  }
  out.passed = out.max_level <= 1.0 - rho;
  return out;
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
  std::ostringstream p;
  p.precision(17);
  p << codebook.config.P;
  out << codebook.config.n << ' ' << codebook.codewords.size() << ' ' << p.str() << '\n';
  for (const auto& c : codebook.codewords) out << c.to_string() << '\n';
}

Codebook read_codebook(std::istream& in) {
  Codebook book;
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("codebook file: missing header");
  std::istringstream fields(header);
  if (!(fields >> book.config.n >> book.config.M >> book.config.P))
    throw std::runtime_error("codebook file: header must be \"n M P\"");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    book.codewords.push_back(QpskCodeword::from_string(line));
  }
  book.validate();
  return book;
}

}  // namespace blindid

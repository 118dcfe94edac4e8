#ifndef BLINDID_CHANNEL_HPP
#define BLINDID_CHANNEL_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "blindid/numerics.hpp"
#include "blindid/random.hpp"
#include "blindid/types.hpp"

namespace blindid {

/// h ~ CN(0, 1), so |h| is Rayleigh with E|h|^2 = 1.
struct RayleighFading {};
struct FixedCoefficient {
  Complex h;
};
struct FixedMagnitudeUniformPhase {
  double magnitude = 1.0;
};
/// Rayleigh conditioned on lower <= |h|^2 <= upper.
struct TruncatedRayleigh {
  double lower = 0.0;
  double upper = 1.0;
};

using FadingModel = std::variant<RayleighFading, FixedCoefficient, FixedMagnitudeUniformPhase, TruncatedRayleigh>;

void validate(const FadingModel& model);

/// "rayleigh", "fixed:<re>,<im>", "magnitude:<x>", "truncated:<lo>,<hi>".
std::string to_string(const FadingModel& model);
FadingModel parse_fading(std::string_view text);

Complex sample_fading(const FadingModel& model, RandomStream& stream);

/// P(|h| <= x).
double magnitude_cdf(const FadingModel& model, double x);

/// Integral of f(|h|) over the |h| law restricted to [lo, hi].
///
/// Point-mass models evaluate f at |h| when it lies in the closed range.
/// Continuous models use the Gauss-Legendre rule of `spec`.
double magnitude_expectation(const FadingModel& model, const std::function<double(double)>& f,
                             const QuadratureSpec& spec, double lo = 0.0,
                             double hi = std::numeric_limits<double>::infinity());

/// Noise for one block. Gaussian in normal operation; the zero and fixed
/// variants exist so tests can pin y exactly.
class NoiseSource {
 public:
  static NoiseSource gaussian(RandomStream& stream) { return NoiseSource(&stream, std::nullopt); }
  static NoiseSource zeros() { return NoiseSource(nullptr, std::nullopt); }
  static NoiseSource fixed(ComplexVector values) { return NoiseSource(nullptr, std::move(values)); }

  template <typename Derived>
  void add_to(Eigen::MatrixBase<Derived>& y) const {
    if (stream_ != nullptr) {
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += stream_->complex_gaussian();
    } else if (fixed_) {
      if (fixed_->size() != y.size()) throw std::invalid_argument("fixed noise: length mismatch");
      y += fixed_->template cast<typename Derived::Scalar>();
    }
  }

 private:
  NoiseSource(RandomStream* stream, std::optional<ComplexVector> fixed)
      : stream_(stream), fixed_(std::move(fixed)) {}

  RandomStream* stream_;
  std::optional<ComplexVector> fixed_;
};

struct ReceivedBlock {
  ComplexVector y;
  /// Instrumentation only; decoding never reads it.
  Complex true_h;
};

/// y = h x + N. Rejects x with ||x||^2 != nP (relative 1e-9).
template <typename Derived>
ReceivedBlock transmit(const Eigen::MatrixBase<Derived>& x, Complex h, double P, const NoiseSource& noise) {
  const double expected = static_cast<double>(x.size()) * P;
  if (std::abs(x.squaredNorm() - expected) > 1e-9 * expected)
    throw std::invalid_argument("transmit: codeword violates the power constraint");
  ReceivedBlock block{h * x.template cast<Complex>(), h};
  noise.add_to(block.y);
  return block;
}

}  // namespace blindid

#endif  // BLINDID_CHANNEL_HPP

#include "blindid/channel.hpp"
#include "blindid/format.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace blindid {

namespace {

double parse_number(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("fading: invalid number '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("fading: invalid number '" + s + "'");
  return value;
}

std::pair<double, double> parse_pair(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw std::invalid_argument("fading: expected two comma-separated values");
  return {parse_number(text.substr(0, comma)), parse_number(text.substr(comma + 1))};
}

// Normalizer of the truncated law, P(lower <= |h|^2 <= upper) under Rayleigh.
double truncated_mass(const TruncatedRayleigh& t) { return std::exp(-t.lower) - std::exp(-t.upper); }

}  // namespace

void validate(const FadingModel& model) {
  std::visit(overloaded{
                 [](const RayleighFading&) {},
                 [](const FixedCoefficient& f) {
                   if (!std::isfinite(f.h.real()) || !std::isfinite(f.h.imag()))
                     throw std::invalid_argument("fading: fixed coefficient must be finite");
                 },
                 [](const FixedMagnitudeUniformPhase& f) {
                   if (!(f.magnitude >= 0.0) || !std::isfinite(f.magnitude))
                     throw std::invalid_argument("fading: magnitude must be finite and nonnegative");
                 },
                 [](const TruncatedRayleigh& t) {
                   if (!(t.lower > 0.0) || !(t.upper > t.lower) || !std::isfinite(t.upper))
                     throw std::invalid_argument("fading: truncation requires 0 < lower < upper");
                 },
             },
             model);
}

std::string to_string(const FadingModel& model) {
  return std::visit(overloaded{
                        [](const RayleighFading&) -> std::string { return "rayleigh"; },
                        [](const FixedCoefficient& f) -> std::string {
                          return "fixed:" + format_double(f.h.real()) + "," + format_double(f.h.imag());
                        },
                        [](const FixedMagnitudeUniformPhase& f) -> std::string {
                          return "magnitude:" + format_double(f.magnitude);
                        },
                        [](const TruncatedRayleigh& t) -> std::string {
                          return "truncated:" + format_double(t.lower) + "," + format_double(t.upper);
                        },
                    },
                    model);
}

FadingModel parse_fading(std::string_view text) {
  FadingModel model;
  if (text == "rayleigh") {
    model = RayleighFading{};
  } else if (text.starts_with("fixed:")) {
    const auto [re, im] = parse_pair(text.substr(6));
    model = FixedCoefficient{{re, im}};
  } else if (text.starts_with("magnitude:")) {
    model = FixedMagnitudeUniformPhase{parse_number(text.substr(10))};
  } else if (text.starts_with("truncated:")) {
    const auto [lo, hi] = parse_pair(text.substr(10));
    model = TruncatedRayleigh{lo, hi};
  } else {
    throw std::invalid_argument("fading: unknown model '" + std::string(text) + "'");
  }
  validate(model);
  return model;
}

Complex sample_fading(const FadingModel& model, RandomStream& stream) {
  return std::visit(overloaded{
                        [&](const RayleighFading&) { return stream.complex_gaussian(); },
                        [&](const FixedCoefficient& f) { return f.h; },
                        [&](const FixedMagnitudeUniformPhase& f) {
                          return std::polar(f.magnitude, 2.0 * std::numbers::pi * stream.uniform());
                        },
                        [&](const TruncatedRayleigh& t) {
                          for (int attempt = 0; attempt < 100'000'000; ++attempt) {
                            const Complex h = stream.complex_gaussian();
                            const double energy = std::norm(h);
                            if (energy >= t.lower && energy <= t.upper) return h;
                          }
                          throw std::runtime_error("sample_fading: truncation window too narrow for rejection");
                        },
                    },
                    model);
}

double magnitude_cdf(const FadingModel& model, double x) {
  return std::visit(overloaded{
                        [&](const RayleighFading&) { return rayleigh_cdf(x); },
                        [&](const FixedCoefficient& f) { return x >= std::abs(f.h) ? 1.0 : 0.0; },
                        [&](const FixedMagnitudeUniformPhase& f) { return x >= f.magnitude ? 1.0 : 0.0; },
                        [&](const TruncatedRayleigh& t) {
                          const double e = std::clamp(x * x, t.lower, t.upper);
                          return (std::exp(-t.lower) - std::exp(-e)) / truncated_mass(t);
                        },
                    },
                    model);
}

double magnitude_expectation(const FadingModel& model, const std::function<double(double)>& f,
                             const QuadratureSpec& spec, double lo, double hi) {
  validate(spec);
  auto point_mass = [&](double x) {
    if (x < lo || x > hi) return 0.0;
    const double v = f(x);
    if (!std::isfinite(v)) throw std::domain_error("magnitude_expectation: non-finite integrand value");
    return v;
  };
  return std::visit(overloaded{
                        [&](const RayleighFading&) { return rayleigh_integral(f, lo, hi, spec); },
                        [&](const FixedCoefficient& c) { return point_mass(std::abs(c.h)); },
                        [&](const FixedMagnitudeUniformPhase& c) { return point_mass(c.magnitude); },
                        [&](const TruncatedRayleigh& t) {
                          const double a = std::max(lo, std::sqrt(t.lower));
                          const double b = std::min(hi, std::sqrt(t.upper));
                          const double z = truncated_mass(t);
                          return integrate([&](double x) { return f(x) * rayleigh_pdf(x) / z; }, a, b,
                                           spec.node_count);
                        },
                    },
                    model);
}

}  // namespace blindid

#include "blindid/bler.hpp"
#include "blindid/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "blindid/numerics.hpp"
#include "blindid/types.hpp"

namespace blindid {

namespace {

double parse_double(std::string_view text, const char* what) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bler: invalid ") + what + " '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument(std::string("bler: invalid ") + what + " '" + s + "'");
  return v;
}

double table_eval(const BlerTable& t, double snr_linear) {
  if (snr_linear <= 0.0) return t.bler.front();
  const double db = 10.0 * std::log10(snr_linear);
  if (db <= t.snr_db.front()) return t.bler.front();
  if (db >= t.snr_db.back()) return t.bler.back();
  const auto upper = std::upper_bound(t.snr_db.begin(), t.snr_db.end(), db);
  const auto i = static_cast<std::size_t>(upper - t.snr_db.begin()) - 1;
  if (db == t.snr_db[i]) return t.bler[i];
  const double frac = (db - t.snr_db[i]) / (t.snr_db[i + 1] - t.snr_db[i]);
  const double a = t.bler[i];
  const double b = t.bler[i + 1];
  if (a == 0.0 || b == 0.0) return (1.0 - frac) * a + frac * b;
  return std::exp((1.0 - frac) * std::log(a) + frac * std::log(b));
}

double normal_approximation_eval(const NormalApproximation& m, double snr) {
  if (snr <= 0.0) return 1.0;
  const double n = m.N;
  const double capacity = std::log2(1.0 + snr);
  const double inv = 1.0 / (1.0 + snr);
  const double dispersion = (1.0 - inv * inv) * std::numbers::log2e * std::numbers::log2e;
  if (!(dispersion > 0.0)) return 1.0;
  const double arg = (n * capacity - m.K + 0.5 * std::log2(n)) / std::sqrt(n * dispersion);
  return std::clamp(normal_sf(arg), 0.0, 1.0);
}

}  // namespace

void validate(const BlerModel& model) {
  std::visit(overloaded{
                 [](const BlerTable& t) {
                   if (t.snr_db.empty()) throw std::invalid_argument("bler table: empty table");
                   if (t.snr_db.size() != t.bler.size()) throw std::invalid_argument("bler table: column size mismatch");
                   for (std::size_t i = 0; i < t.bler.size(); ++i) {
                     if (!(t.bler[i] >= 0.0 && t.bler[i] <= 1.0))
                       throw std::invalid_argument("bler table: values must lie in [0, 1]");
                     if (i > 0 && !(t.snr_db[i] > t.snr_db[i - 1]))
                       throw std::invalid_argument("bler table: snr_db must be strictly increasing");
                     if (i > 0 && t.bler[i] > t.bler[i - 1])
                       throw std::invalid_argument("bler table: bler must be nonincreasing in snr");
                   }
                 },
                 [](const NormalApproximation& m) {
                   if (m.K < 1 || m.N < m.K) throw std::invalid_argument("bler: normal approximation needs N >= K >= 1");
                 },
                 [](const ConstantBler& c) {
                   if (!(c.value >= 0.0 && c.value <= 1.0)) throw std::invalid_argument("bler: constant must lie in [0, 1]");
                 },
                 [](const StepBler& s) {
                   if (!std::isfinite(s.threshold_snr_db)) throw std::invalid_argument("bler: step threshold must be finite");
                 },
             },
             model);
}

double bler_eval(const BlerModel& model, double snr_linear) {
  if (!(snr_linear >= 0.0)) throw std::domain_error("bler_eval: snr must be nonnegative");
  return std::visit(overloaded{
                        [&](const BlerTable& t) {
                          if (t.snr_db.empty()) throw std::invalid_argument("bler table: empty table");
                          return table_eval(t, snr_linear);
                        },
                        [&](const NormalApproximation& m) { return normal_approximation_eval(m, snr_linear); },
                        [&](const ConstantBler& c) { return c.value; },
                        [&](const StepBler& s) {
                          if (snr_linear <= 0.0) return 1.0;
                          return 10.0 * std::log10(snr_linear) >= s.threshold_snr_db ? 0.0 : 1.0;
                        },
                    },
                    model);
}

BlerTable read_bler_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("bler table: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "snr_db,bler") throw std::invalid_argument("bler table: header must be \"snr_db,bler\"");
  BlerTable table;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bler table: expected two columns");
    table.snr_db.push_back(parse_double(std::string_view(line).substr(0, comma), "snr_db"));
    table.bler.push_back(parse_double(std::string_view(line).substr(comma + 1), "bler"));
  }
  validate(BlerModel{table});
  return table;
}

BlerModel parse_bler(std::string_view text) {
  BlerModel model;
  if (text.starts_with("normal:")) {
    const auto rest = text.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("bler: expected normal:N,K");
    model = NormalApproximation{static_cast<int>(parse_double(rest.substr(0, comma), "N")),
                                static_cast<int>(parse_double(rest.substr(comma + 1), "K"))};
  } else if (text.starts_with("constant:")) {
    model = ConstantBler{parse_double(text.substr(9), "constant")};
  } else if (text.starts_with("step:")) {
    model = StepBler{parse_double(text.substr(5), "step threshold")};
  } else if (text.starts_with("table:")) {
    const std::string path(text.substr(6));
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("bler: cannot open table '" + path + "'");
    model = read_bler_table(file);
  } else {
    throw std::invalid_argument("bler: unknown model '" + std::string(text) + "'");
  }
  validate(model);
  return model;
}

std::string to_string(const BlerModel& model) {
  return std::visit(overloaded{
                        [&](const BlerTable& t) {
                          return "table(" + std::to_string(t.snr_db.size()) + " points)";
                        },
                        [&](const NormalApproximation& m) {
                          return "normal:" + std::to_string(m.N) + "," + std::to_string(m.K);
                        },
                        [&](const ConstantBler& c) {
                          return "constant:" + format_double(c.value);
                        },
                        [&](const StepBler& s) {
                          return "step:" + format_double(s.threshold_snr_db);
                        },
                    },
                    model);
}

}  // namespace blindid

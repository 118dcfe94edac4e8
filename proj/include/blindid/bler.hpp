#ifndef BLINDID_BLER_HPP
#define BLINDID_BLER_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace blindid {

/// Tabulated payload BLER curve, interpolated log-linearly in (dB, log bler)
/// and clamped outside the grid.
struct BlerTable {
  std::vector<double> snr_db;
  std::vector<double> bler;
};

/// Finite-blocklength normal approximation for an (N, K) code on AWGN.
struct NormalApproximation {
  int N = 128;
  int K = 64;
};

struct ConstantBler {
  double value = 0.0;
};

/// bler = 1 below the threshold, 0 at and above it.
struct StepBler {
  double threshold_snr_db = 0.0;
};

using BlerModel = std::variant<BlerTable, NormalApproximation, ConstantBler, StepBler>;

void validate(const BlerModel& model);

/// BLER at linear SNR (>= 0; 0 is read as the low-SNR limit).
double bler_eval(const BlerModel& model, double snr_linear);

/// CSV with header "snr_db,bler".
BlerTable read_bler_table(std::istream& in);

/// "normal:N,K", "constant:v", "step:dB", "table:PATH".
BlerModel parse_bler(std::string_view text);
std::string to_string(const BlerModel& model);

}  // namespace blindid

#endif  // BLINDID_BLER_HPP

#ifndef BLINDID_MONTECARLO_HPP
#define BLINDID_MONTECARLO_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blindid/channel.hpp"
#include "blindid/codebook.hpp"
#include "blindid/random.hpp"
#include "blindid/receiver.hpp"

namespace blindid {

/// Every non-target receiver is tested in every trial.
struct AllPairs {};
/// k non-targets per trial, drawn uniformly with replacement.
struct SampledPairs {
  int k = 16;
};
using PairSampling = std::variant<AllPairs, SampledPairs>;

struct ExperimentPlan {
  std::shared_ptr<const Codebook> codebook;
  DecodingRule rule = MseOnly{};
  FadingModel fading = RayleighFading{};
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  PairSampling pair_sampling = SampledPairs{};
  int workers = 1;
  /// Test hook: y = h c_i exactly.
  bool noiseless = false;
};

void validate(const ExperimentPlan& plan);

/// Rate with a two-sided 95% interval.
struct Estimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
};

struct ErrorRates {
  Estimate type1;
  /// Highest per-pair rate; worst_sender -> worst_receiver attains it.
  Estimate type2_max;
  std::size_t worst_sender = 0;
  std::size_t worst_receiver = 0;
  /// Number of ordered pairs with at least one evaluation.
  std::uint64_t pairs_observed = 0;
  /// Pooled false-activation rate. successes/trials are evaluation counts;
  /// the interval treats each trial as one cluster since its evaluations
  /// share h and the noise.
  Estimate type2_avg;
};

/// Clopper-Pearson interval at the given two-sided level.
std::pair<double, double> confidence_interval(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

Estimate binomial_estimate(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

/// Draws one trial: sender t mod M, fading, block, and the non-target
/// receivers to test, all from RandomStream(master_seed, t) in that order.
class TrialKernel {
 public:
  TrialKernel(const Codebook& codebook, const DecodingRule& rule, const FadingModel& fading,
              const PairSampling& sampling, bool noiseless = false);

  struct Outcome {
    std::size_t sender = 0;
    Complex h;
    bool target_accepts = false;
    /// (receiver, accepts) per evaluation.
    std::vector<std::pair<std::size_t, bool>> non_targets;
  };

  /// Runs trial t. The stream is left positioned after the receiver draws.
  void run(std::uint64_t t, RandomStream& stream, Outcome& out) const;

  std::size_t size() const { return static_cast<std::size_t>(words_.cols()); }

 private:
  bool accepts(std::size_t receiver, const ComplexVector& y) const;

  Eigen::MatrixXcd words_;
  double P_;
  DecodingRule rule_;
  FadingModel fading_;
  PairSampling sampling_;
  bool noiseless_;
};

/// Type-I and type-II rates for a concrete codebook. Bit-identical for a
/// fixed plan whatever the worker count.
ErrorRates run_experiment(const ExperimentPlan& plan);

/// Cluster estimate for per-trial counts: sum_a successes over trials of
/// `per_trial` evaluations each, with sum_a2 = sum of squared per-trial counts.
Estimate clustered_estimate(std::uint64_t sum_a, std::uint64_t sum_a2, std::uint64_t per_trial, std::uint64_t trials);

std::string to_string(const PairSampling& sampling);

/// Columns n,M,P,lambda1,rule,fading,metric,estimate,ci_low,ci_high,trials.
void write_rates_header(std::ostream& out);
void write_rates_rows(std::ostream& out, const ExperimentPlan& plan, double lambda1, const ErrorRates& rates);

}  // namespace blindid

#endif  // BLINDID_MONTECARLO_HPP

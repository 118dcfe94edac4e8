#include "blindid/montecarlo.hpp"
#include "blindid/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "blindid/numerics.hpp"
#include "blindid/parallel.hpp"

namespace blindid {

namespace {

struct Tallies {
  std::uint64_t type1_rejects = 0;
  std::uint64_t type2_accepts = 0;
  std::uint64_t type2_accepts_sq = 0;
  std::uint64_t type2_evaluations = 0;
  std::vector<std::uint64_t> pair_accepts;
  std::vector<std::uint64_t> pair_trials;

  explicit Tallies(std::size_t M) : pair_accepts(M * M, 0), pair_trials(M * M, 0) {}

  void merge(const Tallies& other) {
    type1_rejects += other.type1_rejects;
    type2_accepts += other.type2_accepts;
    type2_accepts_sq += other.type2_accepts_sq;
    type2_evaluations += other.type2_evaluations;
    for (std::size_t i = 0; i < pair_accepts.size(); ++i) {
      pair_accepts[i] += other.pair_accepts[i];
      pair_trials[i] += other.pair_trials[i];
    }
  }
};

std::uint64_t evaluations_per_trial(const PairSampling& sampling, std::uint64_t M) {
  if (const auto* s = std::get_if<SampledPairs>(&sampling)) return static_cast<std::uint64_t>(s->k);
  return M - 1;
}

// Rule descriptions go into CSV cells, so commas become semicolons.
std::string csv_cell(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  return text;
}

}  // namespace

void validate(const ExperimentPlan& plan) {
  if (!plan.codebook) throw std::invalid_argument("experiment: missing codebook");
  plan.codebook->validate();
  validate(plan.rule);
  validate(plan.fading);
  if (plan.trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (const auto* s = std::get_if<SampledPairs>(&plan.pair_sampling); s != nullptr && s->k < 1)
    throw std::invalid_argument("experiment: sampled pairs need k >= 1");
  const std::uint64_t per_trial = evaluations_per_trial(plan.pair_sampling, plan.codebook->config.M);
  std::uint64_t total = 0;
  if (__builtin_mul_overflow(per_trial, plan.trials, &total) ||
      __builtin_mul_overflow(per_trial * per_trial, plan.trials, &total))
    throw std::invalid_argument("experiment: trial count overflows the tallies");
}

std::pair<double, double> confidence_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0 || successes > trials) throw std::invalid_argument("confidence_interval: need 0 <= successes <= trials, trials > 0");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence_interval: level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  const double s = static_cast<double>(successes);
  const double t = static_cast<double>(trials);
  const double low = successes == 0 ? 0.0 : beta_inc_inv(s, t - s + 1.0, alpha / 2.0);
  const double high = successes == trials ? 1.0 : beta_inc_inv(s + 1.0, t - s, 1.0 - alpha / 2.0);
  return {low, high};
}

Estimate binomial_estimate(std::uint64_t successes, std::uint64_t trials, double level) {
  const auto [low, high] = confidence_interval(successes, trials, level);
  return {successes, trials, static_cast<double>(successes) / static_cast<double>(trials), low, high};
}

Estimate clustered_estimate(std::uint64_t sum_a, std::uint64_t sum_a2, std::uint64_t per_trial, std::uint64_t trials) {
  if (per_trial == 0 || trials == 0) throw std::runtime_error("experiment: no type-II evaluations occurred");
  const long double m = per_trial;
  const long double T = trials;
  const long double mean = sum_a / (m * T);
  const long double variance =
      trials > 1 ? (static_cast<long double>(sum_a2) / (m * m) - T * mean * mean) / (T - 1) : 0.0L;

  Estimate e;
  e.successes = sum_a;
  e.trials = per_trial * trials;
  e.value = static_cast<double>(mean);
  if (variance > 0.0L) {
    const double half = normal_quantile(0.975) * std::sqrt(static_cast<double>(variance / T));
    e.ci_low = std::max(0.0, e.value - half);
    e.ci_high = std::min(1.0, e.value + half);
  } else {
    const auto [low, high] = confidence_interval(static_cast<std::uint64_t>(std::llround(mean * T)), trials);
    e.ci_low = std::min(low, e.value);
    e.ci_high = std::max(high, e.value);
  }
  return e;
}

TrialKernel::TrialKernel(const Codebook& codebook, const DecodingRule& rule, const FadingModel& fading,
                         const PairSampling& sampling, bool noiseless)
    : P_(codebook.config.P), rule_(rule), fading_(fading), sampling_(sampling), noiseless_(noiseless) {
  const auto vectors = codebook.modulated();
  words_.resize(codebook.config.n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) words_.col(static_cast<Eigen::Index>(j)) = vectors[j];
}

bool TrialKernel::accepts(std::size_t receiver, const ComplexVector& y) const {
  return decide(rule_, compute_metrics(words_.col(static_cast<Eigen::Index>(receiver)), y, P_));
}

void TrialKernel::run(std::uint64_t t, RandomStream& stream, Outcome& out) const {
  const std::size_t M = size();
  out.sender = static_cast<std::size_t>(t % M);
  out.h = sample_fading(fading_, stream);
  const auto noise = noiseless_ ? NoiseSource::zeros() : NoiseSource::gaussian(stream);
  const auto block = transmit(words_.col(static_cast<Eigen::Index>(out.sender)), out.h, P_, noise);
  out.target_accepts = accepts(out.sender, block.y);

  out.non_targets.clear();
  if (const auto* s = std::get_if<SampledPairs>(&sampling_)) {
    for (int r = 0; r < s->k; ++r) {
      auto j = static_cast<std::size_t>(stream.uniform_index(M - 1));
      if (j >= out.sender) ++j;
      out.non_targets.emplace_back(j, false);
    }
  } else {
    for (std::size_t j = 0; j < M; ++j)
      if (j != out.sender) out.non_targets.emplace_back(j, false);
  }
  for (auto& [j, accept] : out.non_targets) accept = accepts(j, block.y);
}

ErrorRates run_experiment(const ExperimentPlan& plan) {
  validate(plan);
  const Codebook& codebook = *plan.codebook;
  const std::size_t M = codebook.codewords.size();
  const TrialKernel kernel(codebook, plan.rule, plan.fading, plan.pair_sampling, plan.noiseless);

  const std::size_t blocks = static_cast<std::size_t>(std::max(1, plan.workers));
  std::vector<Tallies> partial(blocks, Tallies(M));
  parallel_blocks(plan.trials, blocks, plan.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Tallies& tally = partial[b];
    TrialKernel::Outcome outcome;
    for (std::size_t t = begin; t < end; ++t) {
      RandomStream stream(plan.master_seed, t);
      kernel.run(t, stream, outcome);
      if (!outcome.target_accepts) ++tally.type1_rejects;
      std::uint64_t accepted = 0;
      for (const auto& [j, accept] : outcome.non_targets) {
        const std::size_t cell = outcome.sender * M + j;
        ++tally.pair_trials[cell];
        if (accept) {
          ++tally.pair_accepts[cell];
          ++accepted;
        }
      }
      tally.type2_accepts += accepted;
      tally.type2_accepts_sq += accepted * accepted;
      tally.type2_evaluations += outcome.non_targets.size();
    }
  });
  Tallies total(M);
  for (const auto& p : partial) total.merge(p);

  ErrorRates rates;
  rates.type1 = binomial_estimate(total.type1_rejects, plan.trials);
  const std::uint64_t per_trial = evaluations_per_trial(plan.pair_sampling, M);
  if (total.type2_evaluations != per_trial * plan.trials)
    throw std::logic_error("experiment: type-II evaluation count mismatch");
  rates.type2_avg = clustered_estimate(total.type2_accepts, total.type2_accepts_sq, per_trial, plan.trials);

  std::size_t worst = total.pair_trials.size();
  auto rate = [&](std::size_t cell) {
    return static_cast<double>(total.pair_accepts[cell]) / static_cast<double>(total.pair_trials[cell]);
  };
  for (std::size_t cell = 0; cell < total.pair_trials.size(); ++cell) {
    if (total.pair_trials[cell] == 0) continue;
    ++rates.pairs_observed;
    if (worst == total.pair_trials.size()) {
      worst = cell;
      continue;
    }
    const double r = rate(cell);
    const double w = rate(worst);
    if (r > w || (r == w && total.pair_trials[cell] > total.pair_trials[worst])) worst = cell;
  }
  if (worst == total.pair_trials.size()) throw std::runtime_error("experiment: no type-II evaluations occurred");
  rates.worst_sender = worst / M;
  rates.worst_receiver = worst % M;
  rates.type2_max = binomial_estimate(total.pair_accepts[worst], total.pair_trials[worst]);
  return rates;
}

std::string to_string(const PairSampling& sampling) {
  if (const auto* s = std::get_if<SampledPairs>(&sampling)) return "sampled:" + std::to_string(s->k);
  return "all";
}

void write_rates_header(std::ostream& out) {
  out << "n,M,P,lambda1,rule,fading,metric,estimate,ci_low,ci_high,trials\n";
}

void write_rates_rows(std::ostream& out, const ExperimentPlan& plan, double lambda1, const ErrorRates& rates) {
  const auto& config = plan.codebook->config;
  const std::string prefix = std::to_string(config.n) + "," + std::to_string(config.M) + "," +
                             format_double(config.P) + "," + format_double(lambda1) + "," +
                             csv_cell(to_string(plan.rule)) + "," + csv_cell(to_string(plan.fading)) + ",";
  auto row = [&](const char* metric, const Estimate& e) {
    out << prefix << metric << ',' << format_double(e.value) << ',' << format_double(e.ci_low) << ','
        << format_double(e.ci_high) << ',' << e.trials << '\n';
  };
  row("type1", rates.type1);
  row("type2_max", rates.type2_max);
  row("type2_avg", rates.type2_avg);
}

}  // namespace blindid

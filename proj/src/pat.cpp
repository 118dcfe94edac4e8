#include "blindid/pat.hpp"
#include "blindid/format.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "blindid/parallel.hpp"

namespace blindid {

namespace {

struct PatTallies {
  std::uint64_t missed = 0;
  std::uint64_t false_accepts = 0;
  std::uint64_t false_accepts_sq = 0;
};

std::string cell(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  return text;
}

}  // namespace

void validate(const PatPlan& plan) {
  validate(ExperimentPlan{plan.codebook, plan.rule, plan.fading, plan.trials, plan.master_seed, plan.pair_sampling,
                          plan.workers});
  validate(plan.bler);
}

PatResult simulate_pat(const PatPlan& plan) {
  validate(plan);
  const Codebook& codebook = *plan.codebook;
  const double P = codebook.config.P;
  const TrialKernel kernel(codebook, plan.rule, plan.fading, plan.pair_sampling);

  const std::size_t blocks = static_cast<std::size_t>(std::max(1, plan.workers));
  std::vector<PatTallies> partial(blocks);
  parallel_blocks(plan.trials, blocks, plan.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    PatTallies& tally = partial[b];
    TrialKernel::Outcome outcome;
    for (std::size_t t = begin; t < end; ++t) {
      RandomStream stream(plan.master_seed, t);
      kernel.run(t, stream, outcome);
      const bool decodable = stream.uniform() >= bler_eval(plan.bler, P * std::norm(outcome.h));
      if (!outcome.target_accepts && decodable) ++tally.missed;
      const auto accepted = static_cast<std::uint64_t>(
          std::count_if(outcome.non_targets.begin(), outcome.non_targets.end(), [](const auto& e) { return e.second; }));
      tally.false_accepts += accepted;
      tally.false_accepts_sq += accepted * accepted;
    }
  });
  PatTallies total;
  for (const auto& p : partial) {
    total.missed += p.missed;
    total.false_accepts += p.false_accepts;
    total.false_accepts_sq += p.false_accepts_sq;
  }

  const std::uint64_t per_trial = std::holds_alternative<SampledPairs>(plan.pair_sampling)
                                      ? static_cast<std::uint64_t>(std::get<SampledPairs>(plan.pair_sampling).k)
                                      : codebook.config.M - 1;
  PatResult result;
  result.p1_overall = binomial_estimate(total.missed, plan.trials);
  result.p2_overall = clustered_estimate(total.false_accepts, total.false_accepts_sq, per_trial, plan.trials);
  return result;
}

PatAnalysis analyze_pat(const WeightSpectrum& spectrum, double P, double lambda1, const DecodingRule& rule,
                        const FadingModel& fading, const BlerModel& bler, const QuadratureSpec& spec, int workers) {
  PatAnalysis a;
  a.n = spectrum.n();
  a.P = P;
  a.lambda1 = lambda1;
  a.rule = rule;
  a.fading = fading;
  a.bler = bler;
  a.p1_bound = pat_p1_bound(a.n, P, rule, fading, bler, spec);
  a.p2 = lambda2_approx(spectrum, P, rule, fading, spec, workers);
  return a;
}

PatReportRow pat_report_row(const PatAnalysis& analysis, const PatPlan& plan, const PatResult& simulation) {
  if (!plan.codebook) throw std::invalid_argument("pat report: missing codebook");
  const auto& config = plan.codebook->config;
  if (analysis.n != config.n) throw std::invalid_argument("pat report: block length mismatch");
  if (analysis.P != config.P) throw std::invalid_argument("pat report: power mismatch");
  if (to_string(analysis.rule) != to_string(plan.rule)) throw std::invalid_argument("pat report: rule mismatch");
  if (to_string(analysis.fading) != to_string(plan.fading)) throw std::invalid_argument("pat report: fading mismatch");
  if (to_string(analysis.bler) != to_string(plan.bler)) throw std::invalid_argument("pat report: bler mismatch");
  return {analysis, config.M, simulation};
}

void write_pat_report(std::ostream& out, std::span<const PatReportRow> rows) {
  out << "n,M,P,lambda1,rule,fading,bler,p1_bound,p2_analytic,p1_empirical,p1_ci_low,p1_ci_high,"
         "p2_empirical,p2_ci_low,p2_ci_high,trials\n";
  for (const auto& row : rows) {
    const auto& a = row.analysis;
    const auto& s = row.simulation;
    out << a.n << ',' << row.M << ',' << format_double(a.P) << ',' << format_double(a.lambda1) << ',' << cell(to_string(a.rule))
        << ',' << cell(to_string(a.fading)) << ',' << cell(to_string(a.bler)) << ',' << format_double(a.p1_bound) << ','
        << format_double(a.p2) << ',' << format_double(s.p1_overall.value) << ',' << format_double(s.p1_overall.ci_low) << ','
        << format_double(s.p1_overall.ci_high) << ',' << format_double(s.p2_overall.value) << ',' << format_double(s.p2_overall.ci_low)
        << ',' << format_double(s.p2_overall.ci_high) << ',' << s.p1_overall.trials << '\n';
  }
}

}  // namespace blindid

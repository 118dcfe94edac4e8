#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "blindid/analysis.hpp"
#include "blindid/format.hpp"
#include "blindid/bler.hpp"
#include "blindid/channel.hpp"
#include "blindid/codebook.hpp"
#include "blindid/montecarlo.hpp"
#include "blindid/pat.hpp"
#include "blindid/receiver.hpp"
#include "blindid/spectrum.hpp"

namespace blindid::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw std::invalid_argument("config: invalid value '" + text + "' for " + key);
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_value<T>(key, item));
  if (out.empty()) throw std::invalid_argument("config: " + key + " needs at least one value");
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string csv_cell(std::string text) {
  for (auto& c : text)
    if (c == ',') c = ';';
  return text;
}

// Typed view of the settings, validated before any command runs.
struct Config {
  std::vector<int> n;
  std::vector<std::uint64_t> M;
  std::vector<double> P;
  std::vector<double> lambda1;
  std::string rule;
  FadingModel fading;
  BlerModel bler;
  BlerModel bler_lb;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string mode;
  PairSampling pairs;
  std::string codebook;
  std::optional<std::int64_t> d_max;
  std::string experiment;
  CalibrationOptions calibration;
  QuadratureSpec quadrature;

  std::uint64_t master_seed() const { return splitmix64(seed); }

  SpectrumMode spectrum_mode(int length) const {
    if (mode == "exact") return SpectrumMode::exact;
    if (mode == "log") return SpectrumMode::log_domain;
    return length <= WeightSpectrum::kMaxExactLength ? SpectrumMode::exact : SpectrumMode::log_domain;
  }
};

PairSampling parse_pairs(const std::string& text) {
  if (text == "all") return AllPairs{};
  if (text.starts_with("sampled:")) {
    const int k = parse_value<int>("pairs", text.substr(8));
    if (k < 1) throw std::invalid_argument("config: pairs needs k >= 1");
    return SampledPairs{k};
  }
  throw std::invalid_argument("config: pairs must be 'all' or 'sampled:K'");
}

Config load(const Settings& s) {
  for (const auto& [key, value] : s)
    if (!default_settings().contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  Config c;
  c.n = parse_list<int>("n", s.at("n"));
  c.M = parse_list<std::uint64_t>("M", s.at("M"));
  c.P = parse_list<double>("P", s.at("P"));
  c.lambda1 = parse_list<double>("lambda1", s.at("lambda1"));
  for (int n : c.n)
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  for (auto M : c.M)
    if (M < 2) throw std::invalid_argument("config: M must be >= 2");
  for (double P : c.P)
    if (!(P > 0.0) || !std::isfinite(P)) throw std::invalid_argument("config: P must be positive");
  for (double l : c.lambda1)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("config: lambda1 must lie in (0, 1)");

  c.rule = s.at("rule");
  if (c.rule != "mse" && c.rule != "twolook") throw std::invalid_argument("config: rule must be 'mse' or 'twolook'");
  c.fading = parse_fading(s.at("fading"));
  c.bler = parse_bler(s.at("bler"));
  c.bler_lb = s.at("bler_lb").empty() ? c.bler : parse_bler(s.at("bler_lb"));
  c.trials = parse_value<std::uint64_t>("trials", s.at("trials"));
  if (c.trials < 1 || s.at("trials").front() == '-') throw std::invalid_argument("config: trials must be >= 1");
  c.seed = parse_value<std::uint64_t>("seed", s.at("seed"));
  c.workers = parse_value<int>("workers", s.at("workers"));
  if (c.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  c.mode = s.at("mode");
  if (c.mode != "auto" && c.mode != "exact" && c.mode != "log")
    throw std::invalid_argument("config: mode must be auto, exact or log");
  c.pairs = parse_pairs(s.at("pairs"));
  c.codebook = s.at("codebook");
  if (c.codebook != "random" && c.codebook != "gv" && !c.codebook.starts_with("file:"))
    throw std::invalid_argument("config: codebook must be random, gv or file:PATH");
  if (!s.at("d_max").empty()) c.d_max = parse_value<std::int64_t>("d_max", s.at("d_max"));
  c.experiment = s.at("experiment");
  if (c.experiment != "identification" && c.experiment != "pat")
    throw std::invalid_argument("config: experiment must be identification or pat");
  c.calibration.mse_share = parse_value<double>("mse_share", s.at("mse_share"));
  if (!(c.calibration.mse_share > 0.0 && c.calibration.mse_share < 1.0))
    throw std::invalid_argument("config: mse_share must lie in (0, 1)");
  c.calibration.grid_points = parse_value<int>("grid_points", s.at("grid_points"));
  if (c.calibration.grid_points < 2) throw std::invalid_argument("config: grid_points must be >= 2");
  if (!s.at("u_h").empty()) {
    c.calibration.forced_u_h = parse_value<double>("u_h", s.at("u_h"));
    if (!(*c.calibration.forced_u_h >= 0.0)) throw std::invalid_argument("config: u_h must be nonnegative");
  }
  c.calibration.workers = c.workers;
  c.quadrature.node_count = parse_value<int>("nodes", s.at("nodes"));
  c.quadrature.tail_cutoff_mass = parse_value<double>("tail_mass", s.at("tail_mass"));
  validate(c.quadrature);
  return c;
}

void require_length(const Config& c, int minimum) {
  for (int n : c.n)
    if (n < minimum) throw std::invalid_argument("config: n must be >= " + std::to_string(minimum));
}

void write_header(std::ostream& out, const std::string& command, const Settings& s, const Config& c) {
  out << "# blindid " << command << '\n';
  for (const auto& [key, value] : s)
    if (key != "workers") out << "# " << key << '=' << value << '\n';
  out << "# master_seed=" << c.master_seed() << '\n';
}

DecodingRule make_rule(const Config& c, int n, double P, double lambda1) {
  if (c.rule == "mse") return MseOnly{mse_threshold(n, lambda1)};
  return calibrate_two_look(n, P, lambda1, c.fading, c.bler_lb, c.quadrature, c.calibration).rule;
}

std::shared_ptr<const Codebook> make_codebook(const Config& c, int n, std::uint64_t M, double P) {
  if (c.codebook.starts_with("file:")) {
    const std::string path = c.codebook.substr(5);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("codebook: cannot open '" + path + "'");
    auto book = std::make_shared<Codebook>(read_codebook(in));
    if (book->config.n != n || book->config.M != M || book->config.P != P)
      throw std::invalid_argument("codebook: file does not match n, M, P");
    return book;
  }
  const CodeConfig config{n, M, P};
  config.validate();
  if (c.codebook == "random") return std::make_shared<Codebook>(random_codebook(config, c.seed));
  const std::int64_t d_max = c.d_max ? *c.d_max : d_min(weight_spectrum(n, c.spectrum_mode(n), c.workers), M);
  auto result = greedy_gv_codebook(config, d_max, c.seed);
  if (!result.complete())
    throw std::runtime_error("construct: budget exhausted at size " + std::to_string(result.codebook.codewords.size()) +
                             " < " + std::to_string(M));
  return std::make_shared<Codebook>(std::move(result.codebook));
}

void cmd_spectrum(const Config& c, std::ostream& out) {
  for (int n : c.n) {
    const auto spectrum = weight_spectrum(n, c.spectrum_mode(n), c.workers);
    if (c.n.size() > 1) out << "# n=" << n << '\n';
    write_spectrum_csv(out, spectrum);
  }
}

void cmd_bounds(const Config& c, std::ostream& out) {
  require_length(c, 2);
  out << "n,M,P,lambda1,rule,fading,metric,value,d_min\n";
  for (int n : c.n) {
    const auto spectrum = weight_spectrum(n, c.spectrum_mode(n), c.workers);
    for (auto M : c.M) {
      const auto level = d_min(spectrum, M);
      for (double P : c.P) {
        for (double lambda1 : c.lambda1) {
          const auto rule = make_rule(c, n, P, lambda1);
          const std::string prefix = std::to_string(n) + "," + std::to_string(M) + "," + format_double(P) + "," +
                                     format_double(lambda1) + "," + csv_cell(to_string(rule)) + "," +
                                     csv_cell(to_string(c.fading)) + ",";
          out << prefix << "lambda2_gv," << format_double(lambda2_gv(spectrum, M, P, rule, c.fading, c.quadrature))
              << ',' << level << '\n';
          out << prefix << "lambda2_approx,"
              << format_double(lambda2_approx(spectrum, P, rule, c.fading, c.quadrature, c.workers)) << ',' << level
              << '\n';
        }
      }
    }
  }
}

void cmd_simulate(const Config& c, std::ostream& out) {
  require_length(c, 2);
  std::vector<PatReportRow> pat_rows;
  if (c.experiment == "identification") write_rates_header(out);
  for (int n : c.n) {
    const auto spectrum = weight_spectrum(n, c.spectrum_mode(n), c.workers);
    for (auto M : c.M) {
      for (double P : c.P) {
        const auto codebook = make_codebook(c, n, M, P);
        for (double lambda1 : c.lambda1) {
          const auto rule = make_rule(c, n, P, lambda1);
          if (c.experiment == "identification") {
            const ExperimentPlan plan{codebook, rule, c.fading, c.trials, c.master_seed(), c.pairs, c.workers};
            write_rates_rows(out, plan, lambda1, run_experiment(plan));
            const std::string prefix = std::to_string(n) + "," + std::to_string(M) + "," + format_double(P) + "," +
                                       format_double(lambda1) + "," + csv_cell(to_string(rule)) + "," +
                                       csv_cell(to_string(c.fading)) + ",";
            out << prefix << "lambda2_gv," << format_double(lambda2_gv(spectrum, M, P, rule, c.fading, c.quadrature))
                << ",,,\n";
            out << prefix << "lambda2_approx,"
                << format_double(lambda2_approx(spectrum, P, rule, c.fading, c.quadrature, c.workers)) << ",,,\n";
          } else {
            const PatPlan plan{codebook, rule, c.fading, c.bler, c.trials, c.master_seed(), c.pairs, c.workers};
            const auto analysis = analyze_pat(spectrum, P, lambda1, rule, c.fading, c.bler, c.quadrature, c.workers);
            pat_rows.push_back(pat_report_row(analysis, plan, simulate_pat(plan)));
          }
        }
      }
    }
  }
  if (c.experiment == "pat") write_pat_report(out, pat_rows);
}

void cmd_calibrate(const Config& c, std::ostream& out, std::ostream& summary) {
  require_length(c, 2);
  out << "n,P,lambda1,T,h_bar,u_h,p1_bound\n";
  for (int n : c.n) {
    for (double P : c.P) {
      for (double lambda1 : c.lambda1) {
        const auto result = calibrate_two_look(n, P, lambda1, c.fading, c.bler_lb, c.quadrature, c.calibration);
        out << n << ',' << format_double(P) << ',' << format_double(lambda1) << ',' << format_double(result.rule.T)
            << ',' << format_double(result.rule.h_bar) << ',' << format_double(result.u_h) << ','
            << format_double(result.p1_bound) << '\n';
        summary << "n=" << n << " P=" << format_double(P) << " lambda1=" << format_double(lambda1)
                << ": T=" << format_double(result.rule.T) << " h_bar=" << format_double(result.rule.h_bar)
                << " u_h=" << format_double(result.u_h) << " p1_bound=" << format_double(result.p1_bound) << '\n';
      }
    }
  }
}

void cmd_construct(const Config& c, std::ostream& out, std::ostream& summary) {
  require_length(c, 2);
  if (c.n.size() != 1 || c.M.size() != 1 || c.P.size() != 1)
    throw std::invalid_argument("construct: n, M and P take a single value");
  const auto codebook = make_codebook(c, c.n.front(), c.M.front(), c.P.front());
  const auto check = check_pairwise(*codebook, static_cast<std::int64_t>(c.n.front()) * c.n.front());
  write_codebook(out, *codebook);
  summary << "constructed " << codebook->codewords.size() << " codewords, max pair level " << check.max_level
          << '\n';
}

}  // namespace

const Settings& default_settings() {
  static const Settings defaults{
      {"n", "16"},
      {"M", "100"},
      {"P", "1"},
      {"lambda1", "0.01"},
      {"rule", "mse"},
      {"fading", "rayleigh"},
      {"bler", "normal:128,64"},
      {"bler_lb", ""},
      {"trials", "10000"},
      {"seed", "1"},
      {"workers", "1"},
      {"mode", "auto"},
      {"pairs", "sampled:16"},
      {"codebook", "random"},
      {"d_max", ""},
      {"experiment", "identification"},
      {"mse_share", "0.5"},
      {"grid_points", "200"},
      {"u_h", ""},
      {"nodes", "256"},
      {"tail_mass", "1e-10"},
  };
  return defaults;
}

Settings parse_config(std::istream& in) {
  Settings s;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (!default_settings().contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings preset(const std::string& name) {
  if (name == "fig3") {
    return {{"n", "16,32,64"}, {"M", "100"},          {"P", "1"},           {"lambda1", "0.01"},
            {"rule", "mse"},   {"fading", "rayleigh"}, {"trials", "100000"}, {"pairs", "sampled:16"},
            {"codebook", "random"}, {"experiment", "identification"}};
  }
  if (name == "pat") {
    return {{"n", "128"},          {"M", "100"},           {"P", "1"},           {"lambda1", "0.1,0.01,0.001"},
            {"rule", "twolook"},   {"fading", "rayleigh"}, {"bler", "normal:128,64"}, {"trials", "100000"},
            {"pairs", "sampled:16"}, {"codebook", "random"}, {"experiment", "pat"}};
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blind QPSK identification codes: spectra, bounds, simulation, calibration", "blindid"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string preset_name;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flags;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--preset", preset_name, "fig3 or pat");
  app.add_option("--set", assignments, "key=value override (repeatable)");
  for (const auto& [key, value] : default_settings()) {
    app.add_option_function<std::string>(
        "--" + key, [&flags, key = key](const std::string& v) { flags[key] = v; }, "config key " + key);
  }

  const char* names[] = {"spectrum", "bounds", "simulate", "calibrate", "construct"};
  for (const char* name : names) app.add_subcommand(name)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::ostringstream buffer;
  std::ostringstream summary;
  try {
    Settings settings = default_settings();
    if (!preset_name.empty())
      for (const auto& [k, v] : preset(preset_name)) settings[k] = v;
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) throw std::invalid_argument("cannot open config '" + config_path + "'");
      for (const auto& [k, v] : parse_config(file)) settings[k] = v;
    }
    for (const auto& a : assignments) {
      std::istringstream line(a);
      for (const auto& [k, v] : parse_config(line)) settings[k] = v;
    }
    for (const auto& [k, v] : flags) settings[k] = v;
    const Config config = load(settings);

    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw std::invalid_argument("cannot write '" + out_path + "'");
    }

    if (command != "construct") write_header(buffer, command, settings, config);
    if (command == "spectrum") {
      cmd_spectrum(config, buffer);
    } else if (command == "bounds") {
      cmd_bounds(config, buffer);
    } else if (command == "simulate") {
      cmd_simulate(config, buffer);
    } else if (command == "calibrate") {
      cmd_calibrate(config, buffer, summary);
    } else {
      cmd_construct(config, buffer, summary);
    }

    if (file.is_open()) {
      file << buffer.str();
      if (!file) throw std::runtime_error("write to '" + out_path + "' failed");
      out << summary.str();
    } else {
      out << buffer.str();
      err << summary.str();
    }
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace blindid::cli

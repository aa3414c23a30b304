// stragglar: generate, verify and price all-reduce schedules.
//
// Exit codes: 0 success, 1 I/O or parse error, 2 invalid arguments,
// 3 verification failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stragglar/cost_model.hpp"
#include "stragglar/error.hpp"
#include "stragglar/generate.hpp"
#include "stragglar/schedule_json.hpp"
#include "stragglar/stragglar_generator.hpp"
#include "stragglar/sweep.hpp"
#include "stragglar/verifier.hpp"

namespace {

using stragglar::Algorithm;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvalid = 3;

// Bad command-line input that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  double alpha = stragglar::AlphaBetaParams{}.alpha;
  double beta = stragglar::AlphaBetaParams{}.beta;
  bool json = false;

  stragglar::AlphaBetaParams params() const {
    stragglar::AlphaBetaParams p{alpha, beta};
    try {
      p.validate();
    } catch (const stragglar::Error& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

Algorithm algorithm_arg(const std::string& name) {
  auto algo = stragglar::parse_algorithm(name);
  if (!algo) throw UsageError("unknown algorithm '" + name + "' (stragglar, ring, rhd, broadcast)");
  return *algo;
}

stragglar::EvenPolicy policy_arg(const std::string& name) {
  if (name == "default") return stragglar::EvenPolicy::Default;
  if (name == "tuned") return stragglar::EvenPolicy::Tuned;
  throw UsageError("unknown even policy '" + name + "' (default, tuned)");
}

// Byte counts: plain numbers, optionally with a KiB/MiB/GiB/TiB suffix.
double bytes_arg(const std::string& text) {
  static const std::vector<std::pair<std::string, double>> suffixes{
      {"KiB", 1024.0}, {"MiB", 1048576.0}, {"GiB", 1073741824.0}, {"TiB", 1099511627776.0}};
  double scale = 1.0;
  std::string digits = text;
  for (const auto& [suffix, factor] : suffixes) {
    if (digits.size() > suffix.size() &&
        digits.compare(digits.size() - suffix.size(), suffix.size(), suffix) == 0) {
      digits.resize(digits.size() - suffix.size());
      scale = factor;
      break;
    }
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(digits, &used) * scale;
    if (used != digits.size() || !(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("");
    return value;
  } catch (const std::logic_error&) {
    throw UsageError("invalid byte count '" + text + "'");
  }
}

stragglar::DelaySetting delay_arg(const std::string& text) {
  auto delay = stragglar::parse_delay(text);
  if (!delay) throw UsageError("invalid delay '" + text + "' (seconds or full-overlap)");
  return *delay;
}

ordered_json breakdown_json(const stragglar::CostBreakdown& c) {
  return ordered_json{{"precondition_s", c.precondition_time},
                      {"overlap_deficit_s", c.overlap_deficit},
                      {"post_s", c.post_time},
                      {"total_s", c.total}};
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string algo;
  int n = 0;
  std::string out;
  std::string trace;
  std::string policy = "default";
  bool pretty = false;
};

int run_generate(const GlobalOptions& global, const GenerateArgs& args) {
  const Algorithm algo = algorithm_arg(args.algo);
  const auto policy = policy_arg(args.policy);
  if (!stragglar::is_supported(algo, args.n)) {
    throw UsageError(std::string(stragglar::to_string(algo)) + " does not support n = " +
                     std::to_string(args.n) + "; supported sizes: " +
                     stragglar::supported_sizes(algo));
  }
  if (!args.trace.empty() && !(algo == Algorithm::StragglAR && stragglar::is_power_of_two(args.n))) {
    throw UsageError("--trace is only available for stragglar at power-of-two n");
  }

  stragglar::Schedule schedule;
  std::vector<stragglar::RoundTrace> trace;
  if (!args.trace.empty()) {
    auto generation = stragglar::generate_stragglar_traced(args.n);
    schedule = std::move(generation.schedule);
    trace = std::move(generation.trace);
  } else {
    schedule = stragglar::generate_schedule(algo, args.n, policy);
  }

  const std::string path = args.out.empty()
                               ? "schedule_" + std::string(stragglar::to_string(algo)) + "_n" +
                                     std::to_string(args.n) + ".json"
                               : args.out;
  stragglar::write_text_file(path, stragglar::schedule_to_json(schedule, args.pretty ? 2 : -1) + "\n");
  if (!args.trace.empty()) {
    stragglar::write_text_file(args.trace, stragglar::trace_to_json(trace, args.pretty ? 2 : -1) + "\n");
  }

  const auto beta = stragglar::beta_coefficient(schedule);
  if (global.json) {
    ordered_json j{{"path", path},
                   {"algorithm", stragglar::to_string(algo)},
                   {"n", args.n},
                   {"rounds", schedule.num_rounds()},
                   {"beta_coefficient", stragglar::rational_to_string(beta)}};
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "rounds=" << schedule.num_rounds()
              << " beta_coefficient=" << stragglar::rational_to_string(beta) << " path=" << path
              << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------------ verify

int run_verify(const std::string& path) {
  const stragglar::Schedule schedule = stragglar::read_schedule_file(path);
  const stragglar::VerificationReport report = stragglar::verify_schedule(schedule);
  std::cout << stragglar::report_to_json(report, 2) << '\n';
  return report.valid ? kExitOk : kExitInvalid;
}

// -------------------------------------------------------------------- cost

struct CostArgs {
  std::string algo = "stragglar";
  int n = 0;
  std::string schedule;
  std::string bytes = "1073741824";
  std::string delay = "0";
  std::string policy = "default";
};

int run_cost(const GlobalOptions& global, const CostArgs& args) {
  const auto params = global.params();
  const double s = bytes_arg(args.bytes);
  const auto delay = delay_arg(args.delay);

  std::optional<stragglar::Schedule> from_file;
  Algorithm algo;
  int n = args.n;
  if (!args.schedule.empty()) {
    from_file = stragglar::read_schedule_file(args.schedule);
    algo = from_file->algorithm;
    n = from_file->n;
  } else {
    algo = algorithm_arg(args.algo);
    if (!stragglar::is_supported(algo, n)) {
      throw UsageError(std::string(stragglar::to_string(algo)) + " does not support n = " +
                       std::to_string(n) + "; supported sizes: " +
                       stragglar::supported_sizes(algo));
    }
  }

  stragglar::CostCoefficients coeffs;
  if (from_file) {
    const auto report = stragglar::verify_schedule(*from_file);
    if (!report.valid) {
      std::cerr << "error: schedule does not verify\n" << stragglar::report_to_json(report, 2) << '\n';
      return kExitInvalid;
    }
    coeffs = stragglar::schedule_coefficients(*from_file);
  } else if (algo == Algorithm::StragglAR && !stragglar::is_power_of_two(n)) {
    coeffs = stragglar::schedule_coefficients(
        stragglar::generate_schedule(algo, n, policy_arg(args.policy)));
  } else {
    coeffs = stragglar::analytic_coefficients(algo, n);
  }

  stragglar::ScenarioParams scenario{n, s, delay.seconds, params};
  if (delay.full_overlap) scenario.delay = stragglar::precondition_time(algo, n, s, params);
  const auto cost = stragglar::end_to_end_time(algo, scenario, stragglar::cost_from(coeffs, s, params));

  if (global.json) {
    ordered_json j{{"algorithm", stragglar::to_string(algo)},
                   {"n", n},
                   {"s_bytes", s},
                   {"delay_s", scenario.delay},
                   {"alpha", params.alpha},
                   {"beta", params.beta},
                   {"latency_coefficient", stragglar::rational_to_string(coeffs.latency)},
                   {"beta_coefficient", stragglar::rational_to_string(coeffs.bandwidth)}};
    j.update(breakdown_json(cost));
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("algorithm          %s\n", std::string(stragglar::to_string(algo)).c_str());
    std::printf("n                  %d\n", n);
    std::printf("s_bytes            %.17g\n", s);
    std::printf("delay_s            %.9g\n", scenario.delay);
    std::printf("rounds             %s\n", stragglar::rational_to_string(coeffs.latency).c_str());
    std::printf("beta_coefficient   %s\n", stragglar::rational_to_string(coeffs.bandwidth).c_str());
    std::printf("precondition_s     %.9g\n", cost.precondition_time);
    std::printf("overlap_deficit_s  %.9g\n", cost.overlap_deficit);
    std::printf("post_s             %.9g\n", cost.post_time);
    std::printf("total_s            %.9g\n", cost.total);
  }
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string variable = "cluster_size";
  std::vector<std::string> values;
  std::vector<std::string> range;  // start stop step
  bool multiplicative = false;
  int n = 8;
  std::string bytes = "1073741824";
  std::string delay = "full-overlap";
  std::vector<std::string> algos;
  std::string out;
  std::string policy = "default";
};

double sweep_value(stragglar::SweepVariable variable, const std::string& text) {
  if (variable == stragglar::SweepVariable::BufferSize) return bytes_arg(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("invalid sweep value '" + text + "'");
  }
}

int run_sweep(const GlobalOptions& global, const SweepArgs& args) {
  stragglar::SweepSpec spec;
  const auto variable = stragglar::parse_sweep_variable(args.variable);
  if (!variable) throw UsageError("unknown sweep variable '" + args.variable + "'");
  spec.variable = *variable;
  spec.params = global.params();
  spec.n = args.n;
  spec.buffer_bytes = bytes_arg(args.bytes);
  spec.delay = delay_arg(args.delay);
  if (!args.algos.empty()) {
    spec.algorithms.clear();
    for (const auto& a : args.algos) spec.algorithms.push_back(algorithm_arg(a));
  }
  for (const auto& v : args.values) spec.values.push_back(sweep_value(spec.variable, v));
  if (!args.range.empty()) {
    if (args.range.size() != 3) throw UsageError("--range takes start stop step");
    try {
      auto expanded = stragglar::expand_range(sweep_value(spec.variable, args.range[0]),
                                              sweep_value(spec.variable, args.range[1]),
                                              std::stod(args.range[2]), args.multiplicative);
      spec.values.insert(spec.values.end(), expanded.begin(), expanded.end());
    } catch (const std::logic_error&) {
      throw UsageError("invalid --range step '" + args.range[2] + "'");
    } catch (const stragglar::Error& e) {
      throw UsageError(e.what());
    }
  }

  std::vector<stragglar::SweepRow> rows;
  try {
    rows = stragglar::SweepRunner(policy_arg(args.policy)).run(spec);
  } catch (const stragglar::InvalidSpecError& e) {
    throw UsageError(e.what());
  }
  const std::string csv = stragglar::sweep_to_csv(rows);
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    stragglar::write_text_file(args.out, csv);
  }
  return kExitOk;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  int n = 8;
  std::string bytes = "1073741824";
  std::string delay = "full-overlap";
  std::string policy = "default";
};

int run_compare(const GlobalOptions& global, const CompareArgs& args) {
  const auto params = global.params();
  const double s = bytes_arg(args.bytes);
  const auto delay = delay_arg(args.delay);
  if (args.n < 2) throw UsageError("n must be at least 2");
  const auto table = stragglar::compare_algorithms(args.n, s, delay, params, policy_arg(args.policy));

  if (global.json) {
    ordered_json rows = ordered_json::array();
    for (const auto& c : table) {
      ordered_json row{{"algorithm", stragglar::to_string(c.algorithm)}, {"delay_s", c.delay_used}};
      row.update(breakdown_json(c.cost));
      row["fastest"] = c.fastest;
      rows.push_back(std::move(row));
    }
    ordered_json j{{"n", args.n},
                   {"s_bytes", s},
                   {"delay", delay.full_overlap ? ordered_json("full-overlap") : ordered_json(delay.seconds)},
                   {"alpha", params.alpha},
                   {"beta", params.beta},
                   {"algorithms", rows}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }

  std::printf("%-10s %14s %14s %14s %14s %14s\n", "algorithm", "delay_s", "precond_s", "deficit_s",
              "post_s", "total_s");
  for (const auto& c : table) {
    std::printf("%-10s %14.6e %14.6e %14.6e %14.6e %14.6e%s\n",
                std::string(stragglar::to_string(c.algorithm)).c_str(), c.delay_used,
                c.cost.precondition_time, c.cost.overlap_deficit, c.cost.post_time, c.cost.total,
                c.fastest ? "  <- fastest" : "");
  }
  if (delay.full_overlap) std::printf("(full overlap: ranked by post_s, time after the straggler arrives)\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Straggler-aware all-reduce schedules: generation, verification and cost model"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--alpha", global.alpha, "Per-message latency in seconds")
      ->envname("STRAGGLAR_ALPHA")
      ->capture_default_str();
  app.add_option("--beta", global.beta, "Per-byte transfer time in seconds")
      ->envname("STRAGGLAR_BETA")
      ->capture_default_str();
  app.add_flag("--json", global.json, "Machine-readable output");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a schedule as JSON");
  generate->add_option("--algo", gen.algo, "stragglar, ring, rhd or broadcast")->required();
  generate->add_option("--n", gen.n, "Number of ranks")->required();
  generate->add_option("-o,--out", gen.out, "Output file (default schedule_<algo>_n<N>.json)");
  generate->add_option("--trace", gen.trace, "Also write the per-round generator trace here");
  generate->add_option("--even-policy", gen.policy, "Matching policy for even non-power-of-two n")
      ->capture_default_str();
  generate->add_flag("--pretty", gen.pretty, "Indent the JSON");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Replay a schedule file and report violations");
  verify->add_option("schedule", verify_path, "Schedule JSON file")->required();

  CostArgs cost;
  auto* cost_cmd = app.add_subcommand("cost", "Price one algorithm or schedule file");
  cost_cmd->add_option("--algo", cost.algo, "Algorithm")->capture_default_str();
  cost_cmd->add_option("--n", cost.n, "Number of ranks");
  cost_cmd->add_option("--schedule", cost.schedule, "Price this schedule file instead");
  cost_cmd->add_option("--s", cost.bytes, "Buffer size in bytes (KiB/MiB/GiB suffixes allowed)")
      ->capture_default_str();
  cost_cmd->add_option("--delay", cost.delay, "Straggler delay in seconds, or full-overlap")
      ->capture_default_str();
  cost_cmd->add_option("--even-policy", cost.policy, "Matching policy for even non-power-of-two n")
      ->capture_default_str();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate the cost model over a range, CSV output");
  sweep_cmd->add_option("--variable", sweep.variable, "cluster_size, buffer_size or delay")
      ->capture_default_str();
  sweep_cmd->add_option("--values", sweep.values, "Explicit values")->delimiter(',');
  sweep_cmd->add_option("--range", sweep.range, "start stop step")->expected(3);
  sweep_cmd->add_flag("--multiplicative", sweep.multiplicative, "Range steps multiply instead of add");
  sweep_cmd->add_option("--n", sweep.n, "Cluster size when not swept")->capture_default_str();
  sweep_cmd->add_option("--s", sweep.bytes, "Buffer size when not swept")->capture_default_str();
  sweep_cmd->add_option("--delay", sweep.delay, "Delay when not swept")->capture_default_str();
  sweep_cmd->add_option("--algos", sweep.algos, "Algorithms to include")->delimiter(',');
  sweep_cmd->add_option("-o,--out", sweep.out, "CSV file (default stdout)");
  sweep_cmd->add_option("--even-policy", sweep.policy, "Matching policy for even non-power-of-two n")
      ->capture_default_str();

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Cost breakdown of every algorithm for one scenario");
  compare->add_option("--n", cmp.n, "Number of ranks")->capture_default_str();
  compare->add_option("--s", cmp.bytes, "Buffer size in bytes")->capture_default_str();
  compare->add_option("--delay", cmp.delay, "Straggler delay in seconds, or full-overlap")
      ->capture_default_str();
  compare->add_option("--even-policy", cmp.policy, "Matching policy for even non-power-of-two n")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*generate) return run_generate(global, gen);
    if (*verify) return run_verify(verify_path);
    if (*cost_cmd) {
      if (cost.schedule.empty() && cost.n == 0) throw UsageError("cost needs --n or --schedule");
      return run_cost(global, cost);
    }
    if (*sweep_cmd) return run_sweep(global, sweep);
    if (*compare) return run_compare(global, cmp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const stragglar::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const stragglar::InvalidSizeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const stragglar::UnsupportedSizeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const stragglar::InvalidSpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const stragglar::InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const stragglar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

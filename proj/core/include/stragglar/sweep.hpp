#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stragglar/cost_model.hpp"
#include "stragglar/even_generator.hpp"
#include "stragglar/schedule.hpp"

namespace stragglar {

enum class SweepVariable { ClusterSize, BufferSize, Delay };

std::optional<SweepVariable> parse_sweep_variable(std::string_view name);

// Either a fixed delay in seconds or "just long enough to hide each
// algorithm's precondition". Full-overlap rows are timed from the moment the
// straggler arrives, so they report the post-arrival time only.
struct DelaySetting {
  bool full_overlap = false;
  double seconds = 0.0;

  static DelaySetting full() { return {true, 0.0}; }
  static DelaySetting fixed(double s) { return {false, s}; }
};

// Parses "full-overlap" or a number of seconds.
std::optional<DelaySetting> parse_delay(std::string_view text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::ClusterSize;
  std::vector<double> values;
  int n = 8;
  double buffer_bytes = 1073741824.0;
  DelaySetting delay = DelaySetting::full();
  AlphaBetaParams params;
  std::vector<Algorithm> algorithms{Algorithm::StragglAR, Algorithm::Ring, Algorithm::RHD,
                                    Algorithm::Broadcast};
};

struct SweepRow {
  int n = 0;
  double buffer_bytes = 0.0;
  double delay = 0.0;
  Algorithm algorithm = Algorithm::Ring;
  double total = 0.0;
  double speedup_over_ring = 0.0;
};

// Values from start to stop inclusive: multiplicative steps when
// `multiplicative`, additive otherwise. Throws Error on a step that cannot
// reach stop.
std::vector<double> expand_range(double start, double stop, double step, bool multiplicative);

// Throws InvalidSpecError when the spec is unusable (no values, non-positive
// values, odd n with StragglAR requested, fractional cluster sizes...).
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

void validate(const SweepSpec& spec);

// Evaluates the models. Points whose n does not suit RHD or Broadcast skip
// those algorithms. StragglAR at even non-power-of-2 n is priced from the
// generated schedule's measured round count. Rows come out in spec order:
// point by point, algorithms in the listed order.
class SweepRunner {
 public:
  explicit SweepRunner(EvenPolicy even_policy = EvenPolicy::Default) : even_policy_(even_policy) {}

  std::vector<SweepRow> run(const SweepSpec& spec);

  // Time after the straggler arrives for one algorithm.
  double post_time(Algorithm algo, int n, double buffer_bytes, const AlphaBetaParams& params);
  CostBreakdown breakdown(Algorithm algo, const ScenarioParams& scenario);
  // Breakdown under a delay setting; for full overlap the delay is each
  // algorithm's own precondition time.
  CostBreakdown breakdown(Algorithm algo, int n, double buffer_bytes, DelaySetting delay,
                          const AlphaBetaParams& params, double* delay_used = nullptr);

 private:
  EvenPolicy even_policy_;
  std::map<int, CostCoefficients> measured_;  // even non-power-of-2 StragglAR
};

// Header: n,s_bytes,delay_s,algo,total_s,speedup_over_ring
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct Comparison {
  Algorithm algorithm;
  double delay_used = 0.0;
  CostBreakdown cost;
  bool fastest = false;
};

// Every algorithm valid for n, ordered StragglAR, Ring, RHD, Broadcast. In
// full-overlap mode the fastest is judged on post-arrival time, otherwise on
// total time.
std::vector<Comparison> compare_algorithms(int n, double buffer_bytes, DelaySetting delay,
                                           const AlphaBetaParams& params,
                                           EvenPolicy even_policy = EvenPolicy::Default);

}  // namespace stragglar

#include "stragglar/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include "stragglar/error.hpp"

namespace stragglar {

namespace {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

void require_pow2(Algorithm algo, int n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw UnsupportedSizeError(std::string(to_string(algo)) +
                               ": closed-form cost needs a power-of-two n, got " +
                               std::to_string(n));
  }
}

}  // namespace

void AlphaBetaParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("beta must be finite and > 0");
}

void ScenarioParams::validate() const {
  if (n < 2) throw InvalidSizeError("n must be at least 2");
  if (!(buffer_bytes > 0.0) || !std::isfinite(buffer_bytes)) throw Error("buffer size must be > 0");
  if (!(delay >= 0.0) || !std::isfinite(delay)) throw Error("delay must be finite and >= 0");
  params.validate();
}

CostCoefficients analytic_coefficients(Algorithm algo, int n) {
  if (n < 2) throw InvalidSizeError("n must be at least 2");
  const std::int64_t nn = n;
  switch (algo) {
    case Algorithm::StragglAR: {
      require_pow2(algo, n);
      const std::int64_t rounds = nn + log2_floor(n) - 2;
      return {Rational(rounds), Rational(rounds, nn - 1)};
    }
    case Algorithm::Ring:
      return {Rational(2 * (nn - 1)), Rational(2 * (nn - 1), nn)};
    case Algorithm::RHD:
      require_pow2(algo, n);
      return {Rational(2 * log2_floor(n)), Rational(2 * (nn - 1), nn)};
    case Algorithm::Broadcast:
      require_pow2(algo, n);
      return {Rational(log2_floor(n)), Rational(log2_floor(n))};
  }
  throw Error("unknown algorithm");
}

CostCoefficients schedule_coefficients(const Schedule& schedule) {
  const VerificationReport report = verify_schedule(schedule);
  if (!report.valid) {
    throw Error("schedule_cost: schedule does not verify (" +
                (report.violations.empty() ? std::string("unknown")
                                           : report.violations.front().description) +
                ")");
  }
  return {Rational(static_cast<std::int64_t>(report.rounds_executed)), report.beta_coefficient};
}

double cost_from(const CostCoefficients& coeffs, double buffer_bytes, const AlphaBetaParams& params) {
  return to_double(coeffs.latency) * params.alpha +
         to_double(coeffs.bandwidth) * buffer_bytes * params.beta;
}

double analytic_cost(Algorithm algo, int n, double buffer_bytes, const AlphaBetaParams& params) {
  return cost_from(analytic_coefficients(algo, n), buffer_bytes, params);
}

double schedule_cost(const Schedule& schedule, double buffer_bytes, const AlphaBetaParams& params) {
  if (schedule.rounds.empty()) return 0.0;
  return cost_from(schedule_coefficients(schedule), buffer_bytes, params);
}

double reduce_scatter_time(int m, double buffer_bytes, const AlphaBetaParams& params) {
  if (m < 1) throw InvalidSizeError("reduce-scatter needs at least one rank");
  if (m == 1) return 0.0;
  return (m - 1) * params.alpha +
         (static_cast<double>(m - 1) / static_cast<double>(m)) * buffer_bytes * params.beta;
}

double precondition_time(Algorithm algo, int n, double buffer_bytes, const AlphaBetaParams& params) {
  switch (algo) {
    case Algorithm::StragglAR: return reduce_scatter_time(n - 1, buffer_bytes, params);
    case Algorithm::Broadcast: return 2.0 * reduce_scatter_time(n - 1, buffer_bytes, params);
    case Algorithm::Ring:
    case Algorithm::RHD: return 0.0;
  }
  throw Error("unknown algorithm");
}

CostBreakdown end_to_end_time(Algorithm algo, const ScenarioParams& scenario) {
  scenario.validate();
  return end_to_end_time(
      algo, scenario, analytic_cost(algo, scenario.n, scenario.buffer_bytes, scenario.params));
}

CostBreakdown end_to_end_time(Algorithm algo, const ScenarioParams& scenario, double post_time) {
  scenario.validate();
  CostBreakdown out;
  out.precondition_time = precondition_time(algo, scenario.n, scenario.buffer_bytes, scenario.params);
  out.overlap_deficit = std::max(out.precondition_time - scenario.delay, 0.0);
  out.post_time = post_time;
  out.total = std::max(scenario.delay, out.precondition_time) + post_time;
  return out;
}

double critical_delay(int n, double buffer_bytes, const AlphaBetaParams& params, Algorithm baseline) {
  if (baseline == Algorithm::StragglAR) {
    throw Error("critical_delay: baseline must be ring, rhd or broadcast");
  }
  const double t_rs = reduce_scatter_time(n - 1, buffer_bytes, params);
  const double t_b = analytic_cost(baseline, n, buffer_bytes, params);
  const double t_sar = analytic_cost(Algorithm::StragglAR, n, buffer_bytes, params);
  return std::max(t_rs - std::max(t_b - t_sar, 0.0), 0.0);
}

}  // namespace stragglar

#pragma once

#include "stragglar/schedule.hpp"
#include "stragglar/verifier.hpp"

namespace stragglar {

// Sending s bytes costs alpha + s * beta seconds.
struct AlphaBetaParams {
  double alpha = 3e-6;         // seconds per message
  double beta = 1.0 / 450e9;   // seconds per byte

  void validate() const;
};

struct ScenarioParams {
  int n = 0;
  double buffer_bytes = 0.0;
  double delay = 0.0;  // how long the straggler arrives after the others
  AlphaBetaParams params;

  void validate() const;
};

// All times in seconds, measured from the moment the non-stragglers call
// all-reduce.
struct CostBreakdown {
  double precondition_time = 0.0;  // work the non-stragglers do while waiting
  double overlap_deficit = 0.0;    // part of it the delay fails to hide
  double post_time = 0.0;          // schedule time once everyone is present
  double total = 0.0;
};

// Exact coefficients of alpha (round count) and of s * beta.
struct CostCoefficients {
  Rational latency{0};
  Rational bandwidth{0};

  friend bool operator==(const CostCoefficients&, const CostCoefficients&) = default;
};

// Closed-form coefficients. StragglAR, RHD and Broadcast require n to be a
// power of two; Ring accepts any n >= 2.
CostCoefficients analytic_coefficients(Algorithm algo, int n);
// Round count and bandwidth coefficient measured by replaying a schedule.
// Throws Error when the schedule does not verify.
CostCoefficients schedule_coefficients(const Schedule& schedule);

double analytic_cost(Algorithm algo, int n, double buffer_bytes, const AlphaBetaParams& params);
double schedule_cost(const Schedule& schedule, double buffer_bytes, const AlphaBetaParams& params);
double cost_from(const CostCoefficients& coeffs, double buffer_bytes, const AlphaBetaParams& params);

// Ring reduce-scatter over m ranks; zero for m = 1.
double reduce_scatter_time(int m, double buffer_bytes, const AlphaBetaParams& params);

// Work done before the straggler joins: reduce-scatter among n-1 ranks for
// StragglAR, a full all-reduce (twice that) for Broadcast, nothing for Ring
// and RHD.
double precondition_time(Algorithm algo, int n, double buffer_bytes, const AlphaBetaParams& params);

// total = max(delay, precondition) + post_time. Ring and RHD have no
// precondition, so they simply wait out the delay.
CostBreakdown end_to_end_time(Algorithm algo, const ScenarioParams& scenario);
// Same accounting with an externally measured post-arrival time, e.g. from a
// generated non-power-of-2 schedule.
CostBreakdown end_to_end_time(Algorithm algo, const ScenarioParams& scenario, double post_time);

// Smallest straggler delay from which StragglAR is no slower than a baseline
// that starts when the straggler arrives:
//   max(T_RS - max(T_B - T_SAR, 0), 0)
// with T_RS the (n-1)-rank reduce-scatter. When T_B < T_SAR StragglAR never
// catches up and the value is only the point where the precondition is hidden.
double critical_delay(int n, double buffer_bytes, const AlphaBetaParams& params, Algorithm baseline);

}  // namespace stragglar

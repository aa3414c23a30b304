#include "stragglar/sweep.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stragglar/error.hpp"
#include "stragglar/generate.hpp"

namespace stragglar {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// The figure of merit reported in rows: post-arrival time under full overlap,
// end-to-end time otherwise.
double merit(const CostBreakdown& cost, const DelaySetting& delay) {
  return delay.full_overlap ? cost.post_time : cost.total;
}

}  // namespace

std::optional<SweepVariable> parse_sweep_variable(std::string_view name) {
  if (name == "cluster_size" || name == "n") return SweepVariable::ClusterSize;
  if (name == "buffer_size" || name == "s") return SweepVariable::BufferSize;
  if (name == "delay") return SweepVariable::Delay;
  return std::nullopt;
}

std::optional<DelaySetting> parse_delay(std::string_view text) {
  if (text == "full-overlap" || text == "full_overlap") return DelaySetting::full();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !(value >= 0.0) || !std::isfinite(value)) {
    return std::nullopt;
  }
  return DelaySetting::fixed(value);
}

std::vector<double> expand_range(double start, double stop, double step, bool multiplicative) {
  if (!(start > 0.0) && multiplicative) throw Error("multiplicative range must start above 0");
  if (multiplicative ? !(step > 1.0) : !(step > 0.0)) {
    throw Error("range step must move towards stop");
  }
  if (stop < start) throw Error("range stop is below start");
  std::vector<double> out;
  // Tolerance so that accumulated rounding does not drop the endpoint.
  const double slack = std::abs(stop) * 1e-12;
  for (int i = 0;; ++i) {
    const double v = multiplicative ? start * std::pow(step, i) : start + step * i;
    if (v > stop + slack) break;
    out.push_back(v);
    if (out.size() > 1000000) throw Error("range expands to too many points");
  }
  return out;
}

void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw InvalidSpecError("sweep needs at least one value");
  if (spec.algorithms.empty()) throw InvalidSpecError("sweep needs at least one algorithm");
  try {
    spec.params.validate();
  } catch (const Error& e) {
    throw InvalidSpecError(e.what());
  }
  for (double v : spec.values) {
    const bool ok = spec.variable == SweepVariable::Delay ? v >= 0.0 : v > 0.0;
    if (!ok || !std::isfinite(v)) {
      throw InvalidSpecError("sweep value " + format_number(v) + " is out of range");
    }
  }
  std::vector<int> sizes;
  if (spec.variable == SweepVariable::ClusterSize) {
    for (double v : spec.values) {
      if (v != std::floor(v)) throw InvalidSpecError("cluster sizes must be integers");
      sizes.push_back(static_cast<int>(v));
    }
  } else {
    sizes.push_back(spec.n);
  }
  if (spec.variable != SweepVariable::BufferSize && !(spec.buffer_bytes > 0.0)) {
    throw InvalidSpecError("buffer size must be positive");
  }
  for (int n : sizes) {
    if (n < 2) throw InvalidSpecError("cluster size must be at least 2");
    for (Algorithm a : spec.algorithms) {
      if ((a == Algorithm::StragglAR || a == Algorithm::Ring) && !is_supported(a, n)) {
        throw InvalidSpecError(std::string(to_string(a)) + " does not support n = " +
                               std::to_string(n) + "; supported: " + supported_sizes(a));
      }
    }
  }
}

double SweepRunner::post_time(Algorithm algo, int n, double buffer_bytes,
                              const AlphaBetaParams& params) {
  if (algo == Algorithm::StragglAR && !is_power_of_two(n)) {
    auto it = measured_.find(n);
    if (it == measured_.end()) {
      it = measured_.emplace(n, schedule_coefficients(generate_schedule(algo, n, even_policy_))).first;
    }
    return cost_from(it->second, buffer_bytes, params);
  }
  return analytic_cost(algo, n, buffer_bytes, params);
}

CostBreakdown SweepRunner::breakdown(Algorithm algo, const ScenarioParams& scenario) {
  return end_to_end_time(algo, scenario,
                         post_time(algo, scenario.n, scenario.buffer_bytes, scenario.params));
}

CostBreakdown SweepRunner::breakdown(Algorithm algo, int n, double buffer_bytes,
                                     DelaySetting delay, const AlphaBetaParams& params,
                                     double* delay_used) {
  ScenarioParams scenario{n, buffer_bytes, delay.seconds, params};
  if (delay.full_overlap) scenario.delay = precondition_time(algo, n, buffer_bytes, params);
  if (delay_used) *delay_used = scenario.delay;
  return breakdown(algo, scenario);
}

std::vector<SweepRow> SweepRunner::run(const SweepSpec& spec) {
  validate(spec);
  std::vector<SweepRow> rows;
  for (double value : spec.values) {
    int n = spec.n;
    double s = spec.buffer_bytes;
    DelaySetting delay = spec.delay;
    switch (spec.variable) {
      case SweepVariable::ClusterSize: n = static_cast<int>(value); break;
      case SweepVariable::BufferSize: s = value; break;
      case SweepVariable::Delay: delay = DelaySetting::fixed(value); break;
    }
    const double ring = merit(breakdown(Algorithm::Ring, n, s, delay, spec.params), delay);
    for (Algorithm algo : spec.algorithms) {
      if (!is_supported(algo, n)) continue;
      SweepRow row;
      row.n = n;
      row.buffer_bytes = s;
      row.algorithm = algo;
      const CostBreakdown cost = breakdown(algo, n, s, delay, spec.params, &row.delay);
      row.total = merit(cost, delay);
      row.speedup_over_ring = algo == Algorithm::Ring ? 1.0 : ring / row.total;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "n,s_bytes,delay_s,algo,total_s,speedup_over_ring\n";
  for (const SweepRow& r : rows) {
    os << r.n << ',' << format_number(r.buffer_bytes) << ',' << format_number(r.delay) << ','
       << to_string(r.algorithm) << ',' << format_number(r.total) << ','
       << format_number(r.speedup_over_ring) << '\n';
  }
  return os.str();
}

std::vector<Comparison> compare_algorithms(int n, double buffer_bytes, DelaySetting delay,
                                           const AlphaBetaParams& params, EvenPolicy even_policy) {
  SweepRunner runner(even_policy);
  std::vector<Comparison> out;
  for (Algorithm algo : {Algorithm::StragglAR, Algorithm::Ring, Algorithm::RHD, Algorithm::Broadcast}) {
    if (!is_supported(algo, n)) continue;
    Comparison c{algo, 0.0, {}, false};
    c.cost = runner.breakdown(algo, n, buffer_bytes, delay, params, &c.delay_used);
    out.push_back(c);
  }
  if (out.empty()) throw InvalidSpecError("no algorithm supports n = " + std::to_string(n));
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (merit(out[i].cost, delay) < merit(out[best].cost, delay)) best = i;
  }
  out[best].fastest = true;
  return out;
}

}  // namespace stragglar

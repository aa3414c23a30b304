#include "stragglar/verifier.hpp"

#include <algorithm>
#include <sstream>

namespace stragglar {

namespace {

std::string describe(const ContributorSet& set) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto i = set.find_first(); i != ContributorSet::npos; i = set.find_next(i)) {
    if (!first) os << ',';
    os << i;
    first = false;
  }
  os << '}';
  return os.str();
}

void require_size(int n) {
  if (n < 2) {
    throw InvalidSizeError("cluster size must be at least 2, got " + std::to_string(n));
  }
}

struct PendingWrite {
  Rank rank;
  Chunk chunk;
  ContributorSet value;
};

// Shared by apply_round and verify_schedule. Appends violations instead of
// throwing; transfers that violate are skipped, the rest still apply.
void check_ports(const Round& round, int n, PortModel ports, std::size_t round_index,
                 std::vector<Violation>& violations) {
  auto in_range = [n](Rank r) { return r >= 0 && r < n; };
  if (ports == PortModel::Matching) {
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const Matching& m : round.matchings) {
      for (Rank r : {m.first, m.second}) {
        if (!in_range(r)) continue;
        if (++seen[static_cast<std::size_t>(r)] == 2) {
          violations.push_back({round_index, ViolationKind::PortViolation,
                                "rank " + std::to_string(r) +
                                    " participates in more than one matching"});
        }
      }
    }
    return;
  }
  std::vector<int> sends(static_cast<std::size_t>(n), 0);
  std::vector<int> receives(static_cast<std::size_t>(n), 0);
  for (const Matching& m : round.matchings) {
    for (const Transfer& t : m.transfers) {
      if (in_range(t.src) && ++sends[static_cast<std::size_t>(t.src)] == 2) {
        violations.push_back({round_index, ViolationKind::PortViolation,
                              "rank " + std::to_string(t.src) + " sends twice"});
      }
      if (in_range(t.dst) && ++receives[static_cast<std::size_t>(t.dst)] == 2) {
        violations.push_back({round_index, ViolationKind::PortViolation,
                              "rank " + std::to_string(t.dst) + " receives twice"});
      }
    }
  }
}

void replay_round(ClusterState& state, const Round& round, PortModel ports,
                  std::size_t round_index, std::vector<Violation>& violations) {
  const int n = state.n();
  check_ports(round, n, ports, round_index, violations);

  std::vector<PendingWrite> writes;
  for (const Matching& m : round.matchings) {
    for (const Transfer& t : m.transfers) {
      if (t.src < 0 || t.src >= n || t.dst < 0 || t.dst >= n || t.src == t.dst) {
        violations.push_back({round_index, ViolationKind::Structure,
                              "transfer " + std::to_string(t.src) + "->" +
                                  std::to_string(t.dst) + " is malformed"});
        continue;
      }
      for (Chunk c : t.chunks) {
        if (c < 0 || c >= state.num_chunks()) {
          violations.push_back({round_index, ViolationKind::Structure,
                                "chunk " + std::to_string(c) + " out of range"});
          continue;
        }
        const ContributorSet& src = state.at(t.src, c);
        const ContributorSet& dst = state.at(t.dst, c);
        const std::string where = std::to_string(t.src) + "->" +
                                  std::to_string(t.dst) + " chunk " +
                                  std::to_string(c);
        if (src.none()) {
          violations.push_back({round_index, ViolationKind::PhantomSend,
                                where + ": sender holds no data for the chunk"});
          continue;
        }
        if (t.kind == TransferKind::Reduce) {
          if (src.intersects(dst)) {
            violations.push_back({round_index, ViolationKind::DoubleCount,
                                  where + ": reduce of " + describe(src) + " into " +
                                      describe(dst) + " double counts " +
                                      describe(src & dst)});
            continue;
          }
          writes.push_back({t.dst, c, src | dst});
        } else {
          if (!dst.is_subset_of(src)) {
            violations.push_back({round_index, ViolationKind::Regression,
                                  where + ": replace of " + describe(dst) +
                                      " with " + describe(src) + " loses data"});
            continue;
          }
          writes.push_back({t.dst, c, src});
        }
      }
    }
  }
  for (PendingWrite& w : writes) state.at(w.rank, w.chunk) = std::move(w.value);
}

}  // namespace

ClusterState::ClusterState(int n, int num_chunks)
    : n_(n),
      num_chunks_(num_chunks),
      cells_(static_cast<std::size_t>(std::max(n, 0)) *
                 static_cast<std::size_t>(std::max(num_chunks, 0)),
             ContributorSet(static_cast<std::size_t>(std::max(n, 0)))) {}

bool ClusterState::complete() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](const ContributorSet& s) { return s.all(); });
}

std::vector<Rank> ClusterState::contributors(Rank rank, Chunk chunk) const {
  std::vector<Rank> out;
  const ContributorSet& set = at(rank, chunk);
  for (auto i = set.find_first(); i != ContributorSet::npos; i = set.find_next(i)) {
    out.push_back(static_cast<Rank>(i));
  }
  return out;
}

ClusterState initial_state_stragglar(int n, Rank straggler) {
  require_size(n);
  if (straggler != n - 1) {
    throw InvalidSizeError("the straggler must be rank n-1; relabel ranks first");
  }
  ClusterState state(n, n - 1);
  for (Rank g = 0; g < n; ++g) {
    for (Chunk c = 0; c < n - 1; ++c) {
      ContributorSet& cell = state.at(g, c);
      if (g == c) {
        cell.set();
        cell.reset(static_cast<std::size_t>(straggler));
      } else {
        cell.set(static_cast<std::size_t>(g));
      }
    }
  }
  return state;
}

ClusterState initial_state_uniform(int n, int num_chunks) {
  require_size(n);
  if (num_chunks < 1) throw InvalidSizeError("num_chunks must be positive");
  ClusterState state(n, num_chunks);
  for (Rank g = 0; g < n; ++g) {
    for (Chunk c = 0; c < num_chunks; ++c) state.at(g, c).set(static_cast<std::size_t>(g));
  }
  return state;
}

ClusterState initial_state_broadcast(int n, Rank straggler) {
  require_size(n);
  if (straggler < 0 || straggler >= n) throw InvalidSizeError("straggler out of range");
  ClusterState state(n, 1);
  for (Rank g = 0; g < n; ++g) {
    ContributorSet& cell = state.at(g, 0);
    if (g == straggler) {
      cell.set(static_cast<std::size_t>(g));
    } else {
      cell.set();
      cell.reset(static_cast<std::size_t>(straggler));
    }
  }
  return state;
}

ClusterState initial_state_for(const Schedule& schedule) {
  switch (schedule.algorithm) {
    case Algorithm::StragglAR:
      return initial_state_stragglar(schedule.n, schedule.straggler);
    case Algorithm::Broadcast:
      return initial_state_broadcast(schedule.n, schedule.straggler);
    case Algorithm::Ring:
    case Algorithm::RHD:
      return initial_state_uniform(schedule.n, schedule.num_chunks);
  }
  throw Error("unknown algorithm");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Structure: return "structure";
    case ViolationKind::PortViolation: return "port-violation";
    case ViolationKind::DoubleCount: return "double-count";
    case ViolationKind::Regression: return "regression";
    case ViolationKind::PhantomSend: return "phantom-send";
    case ViolationKind::Postcondition: return "postcondition";
  }
  return "unknown";
}

PortModel port_model_for(Algorithm algo) {
  return algo == Algorithm::Ring ? PortModel::Duplex : PortModel::Matching;
}

ClusterState apply_round(const ClusterState& state, const Round& round, PortModel ports) {
  ClusterState next = state;
  std::vector<Violation> violations;
  replay_round(next, round, ports, 0, violations);
  if (!violations.empty()) {
    throw RoundViolation(violations.front().kind, violations.front().description);
  }
  return next;
}

Rational beta_coefficient(const Schedule& schedule) {
  if (schedule.num_chunks < 1) return Rational(0);
  std::int64_t total = 0;
  for (const Round& round : schedule.rounds) {
    std::size_t widest = 0;
    for (const Matching& m : round.matchings) {
      for (const Transfer& t : m.transfers) widest = std::max(widest, t.chunks.size());
    }
    total += static_cast<std::int64_t>(widest);
  }
  return Rational(total, schedule.num_chunks);
}

VerificationReport verify_schedule(const Schedule& schedule) {
  VerificationReport report;
  for (const std::string& problem : structural_problems(schedule)) {
    report.violations.push_back({0, ViolationKind::Structure, problem});
  }
  // Without a usable size or straggler there is no initial state to replay.
  if (schedule.n < 2 || schedule.num_chunks < 1 || schedule.straggler < 0 ||
      schedule.straggler >= schedule.n) {
    return report;
  }

  ClusterState state = [&]() -> ClusterState {
    try {
      return initial_state_for(schedule);
    } catch (const Error& e) {
      report.violations.push_back({0, ViolationKind::Structure, e.what()});
      return ClusterState(0, 0);
    }
  }();
  if (state.n() == 0) return report;
  if (schedule.algorithm == Algorithm::StragglAR && schedule.num_chunks != schedule.n - 1) {
    report.violations.push_back(
        {0, ViolationKind::Structure, "stragglar schedules use n-1 chunks"});
    return report;
  }

  const PortModel ports = port_model_for(schedule.algorithm);
  for (std::size_t r = 0; r < schedule.rounds.size(); ++r) {
    replay_round(state, schedule.rounds[r], ports, r, report.violations);
    ++report.rounds_executed;
  }

  for (Chunk c = 0; c < state.num_chunks(); ++c) {
    std::vector<Rank> missing;
    for (Rank g = 0; g < state.n(); ++g) {
      if (!state.fully_reduced(g, c)) missing.push_back(g);
    }
    if (missing.empty()) continue;
    std::ostringstream os;
    os << "chunk " << c << " not fully reduced on ranks [";
    for (std::size_t i = 0; i < missing.size(); ++i) os << (i ? "," : "") << missing[i];
    os << ']';
    report.violations.push_back({report.rounds_executed, ViolationKind::Postcondition, os.str()});
  }

  report.beta_coefficient = beta_coefficient(schedule);
  report.valid = report.violations.empty();
  return report;
}

}  // namespace stragglar

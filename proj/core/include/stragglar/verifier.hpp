#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <boost/rational.hpp>

#include "stragglar/error.hpp"
#include "stragglar/schedule.hpp"

namespace stragglar {

using ContributorSet = boost::dynamic_bitset<std::uint64_t>;
using Rational = boost::rational<std::int64_t>;

// Symbolic model of a buffer spread over n ranks: for every (rank, chunk)
// cell, the set of ranks whose input has been summed into that rank's copy
// of the chunk. A cell equal to {0..n-1} is fully reduced.
class ClusterState {
 public:
  ClusterState(int n, int num_chunks);

  int n() const { return n_; }
  int num_chunks() const { return num_chunks_; }

  const ContributorSet& at(Rank rank, Chunk chunk) const {
    return cells_[index(rank, chunk)];
  }
  ContributorSet& at(Rank rank, Chunk chunk) { return cells_[index(rank, chunk)]; }

  bool fully_reduced(Rank rank, Chunk chunk) const { return at(rank, chunk).all(); }
  // True when every rank holds every chunk fully reduced.
  bool complete() const;
  // Sorted member list of one cell; handy in tests and diagnostics.
  std::vector<Rank> contributors(Rank rank, Chunk chunk) const;

  friend bool operator==(const ClusterState&, const ClusterState&) = default;

 private:
  std::size_t index(Rank rank, Chunk chunk) const {
    return static_cast<std::size_t>(rank) * static_cast<std::size_t>(num_chunks_) +
           static_cast<std::size_t>(chunk);
  }

  int n_;
  int num_chunks_;
  std::vector<ContributorSet> cells_;
};

// Non-stragglers have finished a reduce-scatter among themselves: rank g < n-1
// holds chunk g with contributors {0..n-2}; every other cell holds only its
// own rank. num_chunks = n - 1. The straggler must be rank n - 1.
ClusterState initial_state_stragglar(int n, Rank straggler);
// Nothing reduced yet: every cell holds only its own rank.
ClusterState initial_state_uniform(int n, int num_chunks);
// One whole-buffer chunk already all-reduced among the non-stragglers; the
// straggler holds only its own data.
ClusterState initial_state_broadcast(int n, Rank straggler);
// Starting state matching schedule.algorithm.
ClusterState initial_state_for(const Schedule& schedule);

enum class ViolationKind {
  Structure,      // malformed schedule (out-of-range rank, bad transfer...)
  PortViolation,  // a rank appears in two matchings of one round
  DoubleCount,    // Reduce merging overlapping contributor sets
  Regression,     // Replace with a sender set that does not cover the receiver's
  PhantomSend,    // sender holds nothing for the chunk
  Postcondition,  // replay finished without every cell fully reduced
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::size_t round = 0;
  ViolationKind kind = ViolationKind::Structure;
  std::string description;
};

// Port rule enforced per round.
enum class PortModel {
  Matching,  // every rank sits in at most one matching
  Duplex,    // every rank sends at most one and receives at most one transfer
};

// Ring passes data around a cycle (each rank receives from one neighbour
// while sending to the other), which only fits the duplex rule. Every other
// algorithm is checked against the matching rule.
PortModel port_model_for(Algorithm algo);

// Thrown by apply_round on the first semantic violation it meets.
class RoundViolation : public Error {
 public:
  RoundViolation(ViolationKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  ViolationKind kind() const { return kind_; }

 private:
  ViolationKind kind_;
};

// Executes every transfer of `round` against a snapshot of `state` (all
// transfers in a round are simultaneous). Throws RoundViolation.
ClusterState apply_round(const ClusterState& state, const Round& round,
                         PortModel ports = PortModel::Matching);

struct VerificationReport {
  bool valid = false;
  std::size_t rounds_executed = 0;
  std::vector<Violation> violations;
  // Sum over rounds of the largest chunk count on any single transfer,
  // divided by num_chunks: the bandwidth term in units of s * beta.
  Rational beta_coefficient{0};
};

// Replays the schedule from its algorithm's initial state. Semantic problems
// are collected, never thrown; the replay continues past them.
VerificationReport verify_schedule(const Schedule& schedule);

// The bandwidth coefficient on its own, without replaying.
Rational beta_coefficient(const Schedule& schedule);

}  // namespace stragglar

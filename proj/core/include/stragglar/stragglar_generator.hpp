#pragma once

#include <map>
#include <set>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "stragglar/schedule.hpp"

namespace stragglar {

// Active chunk -> non-straggler ranks holding it. A chunk is active from the
// round it is fully reduced until every rank holds it.
using ActiveChunkMap = std::map<Chunk, std::set<Rank>>;

struct RoundPartition {
  int round = 0;
  // Available holders only: rank r, paired with the straggler, is left out.
  std::vector<Rank> p;  // holders of the oldest active chunk
  std::vector<Rank> q;  // holders of the other active chunks
};

// Snapshot taken immediately before a round is generated.
struct RoundTrace {
  int round = 0;
  ActiveChunkMap active;
  RoundPartition partition;  // empty outside the doubling phase
};

// Builds the straggler-aware schedule for n = 2^k ranks with rank n-1 as the
// straggler. Each round r < n-1 pairs rank r with the straggler to finish
// chunk r. The first log n rounds hand every non-straggler a fully reduced
// chunk; afterwards every active chunk doubles its holders each round, with
// ranks about to meet the straggler matched first so that they only take
// chunks that expire before their turn. Total: n + log n - 2 rounds.
//
// Every step checks the counting invariants that make the round bound hold
// and throws InvariantViolation if one breaks.
class StragglarGenerator {
 public:
  // Throws UnsupportedSizeError unless n is a power of two >= 2.
  explicit StragglarGenerator(int n);

  int n() const { return n_; }
  int log_n() const { return log_n_; }
  Rank straggler() const { return n_ - 1; }
  int total_rounds() const { return n_ + log_n_ - 2; }
  int next_round() const { return round_; }
  bool done() const { return round_ >= total_rounds(); }

  const ActiveChunkMap& active() const { return active_; }
  // Chunk `chunk` is held fully reduced by `rank`.
  bool holds(Rank rank, Chunk chunk) const;

  // Matchings for the next round when it belongs to the first phase
  // (0 < r < log n); includes the straggler pairing.
  std::vector<Matching> phase1_matchings() const;
  // Matchings for the next round when r >= log n; includes the straggler
  // pairing while r < n-1.
  std::vector<Matching> phase2_matchings() const;
  // P_r / Q_r for the next round (empty sets during the first phase).
  RoundPartition partition() const;

  // Generates the next round, applies it, checks invariants, returns it.
  Round step();

  Schedule run();

 private:
  std::vector<Matching> straggler_pairing() const;
  void check_before_round() const;
  void check_after_round(const ActiveChunkMap& before) const;
  void apply(const Round& round);
  Chunk active_chunk_of(Rank rank) const;
  // Holder count used for the doubling check; counts the straggler for the
  // last chunk once it starts forwarding it.
  std::size_t spread(Chunk chunk, const ActiveChunkMap& map) const;
  // Same count taken from what ranks actually hold after a round.
  std::size_t holder_count(Chunk chunk) const;

  int n_;
  int log_n_;
  int round_ = 0;
  std::vector<boost::dynamic_bitset<>> full_;  // per rank, per chunk
  ActiveChunkMap active_;
};

// Throws UnsupportedSizeError for anything but a power of two >= 2; even
// sizes that are not powers of two go through generate_stragglar_even.
Schedule generate_stragglar(int n);

struct StragglarGeneration {
  Schedule schedule;
  std::vector<RoundTrace> trace;
};

StragglarGeneration generate_stragglar_traced(int n);

}  // namespace stragglar

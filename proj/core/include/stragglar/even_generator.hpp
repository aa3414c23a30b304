#pragma once

#include <cstdint>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "stragglar/schedule.hpp"
#include "stragglar/weighted_matching.hpp"

namespace stragglar {

// How a free pair is chosen and what it forwards.
//   Default: every maximum-weight matching is acceptable; each rank forwards
//     the oldest chunk its partner lacks.
//   Tuned: among maximum-weight matchings prefer those that feed ranks outside
//     the next log n straggler turns, and forward the chunk with the fewest
//     holders. Same need weights, markedly fewer rounds.
enum class EvenPolicy { Default, Tuned };

// Straggler-aware schedules for even n that are not powers of two. The
// straggler pairing (round r < n-1 finishes chunk r with rank r) is kept; the
// rest of every round is a maximum-weight matching on the need graph of the
// ranks that are free. Only fully reduced chunks ever move, and each matched
// rank forwards the oldest chunk its partner lacks. No round bound is proven;
// generation stops as soon as every rank holds every chunk.
class EvenStragglarGenerator {
 public:
  // Throws UnsupportedSizeError for odd n, n < 4, or powers of two.
  explicit EvenStragglarGenerator(int n, EvenPolicy policy = EvenPolicy::Default);

  int n() const { return n_; }
  Rank straggler() const { return n_ - 1; }
  int next_round() const { return round_; }
  bool done() const;
  // Hard stop: a generator still running after this many rounds is broken.
  int round_limit() const { return 4 * n_; }

  bool holds(Rank rank, Chunk chunk) const;

  // Need graph of the next round, over the ranks not busy with the straggler.
  NeedGraph need_graph() const;

  Round step();
  Schedule run();

 private:
  // The chunk `from` forwards to `to` under the policy, or -1.
  Chunk chunk_to_send(Rank from, Rank to) const;
  std::size_t holder_count(Chunk chunk) const;
  // Tie-break bonus for one transfer under the tuned policy.
  std::int64_t preference(Rank dst, Chunk chunk) const;
  MatchingSolution match(const NeedGraph& graph) const;

  int n_;
  EvenPolicy policy_;
  int window_;
  int round_ = 0;
  std::vector<boost::dynamic_bitset<>> full_;
  std::vector<std::size_t> holders_;  // per chunk
};

Schedule generate_stragglar_even(int n, EvenPolicy policy = EvenPolicy::Default);

}  // namespace stragglar

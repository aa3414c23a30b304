#pragma once

#include "stragglar/schedule.hpp"

namespace stragglar {

// Ring all-reduce over n chunks: n-1 reduce-scatter rounds in which rank i
// passes chunk (i - r) mod n to rank i+1, then n-1 allgather rounds.
Schedule generate_ring(int n);

// Recursive halving / doubling over n = 2^k chunks. Round k of the halving
// phase pairs ranks differing in bit k and swaps half of the current window;
// the doubling phase replays the pairs in reverse with Replace transfers.
Schedule generate_rhd(int n);

// Straggler-aware broadcast baseline: the non-stragglers have already
// all-reduced one whole-buffer chunk. Round 0 merges it with the straggler's
// via rank 0; every later round doubles the set of holders.
Schedule generate_broadcast(int n, Rank straggler);

}  // namespace stragglar

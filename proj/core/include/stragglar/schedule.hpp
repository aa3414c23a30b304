#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stragglar {

using Rank = std::int32_t;
using Chunk = std::int32_t;

enum class Algorithm { StragglAR, Ring, RHD, Broadcast };

std::string_view to_string(Algorithm algo);
// Accepts the lowercase names used on the command line and in schedule files
// ("stragglar", "ring", "rhd", "broadcast"). Case-insensitive.
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Reduce: the receiver accumulates the sender's contributions into its own
// copy. Replace: the receiver overwrites its copy with the sender's.
enum class TransferKind { Reduce, Replace };

std::string_view to_string(TransferKind kind);
std::optional<TransferKind> parse_transfer_kind(std::string_view name);

struct Transfer {
  Rank src = 0;
  Rank dst = 0;
  std::vector<Chunk> chunks;
  TransferKind kind = TransferKind::Replace;

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

// Two ranks talking to each other in one round. A matching carries at most
// one transfer per direction; an exchange is two transfers, a send is one.
struct Matching {
  Rank first = 0;
  Rank second = 0;
  std::vector<Transfer> transfers;

  bool involves(Rank r) const { return r == first || r == second; }

  friend bool operator==(const Matching&, const Matching&) = default;
};

struct Round {
  std::vector<Matching> matchings;

  friend bool operator==(const Round&, const Round&) = default;
};

struct Schedule {
  Algorithm algorithm = Algorithm::StragglAR;
  int n = 0;
  Rank straggler = 0;
  int num_chunks = 0;
  std::vector<Round> rounds;

  std::size_t num_rounds() const { return rounds.size(); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Convenience builders used by the generators.
Matching make_exchange(Rank a, Chunk a_sends, Rank b, Chunk b_sends,
                       TransferKind kind);
Matching make_send(Rank src, Rank dst, Chunk chunk, TransferKind kind);
Matching make_send(Rank src, Rank dst, std::vector<Chunk> chunks,
                   TransferKind kind);

// Shape checks that do not need to replay the schedule: ranks and chunks in
// range, src != dst, transfers confined to their pair, at most one transfer
// per direction, non-empty chunk lists. Returns one message per problem.
std::vector<std::string> structural_problems(const Schedule& schedule);

bool is_power_of_two(int n);
// floor(log2(n)) for n >= 1.
int log2_floor(int n);

}  // namespace stragglar

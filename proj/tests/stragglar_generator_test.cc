#include "stragglar/stragglar_generator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "numeric_oracle.hpp"
#include "stragglar/error.hpp"
#include "stragglar/verifier.hpp"

namespace stragglar {
namespace {

constexpr int kSizes[] = {2, 4, 8, 16, 32, 64, 128, 256};

// Replays the schedule with the verifier's state model and records, before
// every round, which ranks hold each chunk fully reduced. Nothing here reads
// the generator's own bookkeeping.
struct Replay {
  // holders[r][c]: ranks holding chunk c fully reduced immediately before round r.
  std::vector<std::vector<std::set<Rank>>> holders;

  explicit Replay(const Schedule& s) {
    ClusterState state = initial_state_for(s);
    for (std::size_t r = 0; r <= s.rounds.size(); ++r) {
      std::vector<std::set<Rank>> snapshot(static_cast<std::size_t>(s.num_chunks));
      for (Rank g = 0; g < s.n; ++g)
        for (Chunk c = 0; c < s.num_chunks; ++c)
          if (state.fully_reduced(g, c)) snapshot[static_cast<std::size_t>(c)].insert(g);
      holders.push_back(std::move(snapshot));
      if (r < s.rounds.size()) state = apply_round(state, s.rounds[r]);
    }
  }

  // Active chunks before round r: fully reduced somewhere, not yet everywhere.
  // Values are the non-straggler holders.
  std::map<Chunk, std::set<Rank>> active(std::size_t r, int n) const {
    std::map<Chunk, std::set<Rank>> out;
    for (Chunk c = 0; c < static_cast<Chunk>(holders[r].size()); ++c) {
      const auto& h = holders[r][static_cast<std::size_t>(c)];
      if (h.empty() || static_cast<int>(h.size()) == n) continue;
      std::set<Rank> non_straggler = h;
      non_straggler.erase(n - 1);
      out[c] = non_straggler;
    }
    return out;
  }
};

std::set<std::pair<Rank, Rank>> pairs_of(const Round& round) {
  std::set<std::pair<Rank, Rank>> out;
  for (const auto& m : round.matchings) out.insert({std::min(m.first, m.second), std::max(m.first, m.second)});
  return out;
}

const Matching* find_pair(const Round& round, Rank a, Rank b) {
  for (const auto& m : round.matchings)
    if (m.involves(a) && m.involves(b)) return &m;
  return nullptr;
}

std::vector<Chunk> sent(const Matching& m, Rank src) {
  for (const auto& t : m.transfers)
    if (t.src == src) return t.chunks;
  return {};
}

TEST(StragglarGenerator, RejectsUnsupportedSizes) {
  for (int n : {0, 1, 3, 6, 7, 12, 100}) EXPECT_THROW(generate_stragglar(n), UnsupportedSizeError) << n;
}

TEST(StragglarGenerator, RoundCountAndValidity) {
  for (int n : kSizes) {
    const Schedule s = generate_stragglar(n);
    const int log_n = log2_floor(n);
    EXPECT_EQ(s.num_rounds(), static_cast<std::size_t>(n + log_n - 2)) << n;
    EXPECT_EQ(s.num_chunks, n - 1);
    EXPECT_EQ(s.straggler, n - 1);
    const auto report = verify_schedule(s);
    EXPECT_TRUE(report.valid) << n;
    EXPECT_EQ(report.beta_coefficient, Rational(n + log_n - 2, n - 1)) << n;
  }
}

TEST(StragglarGenerator, NumericOracleAgrees) {
  for (int n : {2, 4, 8, 16, 32}) EXPECT_TRUE(testing::numeric_allreduce_ok(generate_stragglar(n))) << n;
}

TEST(StragglarGenerator, TwoRanksIsOneExchange) {
  const Schedule s = generate_stragglar(2);
  ASSERT_EQ(s.num_rounds(), 1u);
  ASSERT_EQ(s.rounds[0].matchings.size(), 1u);
  EXPECT_EQ(s.rounds[0].matchings[0], make_exchange(0, 0, 1, 0, TransferKind::Reduce));
}

TEST(StragglarGenerator, HandTraceN4) {
  const Schedule s = generate_stragglar(4);
  ASSERT_EQ(s.num_rounds(), 4u);
  EXPECT_EQ(pairs_of(s.rounds[0]), (std::set<std::pair<Rank, Rank>>{{0, 3}}));

  EXPECT_EQ(pairs_of(s.rounds[1]), (std::set<std::pair<Rank, Rank>>{{1, 3}, {0, 2}}));
  EXPECT_EQ(sent(*find_pair(s.rounds[1], 0, 2), 0), std::vector<Chunk>{0});
  EXPECT_TRUE(sent(*find_pair(s.rounds[1], 0, 2), 2).empty());

  EXPECT_EQ(pairs_of(s.rounds[2]), (std::set<std::pair<Rank, Rank>>{{2, 3}, {0, 1}}));
  EXPECT_EQ(sent(*find_pair(s.rounds[2], 0, 1), 0), std::vector<Chunk>{0});
  EXPECT_EQ(sent(*find_pair(s.rounds[2], 0, 1), 1), std::vector<Chunk>{1});

  // Last round: the straggler forwards c2 to one of ranks 0 and 1; rank 2
  // trades c2 for c1 with the other. Either assignment is valid.
  const auto& last = s.rounds[3];
  ASSERT_EQ(last.matchings.size(), 2u);
  Rank served = -1;
  for (const auto& m : last.matchings)
    if (m.involves(3)) served = m.first == 3 ? m.second : m.first;
  ASSERT_TRUE(served == 0 || served == 1);
  EXPECT_EQ(sent(*find_pair(last, 3, served), 3), std::vector<Chunk>{2});
  EXPECT_TRUE(sent(*find_pair(last, 3, served), served).empty());
  const Matching* other = find_pair(last, 1 - served, 2);
  ASSERT_NE(other, nullptr);
  EXPECT_EQ(sent(*other, 1 - served), std::vector<Chunk>{1});
  EXPECT_EQ(sent(*other, 2), std::vector<Chunk>{2});
}

TEST(StragglarGenerator, HandTraceN8RoundOne) {
  const Schedule s = generate_stragglar(8);
  EXPECT_EQ(pairs_of(s.rounds[1]), (std::set<std::pair<Rank, Rank>>{{1, 7}, {0, 3}}));
  EXPECT_EQ(sent(*find_pair(s.rounds[1], 0, 3), 0), std::vector<Chunk>{0});
}

TEST(StragglarGenerator, N8RoundFourKeepsRanksThreeAndFiveApart) {
  const Schedule s = generate_stragglar(8);
  EXPECT_EQ(find_pair(s.rounds[4], 3, 5), nullptr);
}

TEST(StragglarGenerator, StragglerPairingEveryRound) {
  for (int n : kSizes) {
    const Schedule s = generate_stragglar(n);
    for (int r = 0; r < n - 1; ++r) {
      const Matching* m = find_pair(s.rounds[static_cast<std::size_t>(r)], r, n - 1);
      ASSERT_NE(m, nullptr) << "n=" << n << " r=" << r;
      EXPECT_EQ(*m, make_exchange(r, r, n - 1, r, TransferKind::Reduce));
    }
    // Afterwards the straggler only ever forwards the last chunk.
    for (std::size_t r = static_cast<std::size_t>(n - 1); r < s.num_rounds(); ++r) {
      for (const auto& m : s.rounds[r].matchings) {
        for (const auto& t : m.transfers) {
          if (t.src == n - 1) EXPECT_EQ(t.chunks, std::vector<Chunk>{n - 2});
        }
      }
    }
  }
}

TEST(StragglarGenerator, BaseCaseBeforeRoundLogN) {
  for (int n : kSizes) {
    if (n < 4) continue;
    const int log_n = log2_floor(n);
    const Replay replay(generate_stragglar(n));
    const auto active = replay.active(static_cast<std::size_t>(log_n), n);
    ASSERT_EQ(static_cast<int>(active.size()), log_n) << n;
    std::map<Rank, int> per_rank;
    for (const auto& [c, holders] : active) {
      EXPECT_EQ(holders.size(), std::size_t{1} << (log_n - 1 - c)) << "n=" << n << " c=" << c;
      for (Rank g : holders) ++per_rank[g];
    }
    EXPECT_EQ(static_cast<int>(per_rank.size()), n - 1);
    for (const auto& [g, count] : per_rank) EXPECT_EQ(count, 1) << "rank " << g;
  }
}

TEST(StragglarGenerator, InvariantBeforeEveryDoublingRound) {
  for (int n : kSizes) {
    if (n < 4) continue;
    const int log_n = log2_floor(n);
    const Replay replay(generate_stragglar(n));
    for (int r = log_n; r <= n - 2; ++r) {
      const auto active = replay.active(static_cast<std::size_t>(r), n);
      ASSERT_EQ(static_cast<int>(active.size()), log_n) << "n=" << n << " r=" << r;
      std::set<Rank> seen;
      std::size_t total = 0;
      for (int j = r - log_n; j < r; ++j) {
        ASSERT_TRUE(active.count(j)) << "n=" << n << " r=" << r << " chunk " << j;
        const auto& holders = active.at(j);
        EXPECT_EQ(holders.size(), std::size_t{1} << (r - j - 1)) << "n=" << n << " r=" << r << " j=" << j;
        seen.insert(holders.begin(), holders.end());
        total += holders.size();
      }
      EXPECT_EQ(seen.size(), total) << "holder sets overlap, n=" << n << " r=" << r;
      const auto& p = active.at(r - log_n);
      EXPECT_EQ(static_cast<int>(p.size()), n / 2);
      EXPECT_TRUE(p.count(r)) << "rank r outside P, n=" << n << " r=" << r;
      EXPECT_EQ(static_cast<int>(total - p.size()), n / 2 - 1);
    }
  }
}

TEST(StragglarGenerator, ChunksArriveByTheirDeadline) {
  for (int n : kSizes) {
    const int log_n = log2_floor(n);
    const Schedule s = generate_stragglar(n);
    const Replay replay(s);
    for (Chunk j = 0; j < n - 1; ++j) {
      // Fully reduced in round j: present before round j+1, absent before round j.
      EXPECT_TRUE(replay.holders[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)].empty());
      EXPECT_EQ(replay.holders[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(j)],
                (std::set<Rank>{j, n - 1}));
      const int deadline = j < n - 2 ? j + log_n : n - 2 + log_n - 1;
      const auto& after = replay.holders[static_cast<std::size_t>(deadline + 1)][static_cast<std::size_t>(j)];
      EXPECT_EQ(static_cast<int>(after.size()), n) << "n=" << n << " chunk " << j;
      if (j < n - 2 || n == 2) continue;
      // The final chunk needs every one of its log n - 1 extra rounds.
      const auto& before = replay.holders[static_cast<std::size_t>(deadline)][static_cast<std::size_t>(j)];
      EXPECT_LT(static_cast<int>(before.size()), n);
    }
  }
}

TEST(StragglarGenerator, StragglerCompleteAfterItsLastPairing) {
  for (int n : kSizes) {
    const Replay replay(generate_stragglar(n));
    for (Chunk c = 0; c < n - 1; ++c) {
      EXPECT_TRUE(replay.holders[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(c)].count(n - 1));
    }
  }
}

TEST(StragglarGenerator, ActiveChunksDoubleEachRound) {
  for (int n : kSizes) {
    if (n < 4) continue;
    const int log_n = log2_floor(n);
    const Replay replay(generate_stragglar(n));
    for (int r = log_n; r < n + log_n - 2; ++r) {
      const auto before = replay.active(static_cast<std::size_t>(r), n);
      const auto& after = replay.holders[static_cast<std::size_t>(r + 1)];
      for (const auto& [c, holders] : before) {
        std::size_t was = holders.size();
        std::size_t now = after[static_cast<std::size_t>(c)].size();
        if (static_cast<int>(now) == n) continue;  // expired this round
        // Count the straggler for the last chunk once it starts forwarding.
        if (c == n - 2 && r >= n - 1) {
          ++was;
        } else {
          now -= after[static_cast<std::size_t>(c)].count(n - 1);
        }
        EXPECT_EQ(now, 2 * was) << "n=" << n << " r=" << r << " chunk " << c;
      }
    }
  }
}

TEST(StragglarGenerator, CriticalWindowOnlyTakesExpiringChunks) {
  for (int n : {8, 16, 32, 64}) {
    const int log_n = log2_floor(n);
    const Schedule s = generate_stragglar(n);
    for (int r = log_n; r < n - 1; ++r) {
      for (const auto& m : s.rounds[static_cast<std::size_t>(r)].matchings) {
        for (const auto& t : m.transfers) {
          if (t.dst <= r || t.dst > r + log_n || t.dst >= n - 1) continue;
          for (Chunk c : t.chunks) EXPECT_LE(c, t.dst - log_n) << "n=" << n << " r=" << r;
        }
      }
    }
  }
}

TEST(StragglarGenerator, TraceMatchesReplay) {
  for (int n : {4, 8, 16, 32}) {
    const auto gen = generate_stragglar_traced(n);
    const Replay replay(gen.schedule);
    ASSERT_EQ(gen.trace.size(), gen.schedule.num_rounds());
    const int log_n = log2_floor(n);
    for (const RoundTrace& t : gen.trace) {
      const auto active = replay.active(static_cast<std::size_t>(t.round), n);
      ASSERT_EQ(t.active.size(), active.size()) << "n=" << n << " r=" << t.round;
      for (const auto& [c, holders] : active) {
        ASSERT_TRUE(t.active.count(c));
        EXPECT_EQ(t.active.at(c), holders) << "n=" << n << " r=" << t.round << " c=" << c;
      }
      if (t.round >= log_n && t.round <= n - 2) {
        // Rank r holds the oldest chunk but is busy with the straggler.
        EXPECT_EQ(static_cast<int>(t.partition.p.size()), n / 2 - 1);
        EXPECT_EQ(static_cast<int>(t.partition.q.size()), n / 2 - 1);
        EXPECT_FALSE(std::count(t.partition.p.begin(), t.partition.p.end(), t.round));
      }
    }
  }
}

TEST(StragglarGenerator, StepwiseApiMatchesRun) {
  StragglarGenerator gen(16);
  std::vector<Round> rounds;
  while (!gen.done()) rounds.push_back(gen.step());
  EXPECT_EQ(rounds, generate_stragglar(16).rounds);
  EXPECT_EQ(gen.next_round(), gen.total_rounds());
}

TEST(StragglarGenerator, N256WithinTimeBudget) {
  const auto start = std::chrono::steady_clock::now();
  const Schedule s = generate_stragglar(256);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(s.num_rounds(), 262u);
  EXPECT_LT(seconds, 5.0);
}

}  // namespace
}  // namespace stragglar

#include "stragglar/even_generator.hpp"

#include <algorithm>

#include "stragglar/error.hpp"

namespace stragglar {

EvenStragglarGenerator::EvenStragglarGenerator(int n, EvenPolicy policy)
    : n_(n), policy_(policy), window_(log2_floor(n) + 1) {
  if (n < 4 || n % 2 != 0 || is_power_of_two(n)) {
    throw UnsupportedSizeError(
        "even stragglar generator: n = " + std::to_string(n) +
        " must be even, at least 4 and not a power of two (powers of two use the "
        "closed-form generator; odd sizes are unsupported)");
  }
  full_.assign(static_cast<std::size_t>(n), boost::dynamic_bitset<>(static_cast<std::size_t>(n - 1)));
  holders_.assign(static_cast<std::size_t>(n - 1), 0);
}

bool EvenStragglarGenerator::holds(Rank rank, Chunk chunk) const {
  return full_[static_cast<std::size_t>(rank)].test(static_cast<std::size_t>(chunk));
}

bool EvenStragglarGenerator::done() const {
  return std::all_of(full_.begin(), full_.end(), [](const auto& held) { return held.all(); });
}

std::size_t EvenStragglarGenerator::holder_count(Chunk chunk) const {
  return holders_[static_cast<std::size_t>(chunk)];
}

Chunk EvenStragglarGenerator::chunk_to_send(Rank from, Rank to) const {
  const auto& src = full_[static_cast<std::size_t>(from)];
  const auto& dst = full_[static_cast<std::size_t>(to)];
  if (from == straggler()) {
    // The straggler only forwards the last chunk.
    const Chunk last = n_ - 2;
    return (round_ > n_ - 2 && !dst.test(static_cast<std::size_t>(last))) ? last : -1;
  }
  const auto offer = src - dst;
  constexpr auto npos = boost::dynamic_bitset<>::npos;
  auto best = offer.find_first();
  if (best == npos || policy_ == EvenPolicy::Default) {
    return best == npos ? -1 : static_cast<Chunk>(best);
  }
  std::size_t best_count = holder_count(static_cast<Chunk>(best));
  for (auto c = offer.find_next(best); c != npos; c = offer.find_next(c)) {
    const std::size_t count = holder_count(static_cast<Chunk>(c));
    if (count < best_count) {
      best = c;
      best_count = count;
    }
  }
  return static_cast<Chunk>(best);
}

std::int64_t EvenStragglarGenerator::preference(Rank dst, Chunk chunk) const {
  const bool soon_busy = dst != straggler() && dst > round_ && dst <= round_ + window_;
  const std::int64_t n = n_;
  return (soon_busy ? 0 : n * n) + (n - static_cast<std::int64_t>(holder_count(chunk)));
}

MatchingSolution EvenStragglarGenerator::match(const NeedGraph& graph) const {
  if (policy_ == EvenPolicy::Default) return graph.solve();
  // Scale the need weights so that no amount of bonus can outweigh one unit
  // of need: the result is still a maximum-weight matching of `graph`.
  const std::int64_t n = n_;
  const std::int64_t per_edge = 2 * (n * n + n);
  const std::int64_t scale = per_edge * (n / 2 + 1) + 1;
  NeedGraph scaled = graph;
  for (WeightedEdge& e : scaled.edges) {
    std::int64_t bonus = 0;
    if (const Chunk c = chunk_to_send(e.u, e.v); c >= 0) bonus += preference(e.v, c);
    if (const Chunk c = chunk_to_send(e.v, e.u); c >= 0) bonus += preference(e.u, c);
    e.weight = e.weight * scale + bonus;
  }
  MatchingSolution solution = scaled.solve();
  solution.total_weight = 0;
  for (WeightedEdge& e : solution.edges) {
    e.weight /= scale;
    solution.total_weight += e.weight;
  }
  return solution;
}

NeedGraph EvenStragglarGenerator::need_graph() const {
  NeedGraph graph;
  for (Rank g = 0; g < n_; ++g) {
    const bool busy = round_ < n_ - 1 && (g == round_ || g == straggler());
    if (!busy) graph.vertices.push_back(g);
  }
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.vertices.size(); ++j) {
      const Rank a = graph.vertices[i];
      const Rank b = graph.vertices[j];
      const bool a_helps = chunk_to_send(a, b) >= 0;
      const bool b_helps = chunk_to_send(b, a) >= 0;
      if (a_helps && b_helps) {
        graph.edges.push_back({a, b, kMutualNeed});
      } else if (a_helps || b_helps) {
        graph.edges.push_back({a, b, kOneWayNeed});
      }
    }
  }
  return graph;
}

Round EvenStragglarGenerator::step() {
  if (done()) throw Error("even stragglar generator already finished");
  if (round_ >= round_limit()) {
    throw InvariantViolation("even stragglar generator exceeded " +
                             std::to_string(round_limit()) + " rounds for n = " +
                             std::to_string(n_));
  }
  Round round;
  if (round_ < n_ - 1) {
    round.matchings.push_back(
        make_exchange(round_, round_, straggler(), round_, TransferKind::Reduce));
  }
  const MatchingSolution solution = match(need_graph());
  for (const WeightedEdge& e : solution.edges) {
    const Chunk a_sends = chunk_to_send(e.u, e.v);
    const Chunk b_sends = chunk_to_send(e.v, e.u);
    Matching m{e.u, e.v, {}};
    if (a_sends >= 0) m.transfers.push_back({e.u, e.v, {a_sends}, TransferKind::Replace});
    if (b_sends >= 0) m.transfers.push_back({e.v, e.u, {b_sends}, TransferKind::Replace});
    round.matchings.push_back(std::move(m));
  }

  for (const Matching& m : round.matchings) {
    for (const Transfer& t : m.transfers) {
      for (Chunk c : t.chunks) {
        auto& held = full_[static_cast<std::size_t>(t.dst)];
        if (!held.test(static_cast<std::size_t>(c))) {
          held.set(static_cast<std::size_t>(c));
          ++holders_[static_cast<std::size_t>(c)];
        }
      }
    }
  }
  ++round_;
  return round;
}

Schedule EvenStragglarGenerator::run() {
  Schedule schedule;
  schedule.algorithm = Algorithm::StragglAR;
  schedule.n = n_;
  schedule.straggler = straggler();
  schedule.num_chunks = n_ - 1;
  while (!done()) schedule.rounds.push_back(step());
  return schedule;
}

Schedule generate_stragglar_even(int n, EvenPolicy policy) {
  return EvenStragglarGenerator(n, policy).run();
}

}  // namespace stragglar

#include "stragglar/stragglar_generator.hpp"

#include <algorithm>
#include <sstream>

#include "stragglar/error.hpp"

namespace stragglar {

namespace {

[[noreturn]] void fail(int round, const std::string& what) {
  std::ostringstream os;
  os << "round " << round << ": " << what;
  throw InvariantViolation(os.str());
}

bool contains(const std::vector<Rank>& v, Rank r) {
  return std::find(v.begin(), v.end(), r) != v.end();
}

}  // namespace

StragglarGenerator::StragglarGenerator(int n) : n_(n), log_n_(0) {
  if (n < 2 || !is_power_of_two(n)) {
    throw UnsupportedSizeError(
        "stragglar: n = " + std::to_string(n) +
        " is not a power of two >= 2; even sizes go through the matching-based "
        "generator and odd sizes are unsupported");
  }
  log_n_ = log2_floor(n);
  full_.assign(static_cast<std::size_t>(n), boost::dynamic_bitset<>(static_cast<std::size_t>(n - 1)));
}

bool StragglarGenerator::holds(Rank rank, Chunk chunk) const {
  return full_[static_cast<std::size_t>(rank)].test(static_cast<std::size_t>(chunk));
}

Chunk StragglarGenerator::active_chunk_of(Rank rank) const {
  for (const auto& [chunk, holders] : active_) {
    if (holders.count(rank)) return chunk;
  }
  return -1;
}

std::vector<Matching> StragglarGenerator::straggler_pairing() const {
  if (round_ >= n_ - 1) return {};
  return {make_exchange(round_, round_, straggler(), round_, TransferKind::Reduce)};
}

RoundPartition StragglarGenerator::partition() const {
  RoundPartition part;
  part.round = round_;
  if (round_ < log_n_ || active_.empty()) return part;
  const Chunk oldest = active_.begin()->first;
  for (const auto& [chunk, holders] : active_) {
    for (Rank h : holders) {
      if (h == round_ && round_ < n_ - 1) continue;  // busy with the straggler
      (chunk == oldest ? part.p : part.q).push_back(h);
    }
  }
  if (round_ >= n_ - 1) part.q.push_back(straggler());
  std::sort(part.p.begin(), part.p.end());
  std::sort(part.q.begin(), part.q.end());
  return part;
}

std::vector<Matching> StragglarGenerator::phase1_matchings() const {
  const int r = round_;
  if (r <= 0 || r >= log_n_) {
    throw Error("phase1_matchings: round " + std::to_string(r) + " is not in the first phase");
  }
  std::vector<Matching> out = straggler_pairing();
  const Rank mandated_src = r - 1;
  const Rank mandated_dst = r - 1 + log_n_;
  out.push_back(make_send(mandated_src, mandated_dst, r - 1, TransferKind::Replace));

  std::vector<bool> busy(static_cast<std::size_t>(n_), false);
  busy[static_cast<std::size_t>(r)] = true;
  busy[static_cast<std::size_t>(mandated_src)] = true;
  busy[static_cast<std::size_t>(mandated_dst)] = true;

  // Chunk-free ranks past the mandated receivers, lowest index first.
  const Rank threshold = 2 * (log_n_ - 1);
  Rank next_receiver = threshold + 1;
  auto take_receiver = [&]() -> Rank {
    for (; next_receiver < n_ - 1; ++next_receiver) {
      const Rank g = next_receiver;
      if (!busy[static_cast<std::size_t>(g)] && full_[static_cast<std::size_t>(g)].none()) {
        ++next_receiver;
        return g;
      }
    }
    return -1;
  };

  for (Rank g = 0; g < n_ - 1; ++g) {
    if (busy[static_cast<std::size_t>(g)]) continue;
    const Chunk c = active_chunk_of(g);
    if (c < 0) continue;
    const Rank dst = take_receiver();
    if (dst < 0) {
      fail(r, "no chunk-free receiver left for rank " + std::to_string(g) +
                  " (first-phase counting bound broken)");
    }
    busy[static_cast<std::size_t>(g)] = true;
    busy[static_cast<std::size_t>(dst)] = true;
    out.push_back(make_send(g, dst, c, TransferKind::Replace));
  }
  return out;
}

std::vector<Matching> StragglarGenerator::phase2_matchings() const {
  const int r = round_;
  if (r < log_n_) {
    throw Error("phase2_matchings: round " + std::to_string(r) + " precedes the doubling phase");
  }
  std::vector<Matching> out = straggler_pairing();
  if (active_.empty()) return out;

  const RoundPartition part = partition();
  const Chunk oldest = active_.begin()->first;
  const Chunk last = n_ - 2;
  std::vector<bool> matched(static_cast<std::size_t>(n_), false);
  if (r < n_ - 1) {
    matched[static_cast<std::size_t>(r)] = true;
    matched[static_cast<std::size_t>(straggler())] = true;
  }

  auto chunk_of = [&](Rank h) { return h == straggler() ? last : active_chunk_of(h); };
  auto exchange = [&](Rank a, Rank b) {
    const Chunk ca = chunk_of(a);
    const Chunk cb = chunk_of(b);
    if (b == straggler()) {
      out.push_back(make_send(b, a, cb, TransferKind::Replace));
    } else if (a == straggler()) {
      out.push_back(make_send(a, b, ca, TransferKind::Replace));
    } else {
      out.push_back(make_exchange(a, ca, b, cb, TransferKind::Replace));
    }
    matched[static_cast<std::size_t>(a)] = true;
    matched[static_cast<std::size_t>(b)] = true;
  };

  // Ranks that meet the straggler within the next log n rounds go first. A
  // window rank g may only take a chunk c_j with j <= g - log n, so that its
  // active chunk is the expiring one when its turn comes.
  const Rank window_lo = r + 1;
  const Rank window_hi = r + log_n_;
  auto in_window = [&](Rank h) { return h >= window_lo && h <= window_hi; };
  for (Rank g = window_lo; g <= std::min(window_hi, n_ - 2); ++g) {
    if (matched[static_cast<std::size_t>(g)]) continue;
    const bool g_in_p = contains(part.p, g);
    const std::vector<Rank>& other_side = g_in_p ? part.q : part.p;
    Rank best = -1;
    Chunk best_chunk = -1;
    for (Rank h : other_side) {
      if (matched[static_cast<std::size_t>(h)] || in_window(h)) continue;
      const Chunk c = chunk_of(h);
      if (c > g - log_n_ || holds(g, c)) continue;
      if (best < 0 || c < best_chunk) {  // other_side is sorted: ties keep the lower rank
        best = h;
        best_chunk = c;
      }
    }
    if (best < 0) {
      fail(r, "critical-window rank " + std::to_string(g) + " has no admissible partner");
    }
    exchange(g, best);
  }

  std::vector<Rank> rest_p;
  std::vector<Rank> rest_q;
  for (Rank h : part.p) {
    if (!matched[static_cast<std::size_t>(h)]) rest_p.push_back(h);
  }
  for (Rank h : part.q) {
    if (!matched[static_cast<std::size_t>(h)]) rest_q.push_back(h);
  }
  // Once the straggler is free it only forwards the last chunk, to the
  // lowest-index rank still lacking it.
  if (!rest_q.empty() && rest_q.back() == straggler()) {
    rest_q.pop_back();
    auto it = std::find_if(rest_p.begin(), rest_p.end(),
                           [&](Rank h) { return !holds(h, last); });
    if (it == rest_p.end()) fail(r, "no partner lacking the last chunk for the straggler");
    exchange(*it, straggler());
    rest_p.erase(it);
  }
  if (rest_p.size() != rest_q.size()) {
    fail(r, "unbalanced partition: |P| = " + std::to_string(rest_p.size()) +
                ", |Q| = " + std::to_string(rest_q.size()));
  }
  for (std::size_t i = 0; i < rest_p.size(); ++i) exchange(rest_p[i], rest_q[i]);
  (void)oldest;
  return out;
}

void StragglarGenerator::check_before_round() const {
  const int r = round_;
  const int L = log_n_;
  if (r == L) {
    // Every non-straggler holds exactly one active chunk and chunk j has
    // 2^(L-1-j) holders.
    if (static_cast<int>(active_.size()) != L) fail(r, "expected log n active chunks");
    std::size_t total = 0;
    for (Chunk j = 0; j < L; ++j) {
      auto it = active_.find(j);
      if (it == active_.end()) fail(r, "chunk " + std::to_string(j) + " is not active");
      if (it->second.size() != (std::size_t{1} << (L - 1 - j))) {
        fail(r, "chunk " + std::to_string(j) + " has " + std::to_string(it->second.size()) +
                    " holders after the first phase");
      }
      total += it->second.size();
    }
    if (total != static_cast<std::size_t>(n_ - 1)) {
      fail(r, "first phase left some rank without exactly one active chunk");
    }
  }
  if (r >= L && r <= n_ - 2) {
    if (static_cast<int>(active_.size()) != L) fail(r, "expected log n active chunks");
    std::set<Rank> seen;
    std::size_t total = 0;
    for (Chunk j = r - L; j <= r - 1; ++j) {
      auto it = active_.find(j);
      if (it == active_.end()) fail(r, "chunk " + std::to_string(j) + " is not active");
      if (it->second.size() != (std::size_t{1} << (r - j - 1))) {
        fail(r, "chunk " + std::to_string(j) + " has " + std::to_string(it->second.size()) +
                    " holders, expected 2^" + std::to_string(r - j - 1));
      }
      total += it->second.size();
      seen.insert(it->second.begin(), it->second.end());
    }
    if (seen.size() != total) fail(r, "active holder sets overlap");
    const std::set<Rank>& p = active_.at(r - L);
    if (p.size() != static_cast<std::size_t>(n_ / 2)) fail(r, "|P_r| != n/2");
    if (!p.count(r)) fail(r, "rank r does not hold the expiring chunk");
    if (total - p.size() != static_cast<std::size_t>(n_ / 2 - 1)) fail(r, "|Q_r| != n/2 - 1");
  }
}

std::size_t StragglarGenerator::spread(Chunk chunk, const ActiveChunkMap& map) const {
  auto it = map.find(chunk);
  std::size_t count = it == map.end() ? 0 : it->second.size();
  if (chunk == n_ - 2 && round_ > n_ - 2) ++count;
  return count;
}

std::size_t StragglarGenerator::holder_count(Chunk chunk) const {
  std::size_t count = 0;
  for (Rank g = 0; g < n_ - 1; ++g) count += holds(g, chunk) ? 1 : 0;
  if (chunk == n_ - 2 && round_ > n_ - 2) ++count;
  return count;
}

void StragglarGenerator::check_after_round(const ActiveChunkMap& before) const {
  const int r = round_;  // the round just applied
  const int L = log_n_;
  auto everyone_holds = [&](Chunk c) {
    for (Rank g = 0; g < n_; ++g) {
      if (!holds(g, c)) return false;
    }
    return true;
  };
  if (r < n_ - 1 && !holds(r, r)) fail(r, "chunk r was not reduced with the straggler");
  if (r == n_ - 2) {
    for (Chunk c = 0; c < n_ - 1; ++c) {
      if (!holds(straggler(), c)) fail(r, "straggler misses chunk " + std::to_string(c));
    }
  }
  // A chunk reduced in round j reaches everybody right after round j + log n;
  // the last one needs only log n - 1 extra rounds.
  if (r >= L && r - L < n_ - 2 && !everyone_holds(r - L)) {
    fail(r, "chunk " + std::to_string(r - L) + " missed its propagation deadline");
  }
  if (r == n_ - 2 + L - 1 && !everyone_holds(n_ - 2)) {
    fail(r, "last chunk missed its propagation deadline");
  }
  if (r >= L) {
    for (const auto& [chunk, holders] : before) {
      if (chunk == r - L) continue;  // expires this round
      const std::size_t was = spread(chunk, before);
      const std::size_t now = holder_count(chunk);
      if (now != 2 * was) {
        fail(r, "chunk " + std::to_string(chunk) + " went from " + std::to_string(was) +
                    " to " + std::to_string(now) + " holders instead of doubling");
      }
    }
  }
}

void StragglarGenerator::apply(const Round& round) {
  const int r = round_;
  for (const Matching& m : round.matchings) {
    for (const Transfer& t : m.transfers) {
      for (Chunk c : t.chunks) {
        if (t.kind == TransferKind::Reduce) {
          full_[static_cast<std::size_t>(t.dst)].set(static_cast<std::size_t>(c));
        } else {
          if (!holds(t.src, c)) fail(r, "rank " + std::to_string(t.src) + " forwards a chunk it lacks");
          full_[static_cast<std::size_t>(t.dst)].set(static_cast<std::size_t>(c));
          if (t.dst != straggler()) active_[c].insert(t.dst);
        }
      }
    }
  }
  if (r >= log_n_) {
    auto it = active_.find(r - log_n_);
    if (it != active_.end()) {
      if (it->second.size() != static_cast<std::size_t>(n_ - 1)) {
        fail(r, "expiring chunk " + std::to_string(r - log_n_) + " is not on every rank");
      }
      active_.erase(it);
    }
  }
  if (r < n_ - 1) active_[r].insert(r);
  // The last chunk becomes inactive once everybody holds it.
  if (!active_.empty()) {
    auto last = active_.find(n_ - 2);
    if (last != active_.end() && last->second.size() == static_cast<std::size_t>(n_ - 1) &&
        r >= n_ - 1) {
      active_.erase(last);
    }
  }
}

Round StragglarGenerator::step() {
  if (done()) throw Error("stragglar generator already finished");
  check_before_round();
  Round round;
  if (round_ == 0) {
    round.matchings = straggler_pairing();
  } else if (round_ < log_n_) {
    round.matchings = phase1_matchings();
  } else {
    round.matchings = phase2_matchings();
  }
  const ActiveChunkMap before = active_;
  apply(round);
  check_after_round(before);
  ++round_;
  return round;
}

Schedule StragglarGenerator::run() {
  Schedule schedule;
  schedule.algorithm = Algorithm::StragglAR;
  schedule.n = n_;
  schedule.straggler = straggler();
  schedule.num_chunks = n_ - 1;
  while (!done()) schedule.rounds.push_back(step());
  return schedule;
}

Schedule generate_stragglar(int n) { return StragglarGenerator(n).run(); }

StragglarGeneration generate_stragglar_traced(int n) {
  StragglarGenerator gen(n);
  StragglarGeneration out;
  out.schedule.algorithm = Algorithm::StragglAR;
  out.schedule.n = n;
  out.schedule.straggler = gen.straggler();
  out.schedule.num_chunks = n - 1;
  while (!gen.done()) {
    out.trace.push_back({gen.next_round(), gen.active(), gen.partition()});
    out.schedule.rounds.push_back(gen.step());
  }
  return out;
}

}  // namespace stragglar

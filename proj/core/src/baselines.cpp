#include "stragglar/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "stragglar/error.hpp"

namespace stragglar {

namespace {

void require_pow2(const char* who, int n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw UnsupportedSizeError(std::string(who) + ": n = " + std::to_string(n) +
                               " must be a power of two >= 2");
  }
}

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

Schedule generate_ring(int n) {
  if (n < 2) throw InvalidSizeError("ring: n must be at least 2, got " + std::to_string(n));
  Schedule s{Algorithm::Ring, n, n - 1, n, {}};
  for (int r = 0; r < n - 1; ++r) {
    Round round;
    for (Rank i = 0; i < n; ++i) {
      round.matchings.push_back(make_send(i, mod(i + 1, n), mod(i - r, n), TransferKind::Reduce));
    }
    s.rounds.push_back(std::move(round));
  }
  // After reduce-scatter rank i owns chunk (i + 1) mod n.
  for (int r = 0; r < n - 1; ++r) {
    Round round;
    for (Rank i = 0; i < n; ++i) {
      round.matchings.push_back(
          make_send(i, mod(i + 1, n), mod(i + 1 - r, n), TransferKind::Replace));
    }
    s.rounds.push_back(std::move(round));
  }
  // n == 2 pairs each rank with the other in both directions; merge them so
  // that every rank sits in a single matching.
  if (n == 2) {
    for (Round& round : s.rounds) {
      Matching merged{0, 1, {}};
      for (Matching& m : round.matchings) {
        merged.transfers.insert(merged.transfers.end(), m.transfers.begin(), m.transfers.end());
      }
      round.matchings = {std::move(merged)};
    }
  }
  return s;
}

Schedule generate_rhd(int n) {
  require_pow2("rhd", n);
  const int log_n = log2_floor(n);
  Schedule s{Algorithm::RHD, n, n - 1, n, {}};

  // window[g] = [lo, hi) of chunks rank g is responsible for.
  std::vector<std::pair<int, int>> window(static_cast<std::size_t>(n), {0, n});
  auto chunk_range = [](int lo, int hi) {
    std::vector<Chunk> out(static_cast<std::size_t>(hi - lo));
    std::iota(out.begin(), out.end(), lo);
    return out;
  };

  std::vector<std::vector<std::pair<int, int>>> history;
  for (int k = 0; k < log_n; ++k) {
    history.push_back(window);
    Round round;
    std::vector<std::pair<int, int>> next = window;
    for (Rank g = 0; g < n; ++g) {
      const Rank partner = g ^ (1 << k);
      const auto [lo, hi] = window[static_cast<std::size_t>(g)];
      const int mid = lo + (hi - lo) / 2;
      const bool keep_low = ((g >> k) & 1) == 0;
      next[static_cast<std::size_t>(g)] = keep_low ? std::pair{lo, mid} : std::pair{mid, hi};
      if (g < partner) {
        // g keeps one half and hands the other to its partner, and vice versa.
        Matching m{g, partner, {}};
        m.transfers.push_back({g, partner, keep_low ? chunk_range(mid, hi) : chunk_range(lo, mid),
                               TransferKind::Reduce});
        m.transfers.push_back({partner, g, keep_low ? chunk_range(lo, mid) : chunk_range(mid, hi),
                               TransferKind::Reduce});
        round.matchings.push_back(std::move(m));
      }
    }
    window = std::move(next);
    s.rounds.push_back(std::move(round));
  }

  for (int k = log_n - 1; k >= 0; --k) {
    Round round;
    for (Rank g = 0; g < n; ++g) {
      const Rank partner = g ^ (1 << k);
      if (g > partner) continue;
      const auto [glo, ghi] = window[static_cast<std::size_t>(g)];
      const auto [plo, phi] = window[static_cast<std::size_t>(partner)];
      Matching m{g, partner, {}};
      m.transfers.push_back({g, partner, chunk_range(glo, ghi), TransferKind::Replace});
      m.transfers.push_back({partner, g, chunk_range(plo, phi), TransferKind::Replace});
      round.matchings.push_back(std::move(m));
    }
    window = history[static_cast<std::size_t>(k)];
    s.rounds.push_back(std::move(round));
  }
  return s;
}

Schedule generate_broadcast(int n, Rank straggler) {
  require_pow2("broadcast", n);
  if (straggler < 0 || straggler >= n) {
    throw InvalidSizeError("broadcast: straggler rank out of range");
  }
  const int log_n = log2_floor(n);
  Schedule s{Algorithm::Broadcast, n, straggler, 1, {}};
  const Rank first = straggler == 0 ? 1 : 0;

  std::vector<Rank> holders{std::min(first, straggler), std::max(first, straggler)};
  std::vector<Rank> waiting;
  for (Rank g = 0; g < n; ++g) {
    if (g != first && g != straggler) waiting.push_back(g);
  }
  s.rounds.push_back(Round{{make_exchange(first, 0, straggler, 0, TransferKind::Reduce)}});

  for (int k = 1; k < log_n; ++k) {
    Round round;
    const std::size_t count = holders.size();
    std::vector<Rank> receivers(waiting.begin(), waiting.begin() + static_cast<long>(count));
    waiting.erase(waiting.begin(), waiting.begin() + static_cast<long>(count));
    for (std::size_t i = 0; i < count; ++i) {
      round.matchings.push_back(make_send(holders[i], receivers[i], 0, TransferKind::Replace));
    }
    holders.insert(holders.end(), receivers.begin(), receivers.end());
    std::sort(holders.begin(), holders.end());
    s.rounds.push_back(std::move(round));
  }
  return s;
}

}  // namespace stragglar

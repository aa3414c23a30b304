#include "stragglar/schedule.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>

namespace stragglar {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::StragglAR: return "stragglar";
    case Algorithm::Ring: return "ring";
    case Algorithm::RHD: return "rhd";
    case Algorithm::Broadcast: return "broadcast";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "stragglar") return Algorithm::StragglAR;
  if (s == "ring") return Algorithm::Ring;
  if (s == "rhd") return Algorithm::RHD;
  if (s == "broadcast") return Algorithm::Broadcast;
  return std::nullopt;
}

std::string_view to_string(TransferKind kind) {
  return kind == TransferKind::Reduce ? "reduce" : "replace";
}

std::optional<TransferKind> parse_transfer_kind(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "reduce") return TransferKind::Reduce;
  if (s == "replace") return TransferKind::Replace;
  return std::nullopt;
}

Matching make_exchange(Rank a, Chunk a_sends, Rank b, Chunk b_sends,
                       TransferKind kind) {
  return Matching{a, b,
                  {Transfer{a, b, {a_sends}, kind},
                   Transfer{b, a, {b_sends}, kind}}};
}

Matching make_send(Rank src, Rank dst, Chunk chunk, TransferKind kind) {
  return make_send(src, dst, std::vector<Chunk>{chunk}, kind);
}

Matching make_send(Rank src, Rank dst, std::vector<Chunk> chunks,
                   TransferKind kind) {
  return Matching{src, dst, {Transfer{src, dst, std::move(chunks), kind}}};
}

std::vector<std::string> structural_problems(const Schedule& schedule) {
  std::vector<std::string> problems;
  auto report = [&](std::size_t round, const std::string& what) {
    std::ostringstream os;
    os << "round " << round << ": " << what;
    problems.push_back(os.str());
  };
  const int n = schedule.n;
  if (n < 2) problems.push_back("n must be at least 2");
  if (schedule.num_chunks < 1) problems.push_back("num_chunks must be positive");
  if (schedule.straggler < 0 || schedule.straggler >= n)
    problems.push_back("straggler rank out of range");

  auto rank_ok = [n](Rank r) { return r >= 0 && r < n; };
  for (std::size_t ri = 0; ri < schedule.rounds.size(); ++ri) {
    for (const Matching& m : schedule.rounds[ri].matchings) {
      if (!rank_ok(m.first) || !rank_ok(m.second)) {
        report(ri, "matching rank out of range");
        continue;
      }
      if (m.first == m.second) {
        report(ri, "matching pairs rank " + std::to_string(m.first) + " with itself");
        continue;
      }
      if (m.transfers.empty() || m.transfers.size() > 2) {
        report(ri, "matching must carry one or two transfers");
      }
      int forward = 0;
      int backward = 0;
      for (const Transfer& t : m.transfers) {
        if (t.src == t.dst) {
          report(ri, "transfer with src == dst");
        } else if (!m.involves(t.src) || !m.involves(t.dst)) {
          report(ri, "transfer " + std::to_string(t.src) + "->" +
                         std::to_string(t.dst) + " leaves its matching");
        } else if (t.src == m.first) {
          ++forward;
        } else {
          ++backward;
        }
        if (t.chunks.empty()) report(ri, "transfer with no chunks");
        for (Chunk c : t.chunks) {
          if (c < 0 || c >= schedule.num_chunks) {
            report(ri, "chunk " + std::to_string(c) + " out of range");
          }
        }
        std::vector<Chunk> sorted = t.chunks;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
          report(ri, "transfer lists a chunk twice");
        }
      }
      if (forward > 1 || backward > 1) {
        report(ri, "more than one transfer in one direction");
      }
    }
  }
  return problems;
}

bool is_power_of_two(int n) {
  return n > 0 && std::has_single_bit(static_cast<unsigned>(n));
}

int log2_floor(int n) {
  return static_cast<int>(std::bit_width(static_cast<unsigned>(n))) - 1;
}

}  // namespace stragglar

#include "stragglar/schedule_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stragglar/error.hpp"

namespace stragglar {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json transfer_json(const Transfer& t) {
  ordered_json j;
  j["src"] = t.src;
  j["dst"] = t.dst;
  j["chunks"] = t.chunks;
  j["kind"] = std::string(to_string(t.kind));
  return j;
}

const ordered_json& field(const ordered_json& obj, const char* name) {
  if (!obj.is_object()) throw ParseError(std::string("expected an object holding '") + name + "'");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

int integer(const ordered_json& v, const char* what) {
  if (!v.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
  return v.get<int>();
}

const ordered_json& array(const ordered_json& v, const char* what) {
  if (!v.is_array()) throw ParseError(std::string(what) + " must be an array");
  return v;
}

}  // namespace

std::string rational_to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

std::string schedule_to_json(const Schedule& schedule, int indent) {
  ordered_json j;
  j["algorithm"] = std::string(to_string(schedule.algorithm));
  j["n"] = schedule.n;
  j["straggler"] = schedule.straggler;
  j["num_chunks"] = schedule.num_chunks;
  ordered_json rounds = ordered_json::array();
  for (const Round& round : schedule.rounds) {
    ordered_json matchings = ordered_json::array();
    for (const Matching& m : round.matchings) {
      ordered_json mj;
      mj["pair"] = {m.first, m.second};
      ordered_json transfers = ordered_json::array();
      for (const Transfer& t : m.transfers) transfers.push_back(transfer_json(t));
      mj["transfers"] = std::move(transfers);
      matchings.push_back(std::move(mj));
    }
    rounds.push_back(std::move(matchings));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(indent);
}

Schedule schedule_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  Schedule s;
  const ordered_json& algo = field(j, "algorithm");
  if (!algo.is_string()) throw ParseError("algorithm must be a string");
  auto parsed = parse_algorithm(algo.get<std::string>());
  if (!parsed) throw ParseError("unknown algorithm '" + algo.get<std::string>() + "'");
  s.algorithm = *parsed;
  s.n = integer(field(j, "n"), "n");
  s.straggler = integer(field(j, "straggler"), "straggler");
  s.num_chunks = integer(field(j, "num_chunks"), "num_chunks");
  for (const ordered_json& rj : array(field(j, "rounds"), "rounds")) {
    Round round;
    for (const ordered_json& mj : array(rj, "round")) {
      const ordered_json& pair = array(field(mj, "pair"), "pair");
      if (pair.size() != 2) throw ParseError("pair must have two ranks");
      Matching m{integer(pair[0], "pair rank"), integer(pair[1], "pair rank"), {}};
      for (const ordered_json& tj : array(field(mj, "transfers"), "transfers")) {
        Transfer t;
        t.src = integer(field(tj, "src"), "src");
        t.dst = integer(field(tj, "dst"), "dst");
        for (const ordered_json& c : array(field(tj, "chunks"), "chunks")) {
          t.chunks.push_back(integer(c, "chunk"));
        }
        const ordered_json& kind = field(tj, "kind");
        if (!kind.is_string()) throw ParseError("kind must be a string");
        auto k = parse_transfer_kind(kind.get<std::string>());
        if (!k) throw ParseError("unknown transfer kind '" + kind.get<std::string>() + "'");
        t.kind = *k;
        m.transfers.push_back(std::move(t));
      }
      round.matchings.push_back(std::move(m));
    }
    s.rounds.push_back(std::move(round));
  }
  return s;
}

std::string report_to_json(const VerificationReport& report, int indent) {
  ordered_json j;
  j["valid"] = report.valid;
  j["rounds_executed"] = report.rounds_executed;
  j["beta_coefficient"] = rational_to_string(report.beta_coefficient);
  j["beta_coefficient_value"] = static_cast<double>(report.beta_coefficient.numerator()) /
                                static_cast<double>(report.beta_coefficient.denominator());
  ordered_json violations = ordered_json::array();
  for (const Violation& v : report.violations) {
    ordered_json vj;
    vj["round"] = v.round;
    vj["kind"] = std::string(to_string(v.kind));
    vj["description"] = v.description;
    violations.push_back(std::move(vj));
  }
  j["violations"] = std::move(violations);
  return j.dump(indent);
}

std::string trace_to_json(const std::vector<RoundTrace>& trace, int indent) {
  ordered_json out = ordered_json::array();
  for (const RoundTrace& t : trace) {
    ordered_json j;
    j["round"] = t.round;
    ordered_json active = ordered_json::object();
    for (const auto& [chunk, holders] : t.active) {
      active[std::to_string(chunk)] = std::vector<Rank>(holders.begin(), holders.end());
    }
    j["active"] = std::move(active);
    j["p"] = t.partition.p;
    j["q"] = t.partition.q;
    out.push_back(std::move(j));
  }
  return out.dump(indent);
}

Schedule read_schedule_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error("failed reading " + path.string());
  return schedule_from_json(buffer.str());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace stragglar

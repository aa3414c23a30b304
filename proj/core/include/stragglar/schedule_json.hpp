#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stragglar/schedule.hpp"
#include "stragglar/stragglar_generator.hpp"
#include "stragglar/verifier.hpp"

namespace stragglar {

// Schedule file format, fields in this order:
//   {"algorithm": "stragglar", "n": 4, "straggler": 3, "num_chunks": 3,
//    "rounds": [[{"pair": [0, 3],
//                 "transfers": [{"src": 0, "dst": 3, "chunks": [0],
//                                "kind": "reduce"}, ...]}, ...], ...]}
// indent < 0 produces the compact single-line form.
std::string schedule_to_json(const Schedule& schedule, int indent = -1);
// Throws ParseError on malformed input. Does not verify the schedule.
Schedule schedule_from_json(std::string_view text);

// {"valid": .., "rounds_executed": .., "beta_coefficient": "p/q",
//  "beta_coefficient_value": .., "violations": [{"round", "kind", "description"}]}
std::string report_to_json(const VerificationReport& report, int indent = -1);

// One object per round: {"round", "active": {"<chunk>": [holders]}, "p", "q"}.
std::string trace_to_json(const std::vector<RoundTrace>& trace, int indent = -1);

std::string rational_to_string(const Rational& r);

// File helpers; both throw Error on I/O failure (ParseError for bad JSON).
Schedule read_schedule_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace stragglar

#include "stragglar/schedule_json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "stragglar/error.hpp"
#include "stragglar/generate.hpp"

namespace stragglar {
namespace {

using nlohmann::json;

TEST(ScheduleJson, RoundTripsEveryAlgorithm) {
  for (Algorithm a : {Algorithm::StragglAR, Algorithm::Ring, Algorithm::RHD, Algorithm::Broadcast}) {
    for (int n : {2, 4, 8}) {
      const Schedule s = generate_schedule(a, n);
      EXPECT_EQ(schedule_from_json(schedule_to_json(s)), s);
      EXPECT_EQ(schedule_from_json(schedule_to_json(s, 2)), s);
    }
  }
  const Schedule even = generate_schedule(Algorithm::StragglAR, 6);
  EXPECT_EQ(schedule_from_json(schedule_to_json(even)), even);
}

TEST(ScheduleJson, FieldLayout) {
  const json j = json::parse(schedule_to_json(generate_schedule(Algorithm::StragglAR, 4)));
  EXPECT_EQ(j["algorithm"], "stragglar");
  EXPECT_EQ(j["n"], 4);
  EXPECT_EQ(j["straggler"], 3);
  EXPECT_EQ(j["num_chunks"], 3);
  ASSERT_EQ(j["rounds"].size(), 4u);
  const json& first = j["rounds"][0][0];
  EXPECT_EQ(first["pair"], json::array({0, 3}));
  EXPECT_EQ(first["transfers"][0], json::parse(R"({"src":0,"dst":3,"chunks":[0],"kind":"reduce"})"));

  const std::string text = schedule_to_json(generate_schedule(Algorithm::Ring, 2));
  EXPECT_LT(text.find("\"algorithm\""), text.find("\"n\""));
  EXPECT_LT(text.find("\"num_chunks\""), text.find("\"rounds\""));
}

TEST(ScheduleJson, Deterministic) {
  EXPECT_EQ(schedule_to_json(generate_schedule(Algorithm::StragglAR, 16)),
            schedule_to_json(generate_schedule(Algorithm::StragglAR, 16)));
}

TEST(ScheduleJson, MalformedInputThrowsParseError) {
  const char* bad[] = {
      "",
      "{",
      "[]",
      R"({"n":4,"straggler":3,"num_chunks":3,"rounds":[]})",
      R"({"algorithm":"tree","n":4,"straggler":3,"num_chunks":3,"rounds":[]})",
      R"({"algorithm":"ring","n":"4","straggler":3,"num_chunks":3,"rounds":[]})",
      R"({"algorithm":"ring","n":4,"straggler":3,"num_chunks":3,"rounds":{}})",
      R"({"algorithm":"ring","n":4,"straggler":3,"num_chunks":3,"rounds":[[{"pair":[0],"transfers":[]}]]})",
      R"({"algorithm":"ring","n":4,"straggler":3,"num_chunks":3,"rounds":[[{"pair":[0,1],"transfers":[{"src":0,"dst":1,"chunks":[0],"kind":"copy"}]}]]})",
      R"({"algorithm":"ring","n":4,"straggler":3,"num_chunks":3,"rounds":[[{"pair":[0,1],"transfers":[{"src":0,"dst":1,"chunks":[0.5],"kind":"reduce"}]}]]})",
  };
  for (const char* text : bad) EXPECT_THROW(schedule_from_json(text), ParseError) << text;
}

TEST(ReportJson, Fields) {
  VerificationReport r;
  r.valid = false;
  r.rounds_executed = 3;
  r.beta_coefficient = Rational(9, 7);
  r.violations.push_back({2, ViolationKind::DoubleCount, "oops"});
  const json j = json::parse(report_to_json(r));
  EXPECT_EQ(j["valid"], false);
  EXPECT_EQ(j["rounds_executed"], 3);
  EXPECT_EQ(j["beta_coefficient"], "9/7");
  EXPECT_DOUBLE_EQ(j["beta_coefficient_value"].get<double>(), 9.0 / 7.0);
  EXPECT_EQ(j["violations"][0]["round"], 2);
  EXPECT_EQ(j["violations"][0]["kind"], "double-count");
  EXPECT_EQ(j["violations"][0]["description"], "oops");
}

TEST(RationalString, WholeNumbersHaveNoDenominator) {
  EXPECT_EQ(rational_to_string(Rational(4)), "4");
  EXPECT_EQ(rational_to_string(Rational(6, 4)), "3/2");
}

TEST(TraceJson, OneEntryPerRound) {
  const auto gen = generate_stragglar_traced(8);
  const json j = json::parse(trace_to_json(gen.trace));
  ASSERT_EQ(j.size(), 9u);
  EXPECT_EQ(j[0]["round"], 0);
  // Before round log n = 3 chunk 0 has 4 holders, chunk 1 two, chunk 2 one.
  EXPECT_EQ(j[3]["active"]["0"].size(), 4u);
  EXPECT_EQ(j[3]["active"]["1"].size(), 2u);
  EXPECT_EQ(j[3]["active"]["2"].size(), 1u);
  // Rank 3 holds chunk 0 but is busy with the straggler.
  EXPECT_EQ(j[3]["p"].size(), 3u);
  EXPECT_EQ(j[3]["q"].size(), 3u);
}

TEST(Files, WriteThenRead) {
  const auto dir = std::filesystem::temp_directory_path() / "stragglar_json_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "s.json";
  const Schedule s = generate_schedule(Algorithm::RHD, 8);
  write_text_file(path, schedule_to_json(s));
  EXPECT_EQ(read_schedule_file(path), s);
  EXPECT_THROW(read_schedule_file(dir / "missing.json"), Error);
  EXPECT_THROW(write_text_file(dir / "no" / "such" / "dir.json", "x"), Error);
  {
    std::ofstream(dir / "bad.json") << "{nope";
  }
  EXPECT_THROW(read_schedule_file(dir / "bad.json"), ParseError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace stragglar

#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "walkup/errors.hpp"
#include "walkup/ingest.hpp"

using namespace walkup;
using namespace walkup::ingest;

namespace {

std::string body_json(double x) {
  std::string s = "[";
  for (int i = 0; i < 33; ++i) s += (i ? "," : "") + std::string("[") + std::to_string(x) + ",0.5,0,1]";
  return s + "]";
}

LandmarkSequence parse_text(const std::string& text, Format f) {
  std::istringstream in(text);
  return parse_frames(in, f);
}

LandmarkSequence two_frames(double x0, double x1, double t1) {
  LandmarkSequence seq;
  seq.frames.push_back({0.0, testutil::flat_body(x0), {}, {}});
  seq.frames.push_back({t1, testutil::flat_body(x1), {}, {}});
  return seq;
}

}  // namespace

TEST_CASE("two-line JSONL with header") {
  const std::string text = "{\"fps\": 25, \"item\": \"leg_agility\", \"subject\": \"s01\"}\n"
                           "{\"t\": 0, \"body\": " + body_json(0.25) + "}\n"
                           "{\"t\": 0.04, \"body\": " + body_json(0.5) + "}\n";
  const auto seq = parse_text(text, Format::JsonLines);
  CHECK(seq.frames.size() == 2);
  CHECK(seq.fps == 25.0);
  CHECK(seq.item == UpdrsItem::LegAgility);
  CHECK(seq.subject_id == "s01");
  CHECK(seq.frames[1].body->points[32].x == 0.5);
  CHECK_FALSE(seq.frames[0].left_hand.has_value());
}

TEST_CASE("JSONL frame without t is a schema error at its line") {
  const std::string text = "{\"fps\": 30}\n{\"t\": 0, \"body\": " + body_json(0.1) + "}\n{\"body\": " +
                           body_json(0.1) + "}\n";
  try {
    (void)parse_text(text, Format::JsonLines);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("JSONL rejects malformed content") {
  CHECK_THROWS_AS((void)parse_text("{\"t\": 0, \"body\": [[1,2,3]]}\n", Format::JsonLines), SchemaError);
  CHECK_THROWS_AS((void)parse_text("not json\n", Format::JsonLines), SchemaError);
  CHECK_THROWS_AS((void)parse_text("", Format::JsonLines), EmptySequence);
  CHECK_THROWS_AS((void)parse_text("{\"fps\": 30}\n", Format::JsonLines), EmptySequence);
}

TEST_CASE("fps is estimated without a header") {
  const std::string text = "{\"t\": 0, \"body\": " + body_json(0.1) + "}\n{\"t\": 0.1, \"body\": " +
                           body_json(0.1) + "}\n{\"t\": 0.2, \"body\": " + body_json(0.1) + "}\n";
  CHECK(parse_text(text, Format::JsonLines).fps == doctest::Approx(10.0));
}

TEST_CASE("CSV body row at the origin") {
  std::string header = "t";
  std::string row = "0";
  for (int i = 0; i < 33; ++i) {
    for (const char* f : {"x", "y", "z", "v"}) header += ",body_" + std::to_string(i) + "_" + f;
    row += ",0,0,0,1";
  }
  const auto seq = parse_text(header + "\n" + row + "\n", Format::Csv);
  REQUIRE(seq.frames.size() == 1);
  REQUIRE(seq.frames[0].body.has_value());
  for (const Landmark& p : seq.frames[0].body->points) CHECK(p == Landmark{0, 0, 0, 1});
  CHECK_FALSE(seq.frames[0].right_hand.has_value());
}

TEST_CASE("CSV schema errors") {
  CHECK_THROWS_AS((void)parse_text("t,bogus\n0,1\n", Format::Csv), SchemaError);
  CHECK_THROWS_AS((void)parse_text("t,body_0_x\n0,1\n", Format::Csv), SchemaError);
}

TEST_CASE("JSONL and CSV round-trip random sequences") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 20; ++i) {
    auto seq = testutil::random_sequence(rng, 1 + i % 7, 24.0);
    seq.item = kAllItems[static_cast<std::size_t>(i) % kAllItems.size()];
    seq.subject_id = i % 2 ? "p" + std::to_string(i) : "";
    CHECK(parse_text(to_jsonl(seq), Format::JsonLines) == seq);
    std::ostringstream csv;
    write_csv(csv, seq);
    CHECK(parse_text(csv.str(), Format::Csv) == seq);
  }
}

TEST_CASE("resample interpolates the midpoint") {
  const auto seq = two_frames(0.0, 1.0, 1.0);
  IngestConfig cfg;
  cfg.resample_fps = 2.0;
  const auto out = resample(seq, cfg);
  REQUIRE(out.frames.size() == 3);
  CHECK(out.frames[0].body->points[0].x == 0.0);
  CHECK(out.frames[1].body->points[0].x == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.frames[2].body->points[0].x == 1.0);
  CHECK(out.frames[1].timestamp == 0.5);
  CHECK(out.fps == 2.0);
}

TEST_CASE("resample at the native rate is the identity and idempotent") {
  std::mt19937_64 rng(5);
  LandmarkSequence seq;
  for (int k = 0; k < 12; ++k) {
    LandmarkFrame f;
    f.timestamp = k / 30.0;
    testutil::randomize(f.body.emplace().points, rng);
    seq.frames.push_back(f);
  }
  IngestConfig cfg;
  cfg.resample_fps = 30.0;
  const auto once = resample(seq, cfg);
  const auto twice = resample(once, cfg);
  REQUIRE(once.frames.size() == seq.frames.size());
  REQUIRE(twice.frames.size() == once.frames.size());
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    for (std::size_t i = 0; i < kBodyPointCount; ++i) {
      CHECK(std::abs(once.frames[k].body->points[i].x - seq.frames[k].body->points[i].x) < 1e-12);
      CHECK(std::abs(twice.frames[k].body->points[i].y - once.frames[k].body->points[i].y) < 1e-12);
    }
  }
}

TEST_CASE("single frame resamples to one frame at zero") {
  LandmarkSequence seq;
  seq.frames.push_back({3.0, testutil::flat_body(), {}, {}});
  IngestConfig cfg;
  cfg.resample_fps = 10.0;
  const auto out = resample(seq, cfg);
  REQUIRE(out.frames.size() == 1);
  CHECK(out.frames[0].timestamp == 0.0);
}

TEST_CASE("gap filling policies") {
  LandmarkSequence seq;
  for (int k = 0; k < 3; ++k) seq.frames.push_back({static_cast<double>(k), testutil::flat_body(k * 0.1), {}, {}});
  seq.frames[1].body->points[5].visibility = 0.1;
  seq.frames[1].body->points[5].x = 9.0;

  IngestConfig cfg;
  const auto lin = fill_gaps(seq, cfg);
  CHECK(lin.frames[1].body->points[5].x == doctest::Approx(0.1));
  CHECK(lin.frames[1].body->points[5].visibility == 0.5);

  cfg.gap_fill = GapFill::HoldLast;
  CHECK(fill_gaps(seq, cfg).frames[1].body->points[5].x == 0.0);

  cfg.gap_fill = GapFill::Drop;
  CHECK(fill_gaps(seq, cfg).frames[1].body->points[5].x == 9.0);
}

TEST_CASE("interior pose absence is restored, edges are not") {
  LandmarkSequence seq;
  seq.frames.push_back({0.0, testutil::flat_body(), {}, {}});
  seq.frames.push_back({1.0, testutil::flat_body(), {}, testutil::flat_hand(Side::Right, 0.2)});
  seq.frames.push_back({2.0, testutil::flat_body(), {}, {}});
  seq.frames.push_back({3.0, testutil::flat_body(), {}, testutil::flat_hand(Side::Right, 0.4)});
  const auto out = fill_gaps(seq, {});
  CHECK_FALSE(out.frames[0].right_hand.has_value());
  REQUIRE(out.frames[2].right_hand.has_value());
  CHECK(out.frames[2].right_hand->points[0].x == doctest::Approx(0.3));
}

TEST_CASE("config and name parsing") {
  CHECK(parse_format("jsonl") == Format::JsonLines);
  CHECK(parse_format("csv") == Format::Csv);
  CHECK_FALSE(parse_format("xml").has_value());
  for (GapFill g : {GapFill::HoldLast, GapFill::LinearInterp, GapFill::Drop}) CHECK(parse_gap_fill(to_string(g)) == g);
  IngestConfig cfg;
  cfg.min_visibility = 2.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  CHECK(guess_format("a/b.csv") == Format::Csv);
  CHECK(guess_format("a/b.jsonl") == Format::JsonLines);
}

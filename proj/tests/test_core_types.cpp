#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "walkup/core_types.hpp"

using namespace walkup;

namespace {

bool has_code(const ValidationReport& r, std::string_view code) {
  for (const auto& v : r) {
    if (v.code == code) return true;
  }
  return false;
}

LandmarkSequence two_body_frames() {
  LandmarkSequence seq;
  seq.item = UpdrsItem::LegAgility;
  seq.frames.push_back({0.0, testutil::flat_body(), {}, {}});
  seq.frames.push_back({1.0 / 30.0, testutil::flat_body(), {}, {}});
  return seq;
}

}  // namespace

TEST_CASE("names round-trip") {
  for (UpdrsItem item : kAllItems) CHECK(parse_item(to_string(item)) == item);
  for (Channel c : {Channel::Left, Channel::Right, Channel::Global}) CHECK(parse_channel(to_string(c)) == c);
  CHECK_FALSE(parse_item("finger_tap").has_value());
  CHECK(to_string(UpdrsItem::TremorAtRest) == "tremor_at_rest");
}

TEST_CASE("well-formed sequence validates clean") {
  CHECK(validate_sequence(two_body_frames()).empty());
}

TEST_CASE("equal timestamps are reported") {
  auto seq = two_body_frames();
  seq.frames[1].timestamp = 0.0;
  const auto rep = validate_sequence(seq);
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].code == "non-increasing-timestamps");
  CHECK(rep[0].message == "non-increasing timestamps");
  CHECK(rep[0].frame == 1u);
}

TEST_CASE("finger taps without hands is reported") {
  auto seq = two_body_frames();
  seq.item = UpdrsItem::FingerTaps;
  const auto rep = validate_sequence(seq);
  REQUIRE(has_code(rep, "item-requires-hand-landmarks"));
  CHECK(rep.back().message == "item requires hand landmarks");
}

TEST_CASE("pose requirement table") {
  LandmarkSequence hands_only;
  hands_only.frames.push_back({0.0, {}, {}, testutil::flat_hand(Side::Right)});
  for (UpdrsItem item : {UpdrsItem::FingerTaps, UpdrsItem::HandMovement, UpdrsItem::AlternatingHands}) {
    hands_only.item = item;
    CHECK(validate_sequence(hands_only).empty());
  }
  for (UpdrsItem item : {UpdrsItem::TremorAtRest, UpdrsItem::LegAgility, UpdrsItem::FootTaps}) {
    hands_only.item = item;
    CHECK(has_code(validate_sequence(hands_only), "item-requires-body-landmarks"));
  }
}

TEST_CASE("mutations of a valid random sequence are caught") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto seq = testutil::random_sequence(rng, 5);
    REQUIRE(validate_sequence(seq).empty());

    auto bad = seq;
    switch (trial % 7) {
      case 0: bad.fps = 0.0; break;
      case 1: bad.frames[3].timestamp = bad.frames[2].timestamp; break;
      case 2: bad.frames[0].timestamp = -1.0; break;
      case 3: bad.frames[2] = {bad.frames[2].timestamp, {}, {}, {}}; break;
      case 4:
        bad.frames[1].right_hand = testutil::flat_hand(Side::Right);
        bad.frames[1].right_hand->points[4].x = std::numeric_limits<double>::quiet_NaN();
        break;
      case 5:
        bad.frames[4].left_hand = testutil::flat_hand(Side::Left);
        bad.frames[4].left_hand->points[0].visibility = 1.5;
        break;
      case 6: bad.frames[0].left_hand = testutil::flat_hand(Side::Right); break;
    }
    CHECK_FALSE(validate_sequence(bad).empty());
  }
}

TEST_CASE("empty sequence and bad fps") {
  LandmarkSequence seq;
  CHECK(has_code(validate_sequence(seq), "empty-sequence"));
  seq = two_body_frames();
  seq.fps = std::numeric_limits<double>::infinity();
  CHECK(has_code(validate_sequence(seq), "invalid-fps"));
}

TEST_CASE("series validation") {
  SignalSeries s{UpdrsItem::TremorAtRest, Channel::Global, {0, 1, 0}, {0.5, 1.0, 1.5}};
  CHECK(validate_series(s).empty());
  s.values[1] = 0.5;
  CHECK(has_code(validate_series(s), "tremor-not-binary"));
  SignalSeries a{UpdrsItem::FingerTaps, Channel::Right, {10, 190}, {0, 0}};
  const auto rep = validate_series(a);
  CHECK(has_code(rep, "angle-out-of-range"));
  CHECK(has_code(rep, "non-increasing-timestamps"));
  a.timestamps.pop_back();
  CHECK(has_code(validate_series(a), "length-mismatch"));
}

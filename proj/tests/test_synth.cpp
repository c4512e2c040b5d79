#include <cmath>
#include <numbers>

#include "doctest.h"
#include "walkup/errors.hpp"
#include "walkup/ingest.hpp"
#include "walkup/peaks.hpp"
#include "walkup/signals.hpp"
#include "walkup/synth.hpp"

using namespace walkup;
using namespace walkup::synth;

namespace {

constexpr UpdrsItem kMoving[] = {UpdrsItem::FingerTaps, UpdrsItem::HandMovement, UpdrsItem::AlternatingHands,
                                 UpdrsItem::LegAgility, UpdrsItem::FootTaps};

SignalSeries signal_for(const LandmarkSequence& seq, Side side) {
  switch (*seq.item) {
    case UpdrsItem::FingerTaps: return signals::finger_taps_signal(seq, side);
    case UpdrsItem::HandMovement: return signals::hand_movement_signal(seq, side);
    case UpdrsItem::AlternatingHands: return signals::alternating_hands_signal(seq, side);
    case UpdrsItem::LegAgility: return signals::leg_agility_signal(seq, side);
    case UpdrsItem::FootTaps: return signals::foot_taps_signal(seq, side);
    case UpdrsItem::TremorAtRest: break;
  }
  return {};
}

}  // namespace

TEST_CASE("drive is a raised cosine per cycle") {
  MotionScenario s;
  s.base_amplitude = 10.0;
  CHECK(drive(s, 0.0) == 0.0);
  CHECK(drive(s, 0.5) == doctest::Approx(10.0));
  CHECK(drive(s, 0.25) == doctest::Approx(5.0));
  CHECK(drive(s, -1.0) == 0.0);

  s.amplitude_decrement_per_cycle = 3.0;
  CHECK(drive(s, 1.5) == doctest::Approx(7.0));
  CHECK(drive(s, 10.5) == 0.0);

  s.amplitude_decrement_per_cycle = 0.0;
  s.interval_growth_s_per_cycle = 0.5;
  // Cycle 0 spans [0, 1), cycle 1 spans [1, 2.5).
  CHECK(drive(s, 1.75) == doctest::Approx(10.0));
}

TEST_CASE("every item's signal follows the scenario") {
  for (UpdrsItem item : kMoving) {
    for (Side side : {Side::Left, Side::Right}) {
      auto s = MotionScenario::for_item(item);
      s.sides = {side};
      s.duration_s = 3.0;
      s.amplitude_decrement_per_cycle = s.base_amplitude / 10.0;
      const auto seq = generate(s);
      REQUIRE(seq.frames.size() == 90);
      const auto sig = signal_for(seq, side);
      REQUIRE(sig.size() == 90);
      for (std::size_t k = 0; k < sig.size(); ++k) {
        INFO(to_string(item), " ", to_string(side), " k=", k);
        CHECK(std::abs(sig.values[k] - expected_signal(s, sig.timestamps[k])) < 1e-9);
      }
    }
  }
}

TEST_CASE("generated sequences are valid and deterministic") {
  for (UpdrsItem item : kMoving) {
    auto s = MotionScenario::for_item(item);
    s.noise_std = 0.001;
    s.seed = 9;
    s.sides = {Side::Left, Side::Right};
    const auto a = generate(s);
    CHECK(ingest::to_jsonl(a) == ingest::to_jsonl(generate(s)));
    s.seed = 10;
    CHECK(ingest::to_jsonl(a) != ingest::to_jsonl(generate(s)));
    CHECK(validate_sequence(a).empty());
    CHECK(a.item == item);
  }
}

TEST_CASE("finger taps at 1 Hz give ten peaks of 40 degrees") {
  const auto seq = generate(MotionScenario::for_item(UpdrsItem::FingerTaps));
  const auto sig = signals::finger_taps_signal(seq, Side::Right);
  const auto p = peaks::detect_peaks(sig);
  CHECK(p.peaks.size() == 10);
  const auto st = peaks::cadence_stats(sig, p);
  CHECK(std::abs(*st.mean_amplitude - 40.0) < 0.5);
  CHECK(std::abs(*st.interval_slope_s_per_cycle) < 1e-3);
}

TEST_CASE("interval growth is recovered as a cadence slope") {
  auto s = MotionScenario::for_item(UpdrsItem::FingerTaps);
  s.duration_s = 30.0;
  s.interval_growth_s_per_cycle = 0.1;
  const auto sig = signals::finger_taps_signal(generate(s), Side::Right);
  const auto st = peaks::cadence_stats(sig, peaks::detect_peaks(sig));
  CHECK(std::abs(*st.interval_slope_s_per_cycle - 0.1) < 0.005);
}

TEST_CASE("tremor scenarios") {
  auto shaking = MotionScenario::for_item(UpdrsItem::TremorAtRest);
  shaking.duration_s = 10.0;
  const auto on = signals::tremor_signal(generate(shaking));
  REQUIRE_FALSE(on.empty());
  for (double v : on.values) CHECK(v == 1.0);

  auto still = shaking;
  still.tremor_amplitude = 0.0;
  for (double v : signals::tremor_signal(generate(still)).values) CHECK(v == 0.0);

  auto drift = shaking;
  drift.tremor_freq_hz = 0.1;
  for (double v : signals::tremor_signal(generate(drift)).values) CHECK(v == 0.0);
}

TEST_CASE("scenario validation") {
  auto s = MotionScenario::for_item(UpdrsItem::FingerTaps);
  CHECK_NOTHROW(s.validate());
  s.base_amplitude = 200.0;
  CHECK_THROWS_AS(s.validate(), InvalidConfig);
  s = MotionScenario::for_item(UpdrsItem::HandMovement);
  s.fps = 0.0;
  CHECK_THROWS_AS((void)generate(s), InvalidConfig);
  s = MotionScenario::for_item(UpdrsItem::LegAgility);
  s.interval_growth_s_per_cycle = -0.5;
  CHECK_THROWS_AS(s.validate(), InvalidConfig);
  s.interval_growth_s_per_cycle = 0.0;
  s.sides.clear();
  CHECK_THROWS_AS(s.validate(), InvalidConfig);
}

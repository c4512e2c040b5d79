#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walkup/core_types.hpp"

namespace walkup::synth {

/// Parameters of a synthetic recording. Each movement cycle is a raised
/// cosine (1 - cos 2*pi*phase) / 2 scaled by the cycle amplitude, so the
/// signal rests at its baseline at cycle boundaries and reaches the full
/// excursion mid-cycle.
///
/// base_amplitude is in degrees for the angle items and image units for
/// hand_movement. Baselines: finger_taps 5 deg opening plus amplitude,
/// alternating_hands 10 deg plus amplitude, leg_agility 175 deg minus
/// amplitude, foot_taps 100 deg minus amplitude, hand_movement 0.05 plus
/// amplitude.
struct MotionScenario {
  UpdrsItem item = UpdrsItem::FingerTaps;
  double duration_s = 10.0;
  double fps = 30.0;
  double base_amplitude = 40.0;
  double frequency_hz = 1.0;
  double amplitude_decrement_per_cycle = 0.0;
  double interval_growth_s_per_cycle = 0.0;  // cycle i lasts 1/f + i * growth
  double tremor_amplitude = 0.0;             // x displacement of the wrist, image units
  double tremor_freq_hz = 5.0;
  double noise_std = 0.0;  // gaussian, added to every emitted x and y
  std::uint64_t seed = 0;
  std::vector<Side> sides = {Side::Right};  // animated sides
  std::string subject_id = "synthetic";

  /// Reasonable defaults for an item (amplitude in the item's units).
  [[nodiscard]] static MotionScenario for_item(UpdrsItem item);

  /// Throws InvalidConfig.
  void validate() const;
};

/// Excursion at time t: amplitude of the current cycle times the raised
/// cosine of its phase. Never negative.
[[nodiscard]] double drive(const MotionScenario& s, double t);

/// Noise-free value the item's signal builder should return at time t for
/// an animated side. Not defined for tremor_at_rest.
[[nodiscard]] double expected_signal(const MotionScenario& s, double t);

/// Frame count round(duration_s * fps) at timestamps k / fps. Bit-identical
/// for identical scenarios.
[[nodiscard]] LandmarkSequence generate(const MotionScenario& s);

}  // namespace walkup::synth

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "walkup/core_types.hpp"
#include "walkup/kinematics.hpp"

namespace walkup::signals {

struct SignalOptions {
  kinematics::Plane plane = kinematics::Plane::Image2D;
  bool normalize_palm = false;  // divide D_2 by the wrist-to-middle-MCP length
  double min_visibility = 0.5;
};

/// Operational definition of "large movement" for the tremor flag.
struct TremorConfig {
  double highpass_cutoff_hz = 2.0;
  double rms_threshold = 0.005;  // normalized image units
  double window_s = 1.0;
  double overlap = 0.5;  // fraction of a window shared with the next one

  void validate() const;
};

// Per-pose signal values. These throw MissingLandmark or DegenerateVector.

/// Angle at the wrist between the index-tip and thumb-tip rays (degrees).
[[nodiscard]] double finger_tap_angle(const HandPose& hand, const SignalOptions& opts = {});

/// Mean wrist distance of the index, middle, ring and pinky tips.
[[nodiscard]] double hand_openness(const HandPose& hand, const SignalOptions& opts = {});

/// Angle between the pinky-tip -> thumb-tip vector and the image horizontal.
[[nodiscard]] double hand_tilt(const HandPose& hand, const SignalOptions& opts = {});

/// Angle at the hip between the thigh (hip -> knee) and trunk (hip -> shoulder).
[[nodiscard]] double leg_raise_angle(const BodyPose& body, Side side, const SignalOptions& opts = {});

/// Angle at the ankle between the shin (ankle -> knee) and foot (ankle -> foot index).
[[nodiscard]] double ankle_angle(const BodyPose& body, Side side, const SignalOptions& opts = {});

// Series builders. Frames lacking the pose, with a required landmark below
// min_visibility, or with a zero-length vector are skipped (a gap).

[[nodiscard]] SignalSeries finger_taps_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts = {});
[[nodiscard]] SignalSeries hand_movement_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts = {});
[[nodiscard]] SignalSeries alternating_hands_signal(const LandmarkSequence& seq, Side side,
                                                    const SignalOptions& opts = {});
[[nodiscard]] SignalSeries leg_agility_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts = {});
[[nodiscard]] SignalSeries foot_taps_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts = {});

/// Windowed tremor flag. Each landmark track (body and any hands) is
/// high-pass filtered with filtfilt; per window, T = 1 iff some landmark's
/// RMS displacement sqrt(mean(hx^2 + hy^2)) exceeds rms_threshold. One value
/// per window, stamped at the window centre.
///
/// Throws SequenceTooShort when the sequence is shorter than one window and
/// Error when no frame carries a body.
[[nodiscard]] SignalSeries tremor_signal(const LandmarkSequence& seq, const TremorConfig& cfg = {},
                                         double min_visibility = 0.5);

/// Dispatches on seq.item. Bilateral items yield a Left and a Right channel;
/// sides with no usable frame are omitted. Throws InvalidConfig when the
/// sequence carries no item.
[[nodiscard]] std::vector<SignalSeries> build_all(const LandmarkSequence& seq, const SignalOptions& opts = {},
                                                  const TremorConfig& tremor = {});

/// `t,value` rows with a header line.
void write_series_csv(std::ostream& out, const SignalSeries& series);

/// Reads `t,value` rows back. item/channel are left at their defaults.
/// Throws SchemaError, EmptySeries.
[[nodiscard]] SignalSeries read_series_csv(std::istream& in);

/// `<subject>_<item>_<channel>.csv`; subject defaults to "subject".
[[nodiscard]] std::string series_file_name(const std::string& subject, const SignalSeries& series);

}  // namespace walkup::signals

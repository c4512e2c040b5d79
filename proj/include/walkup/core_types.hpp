#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace walkup {

inline constexpr std::size_t kBodyPointCount = 33;
inline constexpr std::size_t kHandPointCount = 21;

/// One keypoint in normalized image coordinates. z is relative depth.
struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double visibility = 1.0;

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Full-body topology indices read by the signal builders.
namespace body {
inline constexpr std::size_t kLeftShoulder = 11;
inline constexpr std::size_t kRightShoulder = 12;
inline constexpr std::size_t kLeftWrist = 15;
inline constexpr std::size_t kRightWrist = 16;
inline constexpr std::size_t kLeftHip = 23;
inline constexpr std::size_t kRightHip = 24;
inline constexpr std::size_t kLeftKnee = 25;
inline constexpr std::size_t kRightKnee = 26;
inline constexpr std::size_t kLeftAnkle = 27;
inline constexpr std::size_t kRightAnkle = 28;
inline constexpr std::size_t kLeftFootIndex = 31;
inline constexpr std::size_t kRightFootIndex = 32;
}  // namespace body

/// Hand topology indices read by the signal builders.
namespace hand {
inline constexpr std::size_t kWrist = 0;
inline constexpr std::size_t kThumbTip = 4;
inline constexpr std::size_t kIndexTip = 8;
inline constexpr std::size_t kMiddleMcp = 9;
inline constexpr std::size_t kMiddleTip = 12;
inline constexpr std::size_t kRingTip = 16;
// Pinky tip. The hand-orientation signal reads this point; whether the MCP
// (17) would be the better anchor is unresolved, so it lives in one place.
inline constexpr std::size_t kPinkyTip = 20;
}  // namespace hand

enum class Side { Left, Right };

struct BodyPose {
  std::array<Landmark, kBodyPointCount> points{};

  friend bool operator==(const BodyPose&, const BodyPose&) = default;
};

struct HandPose {
  Side side = Side::Right;
  std::array<Landmark, kHandPointCount> points{};

  friend bool operator==(const HandPose&, const HandPose&) = default;
};

struct LandmarkFrame {
  double timestamp = 0.0;  // seconds from recording start
  std::optional<BodyPose> body;
  std::optional<HandPose> left_hand;
  std::optional<HandPose> right_hand;

  [[nodiscard]] const std::optional<HandPose>& hand(Side side) const {
    return side == Side::Left ? left_hand : right_hand;
  }

  friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

enum class UpdrsItem {
  FingerTaps,
  HandMovement,
  AlternatingHands,
  TremorAtRest,
  LegAgility,
  FootTaps,
};

inline constexpr std::array<UpdrsItem, 6> kAllItems = {
    UpdrsItem::FingerTaps,   UpdrsItem::HandMovement, UpdrsItem::AlternatingHands,
    UpdrsItem::TremorAtRest, UpdrsItem::LegAgility,   UpdrsItem::FootTaps,
};

struct LandmarkSequence {
  std::vector<LandmarkFrame> frames;
  double fps = 30.0;
  std::optional<UpdrsItem> item;
  std::string subject_id;

  friend bool operator==(const LandmarkSequence&, const LandmarkSequence&) = default;
};

enum class Channel { Left, Right, Global };

/// One scalar signal channel over time.
struct SignalSeries {
  UpdrsItem item = UpdrsItem::FingerTaps;
  Channel channel = Channel::Global;
  std::vector<double> values;
  std::vector<double> timestamps;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] bool empty() const { return values.empty(); }
};

// snake_case names used in files and on the command line.
[[nodiscard]] std::string_view to_string(UpdrsItem item);
[[nodiscard]] std::string_view to_string(Channel channel);
[[nodiscard]] std::string_view to_string(Side side);
[[nodiscard]] std::optional<UpdrsItem> parse_item(std::string_view name);
[[nodiscard]] std::optional<Channel> parse_channel(std::string_view name);

[[nodiscard]] constexpr Channel to_channel(Side side) {
  return side == Side::Left ? Channel::Left : Channel::Right;
}

/// Whether the item's signal is an angle (degrees) rather than a distance or flag.
[[nodiscard]] bool is_angle_signal(UpdrsItem item);

struct Violation {
  std::string code;     // stable machine-readable identifier
  std::string message;  // human-readable detail
  std::optional<std::size_t> frame;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

/// Diagnoses a sequence against the data-model invariants. Never throws.
///
/// Codes: "empty-sequence", "invalid-fps", "negative-timestamp",
/// "non-increasing-timestamps", "empty-frame", "non-finite-coordinate",
/// "visibility-out-of-range", "hand-side-mismatch",
/// "item-requires-hand-landmarks", "item-requires-body-landmarks".
[[nodiscard]] ValidationReport validate_sequence(const LandmarkSequence& seq);

/// Checks a signal series (equal lengths, monotone time, value domain).
[[nodiscard]] ValidationReport validate_series(const SignalSeries& series);

}  // namespace walkup

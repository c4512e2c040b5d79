#include "walkup/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>

#include "walkup/errors.hpp"

namespace walkup::synth {

namespace {

constexpr double kPi = std::numbers::pi;

double rad(double deg) { return deg * kPi / 180.0; }

struct P2 {
  double x;
  double y;
};

P2 along(P2 origin, double length, double deg_from_up) {
  return {origin.x + length * std::sin(rad(deg_from_up)), origin.y - length * std::cos(rad(deg_from_up))};
}

void put(std::span<Landmark> pts, std::size_t i, P2 p) { pts[i] = Landmark{p.x, p.y, 0.0, 1.0}; }

Landmark mirrored(const Landmark& l) { return {1.0 - l.x, l.y, l.z, l.visibility}; }

bool animated(const MotionScenario& s, Side side) { return std::ranges::find(s.sides, side) != s.sides.end(); }

// Hand of the right side in image coordinates (y grows downwards). Fingers
// fan out upwards from the wrist; the left hand is the mirror image.
constexpr P2 kHandWrist{0.35, 0.60};
constexpr double kFingerDirections[5] = {-40.0, -15.0, -5.0, 5.0, 15.0};  // thumb .. pinky, degrees from up

std::array<Landmark, kHandPointCount> rest_hand() {
  std::array<Landmark, kHandPointCount> pts{};
  put(pts, hand::kWrist, kHandWrist);
  for (std::size_t f = 0; f < 5; ++f) {
    const double first = f == 0 ? 0.03 : 0.07;
    for (std::size_t j = 0; j < 4; ++j) {
      put(pts, 1 + 4 * f + j, along(kHandWrist, first + 0.025 * static_cast<double>(j), kFingerDirections[f]));
    }
  }
  return pts;
}

void pose_hand(const MotionScenario& s, double value, std::array<Landmark, kHandPointCount>& pts) {
  switch (s.item) {
    case UpdrsItem::FingerTaps:
      put(pts, hand::kIndexTip, along(kHandWrist, 0.15, -value / 2.0));
      put(pts, hand::kThumbTip, along(kHandWrist, 0.15, value / 2.0));
      break;
    case UpdrsItem::HandMovement: {
      constexpr std::size_t tips[4] = {hand::kIndexTip, hand::kMiddleTip, hand::kRingTip, hand::kPinkyTip};
      for (std::size_t f = 0; f < 4; ++f) put(pts, tips[f], along(kHandWrist, value, kFingerDirections[f + 1]));
      break;
    }
    case UpdrsItem::AlternatingHands: {
      const P2 pinky{kHandWrist.x + 0.05, kHandWrist.y - 0.12};
      put(pts, hand::kPinkyTip, pinky);
      put(pts, hand::kThumbTip, {pinky.x + 0.1 * std::cos(rad(value)), pinky.y - 0.1 * std::sin(rad(value))});
      break;
    }
    default: break;
  }
}

// Right half of the body; the left half mirrors it. The shoulder sits
// directly above the hip and the shin hangs vertically below the knee.
constexpr P2 kShoulder{0.42, 0.30};
constexpr P2 kHip{0.42, 0.60};
constexpr double kThigh = 0.2;
constexpr double kShin = 0.2;
constexpr double kFoot = 0.08;

struct LegAngles {
  double hip = 175.0;    // shoulder-hip-knee
  double ankle = 100.0;  // knee-ankle-foot
};

void right_body_half(std::span<Landmark> pts, LegAngles legs) {
  put(pts, body::kRightShoulder, kShoulder);
  put(pts, 14, {0.39, 0.45});  // elbow
  put(pts, body::kRightWrist, {0.37, 0.58});
  put(pts, 16 + 2, {0.36, 0.62});
  put(pts, 18 + 2, {0.365, 0.625});
  put(pts, 20 + 2, {0.375, 0.615});
  put(pts, body::kRightHip, kHip);
  // Knee swings outwards (towards smaller x) as the hip angle closes.
  const P2 knee = along(kHip, kThigh, 180.0 + (180.0 - legs.hip));
  put(pts, body::kRightKnee, knee);
  const P2 ankle{knee.x, knee.y + kShin};
  put(pts, body::kRightAnkle, ankle);
  put(pts, 30, {ankle.x + 0.01, ankle.y + 0.02});  // heel
  put(pts, body::kRightFootIndex, along(ankle, kFoot, -legs.ankle));
}

BodyPose body_pose(const MotionScenario& s, double t, double right_value, double left_value) {
  BodyPose pose;
  auto& pts = pose.points;
  // Face, on the midline.
  put(pts, 0, {0.5, 0.12});
  for (std::size_t i = 1; i <= 3; ++i) {
    put(pts, i, {0.51 + 0.01 * static_cast<double>(i), 0.10});
    put(pts, i + 3, {0.49 - 0.01 * static_cast<double>(i), 0.10});
  }
  put(pts, 7, {0.55, 0.11});
  put(pts, 8, {0.45, 0.11});
  put(pts, 9, {0.52, 0.16});
  put(pts, 10, {0.48, 0.16});

  auto legs_for = [&](double value) {
    LegAngles legs;
    if (s.item == UpdrsItem::LegAgility) legs.hip = value;
    if (s.item == UpdrsItem::FootTaps) legs.ankle = value;
    return legs;
  };
  std::array<Landmark, kBodyPointCount> left{};
  right_body_half(pts, legs_for(right_value));
  right_body_half(left, legs_for(left_value));
  for (std::size_t i = 12; i < kBodyPointCount; i += 2) pts[i - 1] = mirrored(left[i]);

  if (s.tremor_amplitude > 0.0) {
    const double shift = s.tremor_amplitude * std::sin(2.0 * kPi * s.tremor_freq_hz * t);
    if (animated(s, Side::Right)) pts[body::kRightWrist].x += shift;
    if (animated(s, Side::Left)) pts[body::kLeftWrist].x += shift;
  }
  return pose;
}

double baseline(UpdrsItem item) {
  switch (item) {
    case UpdrsItem::FingerTaps: return 5.0;
    case UpdrsItem::HandMovement: return 0.05;
    case UpdrsItem::AlternatingHands: return 10.0;
    case UpdrsItem::LegAgility: return 175.0;
    case UpdrsItem::FootTaps: return 100.0;
    case UpdrsItem::TremorAtRest: return 0.0;
  }
  return 0.0;
}

double direction(UpdrsItem item) {
  return item == UpdrsItem::LegAgility || item == UpdrsItem::FootTaps ? -1.0 : 1.0;
}

bool uses_hands(UpdrsItem item) {
  return item == UpdrsItem::FingerTaps || item == UpdrsItem::HandMovement || item == UpdrsItem::AlternatingHands;
}

}  // namespace

MotionScenario MotionScenario::for_item(UpdrsItem item) {
  MotionScenario s;
  s.item = item;
  switch (item) {
    case UpdrsItem::FingerTaps: s.base_amplitude = 40.0; break;
    case UpdrsItem::HandMovement: s.base_amplitude = 0.1; break;
    case UpdrsItem::AlternatingHands: s.base_amplitude = 60.0; break;
    case UpdrsItem::LegAgility: s.base_amplitude = 30.0; break;
    case UpdrsItem::FootTaps: s.base_amplitude = 20.0; break;
    case UpdrsItem::TremorAtRest:
      s.base_amplitude = 0.0;
      s.tremor_amplitude = 0.02;
      break;
  }
  return s;
}

void MotionScenario::validate() const {
  if (!(duration_s > 0.0)) throw InvalidConfig("duration_s must be positive");
  if (!(fps > 0.0)) throw InvalidConfig("fps must be positive");
  if (!(frequency_hz > 0.0)) throw InvalidConfig("frequency_hz must be positive");
  if (!(base_amplitude >= 0.0)) throw InvalidConfig("base_amplitude must be non-negative");
  if (!(amplitude_decrement_per_cycle >= 0.0)) throw InvalidConfig("amplitude_decrement_per_cycle must be non-negative");
  if (!std::isfinite(interval_growth_s_per_cycle)) throw InvalidConfig("interval_growth_s_per_cycle must be finite");
  if (!(tremor_amplitude >= 0.0)) throw InvalidConfig("tremor_amplitude must be non-negative");
  if (!(tremor_freq_hz > 0.0)) throw InvalidConfig("tremor_freq_hz must be positive");
  if (!(noise_std >= 0.0)) throw InvalidConfig("noise_std must be non-negative");
  if (sides.empty()) throw InvalidConfig("at least one side must be animated");

  double limit = 0.0;
  switch (item) {
    case UpdrsItem::FingerTaps: limit = 175.0; break;
    case UpdrsItem::HandMovement: limit = 0.4; break;
    case UpdrsItem::AlternatingHands: limit = 80.0; break;
    case UpdrsItem::LegAgility: limit = 170.0; break;
    case UpdrsItem::FootTaps: limit = 100.0; break;
    case UpdrsItem::TremorAtRest: limit = std::numeric_limits<double>::infinity(); break;
  }
  if (base_amplitude > limit) throw InvalidConfig("base_amplitude too large for " + std::string(to_string(item)));

  // Every cycle that starts inside the recording must have positive length.
  double start = 0.0;
  for (std::size_t i = 0; start < duration_s; ++i) {
    const double period = 1.0 / frequency_hz + static_cast<double>(i) * interval_growth_s_per_cycle;
    if (!(period > 0.0)) throw InvalidConfig("interval_growth_s_per_cycle shrinks a cycle to zero length");
    start += period;
  }
}

double drive(const MotionScenario& s, double t) {
  if (t < 0.0) return 0.0;
  double start = 0.0;
  std::size_t i = 0;
  double period = 1.0 / s.frequency_hz;
  while (t >= start + period) {
    start += period;
    ++i;
    period = 1.0 / s.frequency_hz + static_cast<double>(i) * s.interval_growth_s_per_cycle;
  }
  const double amplitude = std::max(0.0, s.base_amplitude - static_cast<double>(i) * s.amplitude_decrement_per_cycle);
  const double phase = (t - start) / period;
  return amplitude * 0.5 * (1.0 - std::cos(2.0 * kPi * phase));
}

double expected_signal(const MotionScenario& s, double t) {
  return baseline(s.item) + direction(s.item) * drive(s, t);
}

LandmarkSequence generate(const MotionScenario& s) {
  s.validate();
  LandmarkSequence seq;
  seq.fps = s.fps;
  seq.item = s.item;
  seq.subject_id = s.subject_id;

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto jitter = [&](auto& points) {
    if (s.noise_std == 0.0) return;
    for (Landmark& l : points) {
      l.x += s.noise_std * gauss(rng);
      l.y += s.noise_std * gauss(rng);
    }
  };

  const auto frames = static_cast<std::size_t>(std::llround(s.duration_s * s.fps));
  const bool tremor = s.item == UpdrsItem::TremorAtRest;
  seq.frames.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / s.fps;
    const double moving = tremor ? 0.0 : expected_signal(s, t);
    const double still = baseline(s.item);
    const double right = animated(s, Side::Right) ? moving : still;
    const double left = animated(s, Side::Left) ? moving : still;

    LandmarkFrame frame;
    frame.timestamp = t;
    frame.body = body_pose(s, t, right, left);
    jitter(frame.body->points);
    if (uses_hands(s.item)) {
      for (Side side : s.sides) {
        HandPose hp;
        hp.side = side;
        hp.points = rest_hand();
        pose_hand(s, side == Side::Right ? right : left, hp.points);
        if (side == Side::Left) {
          for (Landmark& l : hp.points) l = mirrored(l);
        }
        jitter(hp.points);
        (side == Side::Left ? frame.left_hand : frame.right_hand) = hp;
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace walkup::synth

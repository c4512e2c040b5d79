#include "walkup/core_types.hpp"

#include <cmath>
#include <string>

namespace walkup {

std::string_view to_string(UpdrsItem item) {
  switch (item) {
    case UpdrsItem::FingerTaps: return "finger_taps";
    case UpdrsItem::HandMovement: return "hand_movement";
    case UpdrsItem::AlternatingHands: return "alternating_hands";
    case UpdrsItem::TremorAtRest: return "tremor_at_rest";
    case UpdrsItem::LegAgility: return "leg_agility";
    case UpdrsItem::FootTaps: return "foot_taps";
  }
  return "unknown";
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Left: return "left";
    case Channel::Right: return "right";
    case Channel::Global: return "global";
  }
  return "unknown";
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::optional<UpdrsItem> parse_item(std::string_view name) {
  for (UpdrsItem item : kAllItems) {
    if (to_string(item) == name) return item;
  }
  return std::nullopt;
}

std::optional<Channel> parse_channel(std::string_view name) {
  for (Channel c : {Channel::Left, Channel::Right, Channel::Global}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool is_angle_signal(UpdrsItem item) {
  return item != UpdrsItem::HandMovement && item != UpdrsItem::TremorAtRest;
}

namespace {

bool requires_hand(UpdrsItem item) {
  return item == UpdrsItem::FingerTaps || item == UpdrsItem::HandMovement ||
         item == UpdrsItem::AlternatingHands;
}

template <std::size_t N>
void check_points(const std::array<Landmark, N>& points, std::size_t frame,
                  std::string_view pose, ValidationReport& out) {
  for (std::size_t i = 0; i < N; ++i) {
    const Landmark& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      out.push_back({"non-finite-coordinate",
                     std::string(pose) + " landmark " + std::to_string(i) + " has a non-finite coordinate",
                     frame});
    }
    if (!(p.visibility >= 0.0 && p.visibility <= 1.0)) {
      out.push_back({"visibility-out-of-range",
                     std::string(pose) + " landmark " + std::to_string(i) + " visibility outside [0,1]",
                     frame});
    }
  }
}

}  // namespace

ValidationReport validate_sequence(const LandmarkSequence& seq) {
  ValidationReport out;
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
    out.push_back({"invalid-fps", "fps must be a finite positive number", std::nullopt});
  }
  if (seq.frames.empty()) {
    out.push_back({"empty-sequence", "sequence has no frames", std::nullopt});
    return out;
  }

  bool any_hand = false;
  bool any_body = false;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const LandmarkFrame& frame = seq.frames[f];
    if (!std::isfinite(frame.timestamp) || frame.timestamp < 0.0) {
      out.push_back({"negative-timestamp", "timestamp must be finite and non-negative", f});
    }
    if (f > 0 && !(frame.timestamp > seq.frames[f - 1].timestamp)) {
      out.push_back({"non-increasing-timestamps", "non-increasing timestamps", f});
    }
    if (!frame.body && !frame.left_hand && !frame.right_hand) {
      out.push_back({"empty-frame", "frame carries no body or hand landmarks", f});
    }
    if (frame.body) {
      any_body = true;
      check_points(frame.body->points, f, "body", out);
    }
    if (frame.left_hand) {
      any_hand = true;
      if (frame.left_hand->side != Side::Left) {
        out.push_back({"hand-side-mismatch", "left_hand slot holds a right hand", f});
      }
      check_points(frame.left_hand->points, f, "left_hand", out);
    }
    if (frame.right_hand) {
      any_hand = true;
      if (frame.right_hand->side != Side::Right) {
        out.push_back({"hand-side-mismatch", "right_hand slot holds a left hand", f});
      }
      check_points(frame.right_hand->points, f, "right_hand", out);
    }
  }

  if (seq.item) {
    if (requires_hand(*seq.item) && !any_hand) {
      out.push_back({"item-requires-hand-landmarks", "item requires hand landmarks", std::nullopt});
    }
    if (!requires_hand(*seq.item) && !any_body) {
      out.push_back({"item-requires-body-landmarks", "item requires body landmarks", std::nullopt});
    }
  }
  return out;
}

ValidationReport validate_series(const SignalSeries& series) {
  ValidationReport out;
  if (series.values.size() != series.timestamps.size()) {
    out.push_back({"length-mismatch", "values and timestamps differ in length", std::nullopt});
    return out;
  }
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double v = series.values[i];
    if (!std::isfinite(v)) {
      out.push_back({"non-finite-value", "signal value is not finite", i});
      continue;
    }
    if (i > 0 && !(series.timestamps[i] > series.timestamps[i - 1])) {
      out.push_back({"non-increasing-timestamps", "non-increasing timestamps", i});
    }
    if (series.item == UpdrsItem::TremorAtRest) {
      if (v != 0.0 && v != 1.0) out.push_back({"tremor-not-binary", "tremor value outside {0,1}", i});
    } else if (is_angle_signal(series.item)) {
      if (v < 0.0 || v > 180.0) out.push_back({"angle-out-of-range", "angle outside [0,180]", i});
    }
  }
  return out;
}

}  // namespace walkup

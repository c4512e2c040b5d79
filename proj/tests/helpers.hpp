#pragma once

// Small builders shared by the unit tests.

#include <random>

#include "walkup/core_types.hpp"

namespace testutil {

inline walkup::BodyPose flat_body(double x = 0.5, double y = 0.5) {
  walkup::BodyPose b;
  for (auto& p : b.points) p = {x, y, 0.0, 1.0};
  return b;
}

inline walkup::HandPose flat_hand(walkup::Side side, double x = 0.5, double y = 0.5) {
  walkup::HandPose h;
  h.side = side;
  for (auto& p : h.points) p = {x, y, 0.0, 1.0};
  return h;
}

template <class Points>
void randomize(Points& pts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng) - 0.5, u(rng)};
}

/// Frames at k / fps with random landmarks; each pose present with
/// probability 3/4 (at least one per frame).
inline walkup::LandmarkSequence random_sequence(std::mt19937_64& rng, std::size_t frames, double fps = 30.0) {
  walkup::LandmarkSequence seq;
  seq.fps = fps;
  std::bernoulli_distribution present(0.75);
  for (std::size_t k = 0; k < frames; ++k) {
    walkup::LandmarkFrame f;
    f.timestamp = static_cast<double>(k) / fps;
    if (present(rng)) randomize((f.body.emplace()).points, rng);
    if (present(rng)) randomize((f.left_hand.emplace(walkup::HandPose{walkup::Side::Left, {}})).points, rng);
    if (present(rng) || (!f.body && !f.left_hand)) {
      randomize((f.right_hand.emplace(walkup::HandPose{walkup::Side::Right, {}})).points, rng);
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace testutil

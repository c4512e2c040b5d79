#include "walkup/signals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>

#include "walkup/errors.hpp"
#include "walkup/filter.hpp"
#include "walkup/io_util.hpp"

namespace walkup::signals {

using kinematics::angle_between;
using kinematics::angle_to_horizontal;
using kinematics::vector_between;

namespace {

struct LegPoints {
  std::size_t hip, knee, shoulder, ankle, foot;
};

LegPoints leg_points(Side side) {
  if (side == Side::Left) {
    return {body::kLeftHip, body::kLeftKnee, body::kLeftShoulder, body::kLeftAnkle, body::kLeftFootIndex};
  }
  return {body::kRightHip, body::kRightKnee, body::kRightShoulder, body::kRightAnkle, body::kRightFootIndex};
}

template <class Pose>
using PoseFn = std::function<double(const Pose&)>;

SignalSeries hand_series(const LandmarkSequence& seq, Side side, UpdrsItem item, const PoseFn<HandPose>& fn) {
  SignalSeries out{item, to_channel(side), {}, {}};
  for (const LandmarkFrame& frame : seq.frames) {
    const auto& h = frame.hand(side);
    if (!h) continue;
    try {
      out.values.push_back(fn(*h));
      out.timestamps.push_back(frame.timestamp);
    } catch (const MissingLandmark&) {
    } catch (const DegenerateVector&) {
    }
  }
  return out;
}

SignalSeries body_series(const LandmarkSequence& seq, Side side, UpdrsItem item, const PoseFn<BodyPose>& fn) {
  SignalSeries out{item, to_channel(side), {}, {}};
  for (const LandmarkFrame& frame : seq.frames) {
    if (!frame.body) continue;
    try {
      out.values.push_back(fn(*frame.body));
      out.timestamps.push_back(frame.timestamp);
    } catch (const MissingLandmark&) {
    } catch (const DegenerateVector&) {
    }
  }
  return out;
}

// One landmark coordinate track with its high-passed displacement.
struct Track {
  std::vector<std::size_t> frame;  // frame indices carrying the landmark
  std::vector<double> hx;
  std::vector<double> hy;
};

template <class Getter>
Track filtered_track(const LandmarkSequence& seq, const filter::Biquad& hp, double min_visibility, Getter get) {
  Track track;
  std::vector<std::size_t> run;
  std::vector<double> xs;
  std::vector<double> ys;
  auto flush = [&] {
    if (run.empty()) return;
    auto fx = filter::filtfilt(hp, xs);
    auto fy = filter::filtfilt(hp, ys);
    track.frame.insert(track.frame.end(), run.begin(), run.end());
    track.hx.insert(track.hx.end(), fx.begin(), fx.end());
    track.hy.insert(track.hy.end(), fy.begin(), fy.end());
    run.clear();
    xs.clear();
    ys.clear();
  };
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const Landmark* p = get(seq.frames[f]);
    if (p == nullptr || p->visibility < min_visibility) {
      flush();
      continue;
    }
    run.push_back(f);
    xs.push_back(p->x);
    ys.push_back(p->y);
  }
  flush();
  return track;
}

}  // namespace

void TremorConfig::validate() const {
  if (!(highpass_cutoff_hz > 0.0)) throw InvalidConfig("tremor highpass_cutoff_hz must be positive");
  if (!(rms_threshold > 0.0)) throw InvalidConfig("tremor rms_threshold must be positive");
  if (!(window_s > 0.0)) throw InvalidConfig("tremor window_s must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidConfig("tremor overlap must lie in [0,1)");
}

double finger_tap_angle(const HandPose& h, const SignalOptions& o) {
  const auto index = vector_between(h.points, hand::kIndexTip, hand::kWrist, o.plane, o.min_visibility);
  const auto thumb = vector_between(h.points, hand::kThumbTip, hand::kWrist, o.plane, o.min_visibility);
  return angle_between(index, thumb);
}

double hand_openness(const HandPose& h, const SignalOptions& o) {
  double sum = 0.0;
  for (std::size_t tip : {hand::kIndexTip, hand::kMiddleTip, hand::kRingTip, hand::kPinkyTip}) {
    sum += kinematics::distance(h.points, tip, hand::kWrist, o.plane, o.min_visibility);
  }
  const double mean = sum / 4.0;
  if (!o.normalize_palm) return mean;
  const double palm = kinematics::distance(h.points, hand::kMiddleMcp, hand::kWrist, o.plane, o.min_visibility);
  if (palm <= kinematics::kEpsilon) throw DegenerateVector();
  return mean / palm;
}

double hand_tilt(const HandPose& h, const SignalOptions& o) {
  return angle_to_horizontal(vector_between(h.points, hand::kThumbTip, hand::kPinkyTip, o.plane, o.min_visibility));
}

double leg_raise_angle(const BodyPose& b, Side side, const SignalOptions& o) {
  const LegPoints p = leg_points(side);
  const auto thigh = vector_between(b.points, p.knee, p.hip, o.plane, o.min_visibility);
  const auto trunk = vector_between(b.points, p.shoulder, p.hip, o.plane, o.min_visibility);
  return angle_between(thigh, trunk);
}

double ankle_angle(const BodyPose& b, Side side, const SignalOptions& o) {
  const LegPoints p = leg_points(side);
  const auto shin = vector_between(b.points, p.knee, p.ankle, o.plane, o.min_visibility);
  const auto foot = vector_between(b.points, p.foot, p.ankle, o.plane, o.min_visibility);
  return angle_between(shin, foot);
}

SignalSeries finger_taps_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts) {
  return hand_series(seq, side, UpdrsItem::FingerTaps, [&](const HandPose& h) { return finger_tap_angle(h, opts); });
}

SignalSeries hand_movement_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts) {
  return hand_series(seq, side, UpdrsItem::HandMovement, [&](const HandPose& h) { return hand_openness(h, opts); });
}

SignalSeries alternating_hands_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts) {
  return hand_series(seq, side, UpdrsItem::AlternatingHands, [&](const HandPose& h) { return hand_tilt(h, opts); });
}

SignalSeries leg_agility_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts) {
  return body_series(seq, side, UpdrsItem::LegAgility,
                     [&](const BodyPose& b) { return leg_raise_angle(b, side, opts); });
}

SignalSeries foot_taps_signal(const LandmarkSequence& seq, Side side, const SignalOptions& opts) {
  return body_series(seq, side, UpdrsItem::FootTaps, [&](const BodyPose& b) { return ankle_angle(b, side, opts); });
}

SignalSeries tremor_signal(const LandmarkSequence& seq, const TremorConfig& cfg, double min_visibility) {
  cfg.validate();
  const std::size_t n = seq.frames.size();
  const auto window = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(cfg.window_s * seq.fps)));
  if (n < window) {
    throw SequenceTooShort(std::to_string(n) + " frames is shorter than one " + std::to_string(window) +
                           "-frame tremor window");
  }
  if (std::ranges::none_of(seq.frames, [](const LandmarkFrame& f) { return f.body.has_value(); })) {
    throw Error("tremor_signal: sequence carries no body landmarks");
  }
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(window * (1.0 - cfg.overlap))));
  const filter::Biquad hp = filter::butterworth_highpass(cfg.highpass_cutoff_hz, seq.fps);

  std::vector<Track> tracks;
  for (std::size_t i = 0; i < kBodyPointCount; ++i) {
    tracks.push_back(filtered_track(seq, hp, min_visibility, [i](const LandmarkFrame& f) -> const Landmark* {
      return f.body ? &f.body->points[i] : nullptr;
    }));
  }
  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t i = 0; i < kHandPointCount; ++i) {
      tracks.push_back(filtered_track(seq, hp, min_visibility, [i, side](const LandmarkFrame& f) -> const Landmark* {
        const auto& h = f.hand(side);
        return h ? &h->points[i] : nullptr;
      }));
    }
  }

  SignalSeries out{UpdrsItem::TremorAtRest, Channel::Global, {}, {}};
  for (std::size_t start = 0; start + window <= n; start += hop) {
    const std::size_t end = start + window;
    bool moving = false;
    for (const Track& tr : tracks) {
      const auto lo = std::ranges::lower_bound(tr.frame, start) - tr.frame.begin();
      const auto hi = std::ranges::lower_bound(tr.frame, end) - tr.frame.begin();
      if (hi - lo < 2) continue;
      double acc = 0.0;
      for (auto k = lo; k < hi; ++k) acc += tr.hx[k] * tr.hx[k] + tr.hy[k] * tr.hy[k];
      if (std::sqrt(acc / static_cast<double>(hi - lo)) > cfg.rms_threshold) {
        moving = true;
        break;
      }
    }
    const double t0 = seq.frames[start].timestamp;
    const double t1 = seq.frames[end - 1].timestamp;
    out.values.push_back(moving ? 1.0 : 0.0);
    out.timestamps.push_back(t0 + 0.5 * (t1 - t0));
  }
  return out;
}

std::vector<SignalSeries> build_all(const LandmarkSequence& seq, const SignalOptions& opts,
                                    const TremorConfig& tremor) {
  if (!seq.item) throw InvalidConfig("sequence carries no UPDRS item; pass one explicitly");
  std::vector<SignalSeries> out;
  auto keep = [&out](SignalSeries s) {
    if (!s.empty()) out.push_back(std::move(s));
  };
  for (Side side : {Side::Left, Side::Right}) {
    switch (*seq.item) {
      case UpdrsItem::FingerTaps: keep(finger_taps_signal(seq, side, opts)); break;
      case UpdrsItem::HandMovement: keep(hand_movement_signal(seq, side, opts)); break;
      case UpdrsItem::AlternatingHands: keep(alternating_hands_signal(seq, side, opts)); break;
      case UpdrsItem::LegAgility: keep(leg_agility_signal(seq, side, opts)); break;
      case UpdrsItem::FootTaps: keep(foot_taps_signal(seq, side, opts)); break;
      case UpdrsItem::TremorAtRest: break;
    }
  }
  if (*seq.item == UpdrsItem::TremorAtRest) keep(tremor_signal(seq, tremor, opts.min_visibility));
  return out;
}

void write_series_csv(std::ostream& out, const SignalSeries& s) {
  out << "t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << io::format_number(s.timestamps[i]) << ',' << io::format_number(s.values[i]) << '\n';
  }
}

SignalSeries read_series_csv(std::istream& in) {
  SignalSeries s;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto cells = io::split(text, ',');
    if (!header_seen) {
      header_seen = true;
      if (cells.size() >= 2 && io::trim(cells[0]) == "t" && io::trim(cells[1]) == "value") continue;
      throw SchemaError(line_no, "expected header \"t,value\"");
    }
    if (cells.size() != 2) throw SchemaError(line_no, "expected two cells");
    double t = 0.0;
    double v = 0.0;
    if (!io::parse_number(cells[0], t) || !io::parse_number(cells[1], v)) {
      throw SchemaError(line_no, "cell is not a number");
    }
    s.timestamps.push_back(t);
    s.values.push_back(v);
  }
  if (s.empty()) throw EmptySeries();
  return s;
}

std::string series_file_name(const std::string& subject, const SignalSeries& s) {
  return (subject.empty() ? std::string("subject") : subject) + "_" + std::string(to_string(s.item)) + "_" +
         std::string(to_string(s.channel)) + ".csv";
}

}  // namespace walkup::signals

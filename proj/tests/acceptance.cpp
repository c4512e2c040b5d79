// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracle/naive_features.hpp"
#include "walkup/cli.hpp"
#include "walkup/errors.hpp"
#include "walkup/features.hpp"
#include "walkup/ingest.hpp"
#include "walkup/peaks.hpp"
#include "walkup/report.hpp"
#include "walkup/signals.hpp"
#include "walkup/synth.hpp"

namespace fs = std::filesystem;
using namespace walkup;

namespace {

using Real = long double;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

// ---------------------------------------------------------------------------
// Direct evaluation of the five signal equations.

struct P3 {
  Real x, y, z;
};

P3 sub(const Landmark& a, const Landmark& b, bool use_z) {
  return {Real(a.x) - b.x, Real(a.y) - b.y, use_z ? Real(a.z) - b.z : 0.0L};
}

Real len(const P3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

Real angle_deg(const P3& u, const P3& v) {
  const P3 c{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
  return std::atan2(len(c), u.x * v.x + u.y * v.y + u.z * v.z) * 180.0L / std::numbers::pi_v<Real>;
}

Real eq_finger_taps(const HandPose& h, bool z) {
  return angle_deg(sub(h.points[8], h.points[0], z), sub(h.points[4], h.points[0], z));
}

Real eq_hand_movement(const HandPose& h, bool z, bool palm) {
  Real s = 0;
  for (std::size_t tip : {8, 12, 16, 20}) s += len(sub(h.points[tip], h.points[0], z));
  s /= 4;
  return palm ? s / len(sub(h.points[9], h.points[0], z)) : s;
}

Real eq_alternating_hands(const HandPose& h) {
  const Real dx = Real(h.points[4].x) - h.points[20].x;
  const Real dy = Real(h.points[4].y) - h.points[20].y;
  return std::atan(std::abs(dy) / std::abs(dx)) * 180.0L / std::numbers::pi_v<Real>;
}

Real eq_leg(const BodyPose& b, Side s, bool z) {
  const std::size_t hip = s == Side::Left ? 23 : 24, knee = s == Side::Left ? 25 : 26,
                    shoulder = s == Side::Left ? 11 : 12;
  return angle_deg(sub(b.points[knee], b.points[hip], z), sub(b.points[shoulder], b.points[hip], z));
}

Real eq_foot(const BodyPose& b, Side s, bool z) {
  const std::size_t ankle = s == Side::Left ? 27 : 28, knee = s == Side::Left ? 25 : 26,
                    foot = s == Side::Left ? 31 : 32;
  return angle_deg(sub(b.points[knee], b.points[ankle], z), sub(b.points[foot], b.points[ankle], z));
}

template <class Points>
void random_points(Points& pts, std::mt19937_64& rng) {
  testutil::randomize(pts, rng);
  for (auto& p : pts) p.visibility = 1.0;
}

Outcome criterion_signal_fidelity() {
  Outcome o;
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  auto check = [&](const char* what, double got, Real want) {
    const double err = static_cast<double>(std::abs(Real(got) - want));
    worst = std::max(worst, err);
    if (!(err <= 1e-9)) o.fail(std::string(what) + " off by " + std::to_string(err));
  };
  for (bool z : {false, true}) {
    signals::SignalOptions opts;
    opts.plane = z ? kinematics::Plane::Full3D : kinematics::Plane::Image2D;
    signals::SignalOptions palm = opts;
    palm.normalize_palm = true;
    for (int i = 0; i < 1000; ++i) {
      HandPose h{i % 2 ? Side::Left : Side::Right, {}};
      random_points(h.points, rng);
      BodyPose b;
      random_points(b.points, rng);
      const Side side = i % 2 ? Side::Left : Side::Right;
      check("finger_taps", signals::finger_tap_angle(h, opts), eq_finger_taps(h, z));
      check("hand_movement", signals::hand_openness(h, opts), eq_hand_movement(h, z, false));
      check("hand_movement/palm", signals::hand_openness(h, palm), eq_hand_movement(h, z, true));
      check("alternating_hands", signals::hand_tilt(h, opts), eq_alternating_hands(h));
      check("leg_agility", signals::leg_raise_angle(b, side, opts), eq_leg(b, side, z));
      check("foot_taps", signals::ankle_angle(b, side, opts), eq_foot(b, side, z));
    }
  }
  if (o.pass) {
    std::ostringstream os;
    os << "5 items x 1000 poses x 2 planes, max error " << worst;
    o.detail = os.str();
  }
  return o;
}

// ---------------------------------------------------------------------------

template <class Points>
void transform(Points& pts, double scale, double rot, double tx, double ty) {
  const double c = std::cos(rot), s = std::sin(rot);
  for (auto& p : pts) {
    const double x = p.x, y = p.y;
    p.x = scale * (c * x - s * y) + tx;
    p.y = scale * (s * x + c * y) + ty;
    p.z *= scale;
  }
}

Outcome criterion_invariances() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> scale(0.25, 4.0), shift(-1.0, 1.0), angle(-std::numbers::pi, std::numbers::pi);
  double worst_angle = 0.0, worst_d2 = 0.0;
  auto check_angle = [&](const char* what, double a, double b) {
    worst_angle = std::max(worst_angle, std::abs(a - b));
    if (!(std::abs(a - b) <= 1e-9)) o.fail(std::string(what) + " changed by " + std::to_string(std::abs(a - b)));
  };
  for (int i = 0; i < 500; ++i) {
    HandPose h{Side::Right, {}};
    random_points(h.points, rng);
    BodyPose b;
    random_points(b.points, rng);
    const double s = scale(rng), r = angle(rng), tx = shift(rng), ty = shift(rng);

    HandPose hr = h, hs = h;
    BodyPose br = b;
    transform(hr.points, s, r, tx, ty);
    transform(hs.points, s, 0.0, tx, ty);
    transform(br.points, s, r, tx, ty);

    check_angle("finger_taps", signals::finger_tap_angle(hr), signals::finger_tap_angle(h));
    check_angle("alternating_hands", signals::hand_tilt(hs), signals::hand_tilt(h));
    for (Side side : {Side::Left, Side::Right}) {
      check_angle("leg_agility", signals::leg_raise_angle(br, side), signals::leg_raise_angle(b, side));
      check_angle("foot_taps", signals::ankle_angle(br, side), signals::ankle_angle(b, side));
    }

    HandPose hscaled = h;
    transform(hscaled.points, s, 0.0, 0.0, 0.0);
    const double d = std::abs(signals::hand_openness(hscaled) - s * signals::hand_openness(h));
    worst_d2 = std::max(worst_d2, d);
    if (!(d <= 1e-12)) o.fail("hand_movement homogeneity off by " + std::to_string(d));
  }
  if (o.pass) {
    std::ostringstream os;
    os << "500 transforms, max angle change " << worst_angle << ", max D2 error " << worst_d2;
    o.detail = os.str();
  }
  return o;
}

// ---------------------------------------------------------------------------

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, int kind) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  double level = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    switch (kind % 4) {
      case 0: x[t] = g(rng); break;
      case 1: x[t] = level += g(rng); break;
      case 2: x[t] = 40.0 * std::sin(2 * std::numbers::pi * t / 30.0) + g(rng); break;
      default: x[t] = std::exp(g(rng)) * 1e3; break;
    }
  }
  return x;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

Outcome criterion_feature_oracle() {
  Outcome o;
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<std::size_t> length(3, 512);
  const auto specs = oracle::coverage_specs();
  std::size_t compared = 0, undefined = 0, counts = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_series(rng, length(rng), trial);
    for (const auto& spec : specs) {
      const auto got = features::compute(x, spec);
      const auto want = oracle::feature(x, spec);
      if (!want) {
        ++undefined;
        if (got.ok()) o.fail(spec.id() + " defined but oracle undefined");
        continue;
      }
      if (!got.ok()) {
        o.fail(spec.id() + " undefined (" + got.reason + ") n=" + std::to_string(x.size()));
        continue;
      }
      ++compared;
      if (!close(got.value, *want)) {
        std::ostringstream os;
        os.precision(17);
        os << spec.id() << " n=" << x.size() << ": " << got.value << " vs " << *want;
        o.fail(os.str());
      }
    }

    Real mu = 0, var = 0;
    for (double v : x) mu += v;
    mu /= x.size();
    for (double v : x) var += (v - mu) * (v - mu);
    const double sd = static_cast<double>(std::sqrt(var / x.size()));
    for (std::size_t m : {1, 2, 3}) {
      for (double r : {0.1, 0.2, 0.5}) {
        const double tol = r * sd;
        ++counts;
        if (features::template_match_counts(x, m, tol) != oracle::template_counts(x, m, tol)) {
          o.fail("approximate entropy counts differ, m=" + std::to_string(m));
        }
        const auto c = features::sample_entropy_counts(x, m, tol);
        const auto [b, a] = oracle::sample_entropy_counts(x, m, tol);
        if (c.matches_m != b || c.matches_m_plus_1 != a) o.fail("sample entropy counts differ, m=" + std::to_string(m));
      }
    }
  }
  std::vector<std::string_view> seen;
  for (const auto& s : specs) {
    if (std::ranges::find(seen, std::string_view(s.name())) == seen.end()) seen.push_back(s.name());
  }
  if (seen.size() != 21) o.fail("coverage set spans " + std::to_string(seen.size()) + " features");
  if (o.pass) {
    o.detail = std::to_string(compared) + " values within 1e-9, " + std::to_string(undefined) +
               " undefined in both, " + std::to_string(counts) + " exact count sets";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_spectral() {
  Outcome o;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi), amp(0.5, 5.0);
  double worst_bin = 0.0, worst_centroid = 0.0;
  int tones = 0;
  for (std::size_t n : {8, 30, 64, 100, 127, 256, 300, 512}) {
    for (std::size_t k = 1; k < n / 2; k += std::max<std::size_t>(1, n / 7)) {
      const double a = amp(rng), ph = phase(rng);
      std::vector<double> x(n);
      for (std::size_t t = 0; t < n; ++t) x[t] = a * std::cos(2 * std::numbers::pi * k * t / n + ph);
      const auto X = features::dft(x);
      for (std::size_t j = 0; j < n; ++j) {
        const double want = (j == k || j == n - k) ? a * n / 2.0 : 0.0;
        const double err = std::abs(std::abs(X[j]) - want);
        worst_bin = std::max(worst_bin, err);
        if (!(err < 1e-9)) o.fail("n=" + std::to_string(n) + " bin " + std::to_string(j) + " off by " + std::to_string(err));
      }
      const auto c = features::compute(
          x, features::FeatureSpec::make("fft_aggregated", {{"aggtype", std::string("centroid")}}));
      const double err = std::abs(c.value - static_cast<double>(k));
      worst_centroid = std::max(worst_centroid, err);
      if (!c.ok() || !(err < 1e-6)) o.fail("centroid n=" + std::to_string(n) + " k=" + std::to_string(k));
      const auto coeff = features::compute(
          x, features::FeatureSpec::make("fft_coefficient",
                                         {{"coeff", static_cast<std::int64_t>(k)}, {"attr", std::string("abs")}}));
      if (!(std::abs(coeff.value - a * n / 2.0) < 1e-9)) o.fail("fft_coefficient n=" + std::to_string(n));
      ++tones;
    }
  }
  if (o.pass) {
    std::ostringstream os;
    os << tones << " tones, max bin error " << worst_bin << ", max centroid error " << worst_centroid;
    o.detail = os.str();
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_synthetic_end_to_end() {
  Outcome o;
  std::ostringstream os;
  {
    const auto s = synth::MotionScenario::for_item(UpdrsItem::FingerTaps);
    const auto sig = signals::finger_taps_signal(synth::generate(s), Side::Right);
    const auto p = peaks::detect_peaks(sig);
    const auto st = peaks::cadence_stats(sig, p);
    if (p.peaks.size() != 10) o.fail(std::to_string(p.peaks.size()) + " peaks instead of 10");
    if (!st.mean_amplitude || !(std::abs(*st.mean_amplitude - 40.0) <= 0.5)) o.fail("amplitude off");
    if (!st.interval_slope_s_per_cycle || !(std::abs(*st.interval_slope_s_per_cycle) <= 1e-3)) o.fail("slope off");
    os << "steady: " << p.peaks.size() << " peaks, amplitude " << st.mean_amplitude.value_or(NAN) << ", slope "
       << st.interval_slope_s_per_cycle.value_or(NAN);
  }
  {
    auto s = synth::MotionScenario::for_item(UpdrsItem::FingerTaps);
    s.duration_s = 30.0;
    s.interval_growth_s_per_cycle = 0.1;
    const auto sig = signals::finger_taps_signal(synth::generate(s), Side::Right);
    const auto st = peaks::cadence_stats(sig, peaks::detect_peaks(sig));
    if (!st.interval_slope_s_per_cycle || !(std::abs(*st.interval_slope_s_per_cycle - 0.1) <= 0.005)) {
      o.fail("decelerating slope off");
    }
    os << "; decelerating slope " << st.interval_slope_s_per_cycle.value_or(NAN);
  }
  if (o.pass) o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_tremor() {
  Outcome o;
  auto s = synth::MotionScenario::for_item(UpdrsItem::TremorAtRest);
  s.tremor_amplitude = 0.02;
  s.tremor_freq_hz = 5.0;
  auto expect = [&](const synth::MotionScenario& sc, double want, const char* what) {
    const auto t = signals::tremor_signal(synth::generate(sc));
    if (t.empty()) o.fail(std::string(what) + ": no windows");
    for (double v : t.values) {
      if (v != want) {
        o.fail(std::string(what) + ": unexpected window value");
        break;
      }
    }
    return t.size();
  };
  const auto windows = expect(s, 1.0, "5 Hz");
  auto still = s;
  still.tremor_amplitude = 0.0;
  expect(still, 0.0, "static");
  auto drift = s;
  drift.tremor_freq_hz = 0.1;
  drift.tremor_amplitude = 0.05;
  expect(drift, 0.0, "0.1 Hz drift");
  if (o.pass) o.detail = std::to_string(windows) + " windows per scenario";
  return o;
}

// ---------------------------------------------------------------------------

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream os, es;
  const int code = cli::run(args, os, es);
  if (out) *out = os.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Mutates every scalar leaf of a JSON object in turn.
void for_each_leaf(nlohmann::json& j, const std::function<void(nlohmann::json&, const std::string&)>& fn,
                   const std::string& path = "") {
  for (auto& [key, v] : j.items()) {
    const std::string p = path + "/" + key;
    if (v.is_object()) {
      for_each_leaf(v, fn, p);
    } else {
      fn(v, p);
    }
  }
}

Outcome criterion_determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("walkup_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir / "corpus");
  std::vector<std::string> inputs;
  for (UpdrsItem item : {UpdrsItem::FingerTaps, UpdrsItem::HandMovement, UpdrsItem::AlternatingHands,
                         UpdrsItem::TremorAtRest, UpdrsItem::LegAgility, UpdrsItem::FootTaps}) {
    const std::string file = (dir / "corpus" / (std::string(to_string(item)) + ".jsonl")).string();
    if (run_cli({"synth", "--item", std::string(to_string(item)), "--sides", "both", "--noise", "0.001", "--seed", "7",
             "--out", file}) != 0) {
      o.fail("synth failed for " + std::string(to_string(item)));
    }
    inputs.push_back(file);
  }

  auto analyze = [&](const std::string& out, const std::string& jobs, const std::string& threads) {
    std::vector<std::string> args{"analyze", "--out", out, "--jobs", jobs, "--threads", threads};
    for (const auto& f : inputs) {
      args.push_back("--in");
      args.push_back(f);
    }
    return run_cli(args);
  };
  const fs::path run1 = dir / "run1", run2 = dir / "run2";
  if (analyze(run1.string(), "1", "1") != 0 || analyze(run2.string(), "4", "3") != 0) o.fail("analyze failed");

  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(run1)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path twin = run2 / fs::relative(e.path(), run1);
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) o.fail("differs: " + fs::relative(e.path(), run1).string());
  }
  std::size_t files2 = 0;
  for (const auto& e : fs::recursive_directory_iterator(run2)) files2 += e.is_regular_file() ? 1 : 0;
  if (files != files2 || files == 0) o.fail("output file sets differ");

  // Every default knob changes the hash.
  const report::AnalysisConfig defaults;
  const std::string base = defaults.hash();
  nlohmann::json j = defaults.to_json();
  std::size_t knobs = 0;
  for_each_leaf(j, [&](nlohmann::json& v, const std::string& path) {
    if (path == "/version") return;
    const nlohmann::json saved = v;
    if (v.is_null()) {
      v = 60.0;
    } else if (v.is_boolean()) {
      v = !v.get<bool>();
    } else if (v.is_number_integer()) {
      v = v.get<std::int64_t>() + 1;
    } else if (v.is_number()) {
      const double d = v.get<double>();
      v = d > 0.0 && d < 1.0 ? d / 2 : d + 1;
    } else if (v.is_string()) {
      const std::string s = v.get<std::string>();
      v = s == "2d" ? "3d" : s == "3d" ? "2d" : s == "drop" ? "hold_last" : "drop";
    } else if (v.is_array()) {
      v.erase(v.size() - 1);
    }
    ++knobs;
    try {
      if (report::AnalysisConfig::from_json(j).hash() == base) o.fail("hash unchanged by " + path);
    } catch (const std::exception& e) {
      o.fail("override of " + path + " rejected: " + e.what());
    }
    v = saved;
  });

  std::string dumped;
  run_cli({"analyze", "--dump-config", "--min-prominence", "0.25"}, &dumped);
  if (report::AnalysisConfig::from_json(nlohmann::json::parse(dumped)).hash() == base) o.fail("CLI override kept the hash");

  fs::remove_all(dir);
  if (o.pass) {
    o.detail = std::to_string(files) + " files byte-identical across runs; " + std::to_string(knobs) +
               " overridden knobs each change the hash";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_round_trip() {
  Outcome o;
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> exponent(-30, 30);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr UpdrsItem items[] = {UpdrsItem::FingerTaps, UpdrsItem::HandMovement, UpdrsItem::AlternatingHands,
                                 UpdrsItem::TremorAtRest, UpdrsItem::LegAgility, UpdrsItem::FootTaps};
  for (int i = 0; i < 100; ++i) {
    auto seq = testutil::random_sequence(rng, 1 + static_cast<std::size_t>(i % 40), 15.0 + i);
    seq.item = items[static_cast<std::size_t>(i) % 6];
    seq.subject_id = "subject \"" + std::to_string(i) + "\"";
    auto scramble = [&](auto& pts) {
      for (auto& p : pts) {
        p.x = u(rng) * std::pow(10.0, exponent(rng));
        p.z = u(rng) * std::pow(10.0, exponent(rng));
      }
    };
    for (auto& f : seq.frames) {
      if (i % 3 == 0 && f.body) scramble(f.body->points);
      if (i % 3 == 1 && f.right_hand) scramble(f.right_hand->points);
    }
    const std::string text = ingest::to_jsonl(seq);
    std::istringstream in(text);
    const auto back = ingest::parse_frames(in, ingest::Format::JsonLines);
    if (!(back == seq)) o.fail("sequence " + std::to_string(i) + " changed");
    if (ingest::to_jsonl(back) != text) o.fail("sequence " + std::to_string(i) + " re-serialized differently");
  }
  if (o.pass) o.detail = "100 sequences lossless";
  return o;
}

struct Criterion {
  int number;
  const char* title;
  double budget_s;
  Outcome (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "signal formula fidelity", 5.0, criterion_signal_fidelity},
      {2, "geometric invariances", 5.0, criterion_invariances},
      {3, "feature oracle equivalence", 60.0, criterion_feature_oracle},
      {4, "spectral correctness", 0.0, criterion_spectral},
      {5, "synthetic end-to-end", 10.0, criterion_synthetic_end_to_end},
      {6, "tremor discrimination", 5.0, criterion_tremor},
      {7, "determinism", 0.0, criterion_determinism},
      {8, "JSONL round-trip", 0.0, criterion_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(c.budget_s) + " s");
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.number, c.title, o.detail.c_str(),
                secs);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}

#include "walkup/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "walkup/errors.hpp"
#include "walkup/io_util.hpp"

namespace walkup::report {

namespace {

using nlohmann::json;

void check_keys(const json& section, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!section.is_object()) throw InvalidConfig(std::string(where) + " must be an object");
  for (const auto& [key, value] : section.items()) {
    if (std::ranges::find(allowed, key) == allowed.end()) {
      throw InvalidConfig("unknown config key " + std::string(where) + "." + key);
    }
  }
}

void read_number(const json& section, std::string_view where, const char* key, double& out) {
  if (!section.contains(key)) return;
  if (!section[key].is_number()) throw InvalidConfig(std::string(where) + "." + key + " must be a number");
  out = section[key].get<double>();
}

void read_bool(const json& section, std::string_view where, const char* key, bool& out) {
  if (!section.contains(key)) return;
  if (!section[key].is_boolean()) throw InvalidConfig(std::string(where) + "." + key + " must be a boolean");
  out = section[key].get<bool>();
}

std::string read_text(const json& section, std::string_view where, const char* key, std::string fallback) {
  if (!section.contains(key)) return fallback;
  if (!section[key].is_string()) throw InvalidConfig(std::string(where) + "." + key + " must be a string");
  return section[key].get<std::string>();
}

json number_or_null(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void AnalysisConfig::validate() const {
  ingest.validate();
  tremor.validate();
  peaks.validate();
  if (!(signal.min_visibility >= 0.0 && signal.min_visibility <= 1.0)) {
    throw InvalidConfig("signals.min_visibility must lie in [0,1]");
  }
  if (features.empty()) throw InvalidConfig("at least one feature spec is required");
}

json AnalysisConfig::to_json() const {
  json j;
  j["version"] = kConfigVersion;
  j["ingest"] = {
      {"resample_fps", number_or_null(ingest.resample_fps)},
      {"min_visibility", ingest.min_visibility},
      {"gap_fill", ingest::to_string(ingest.gap_fill)},
  };
  j["signals"] = {
      {"plane", signal.plane == kinematics::Plane::Full3D ? "3d" : "2d"},
      {"normalize_palm", signal.normalize_palm},
      {"min_visibility", signal.min_visibility},
  };
  j["tremor"] = {
      {"highpass_cutoff_hz", tremor.highpass_cutoff_hz},
      {"rms_threshold", tremor.rms_threshold},
      {"window_s", tremor.window_s},
      {"overlap", tremor.overlap},
  };
  j["peaks"] = {
      {"min_prominence", peaks.min_prominence},
      {"min_separation_s", peaks.min_separation_s},
  };
  j["features"] = features::specs_to_json(features);
  return j;
}

AnalysisConfig AnalysisConfig::from_json(const json& j) {
  AnalysisConfig cfg;
  check_keys(j, "config", {"version", "ingest", "signals", "tremor", "peaks", "features"});
  if (j.contains("version") && (!j["version"].is_number_integer() || j["version"].get<int>() != kConfigVersion)) {
    throw InvalidConfig("unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
  }
  if (j.contains("ingest")) {
    const json& s = j["ingest"];
    check_keys(s, "ingest", {"resample_fps", "min_visibility", "gap_fill"});
    if (s.contains("resample_fps")) {
      if (s["resample_fps"].is_null()) {
        cfg.ingest.resample_fps.reset();
      } else {
        double fps = 0.0;
        read_number(s, "ingest", "resample_fps", fps);
        cfg.ingest.resample_fps = fps;
      }
    }
    read_number(s, "ingest", "min_visibility", cfg.ingest.min_visibility);
    const std::string fill = read_text(s, "ingest", "gap_fill", std::string(ingest::to_string(cfg.ingest.gap_fill)));
    const auto parsed = ingest::parse_gap_fill(fill);
    if (!parsed) throw InvalidConfig("ingest.gap_fill must be hold_last, linear_interp or drop");
    cfg.ingest.gap_fill = *parsed;
  }
  if (j.contains("signals")) {
    const json& s = j["signals"];
    check_keys(s, "signals", {"plane", "normalize_palm", "min_visibility"});
    const std::string plane = read_text(s, "signals", "plane", "2d");
    if (plane != "2d" && plane != "3d") throw InvalidConfig("signals.plane must be 2d or 3d");
    cfg.signal.plane = plane == "3d" ? kinematics::Plane::Full3D : kinematics::Plane::Image2D;
    read_bool(s, "signals", "normalize_palm", cfg.signal.normalize_palm);
    read_number(s, "signals", "min_visibility", cfg.signal.min_visibility);
  }
  if (j.contains("tremor")) {
    const json& s = j["tremor"];
    check_keys(s, "tremor", {"highpass_cutoff_hz", "rms_threshold", "window_s", "overlap"});
    read_number(s, "tremor", "highpass_cutoff_hz", cfg.tremor.highpass_cutoff_hz);
    read_number(s, "tremor", "rms_threshold", cfg.tremor.rms_threshold);
    read_number(s, "tremor", "window_s", cfg.tremor.window_s);
    read_number(s, "tremor", "overlap", cfg.tremor.overlap);
  }
  if (j.contains("peaks")) {
    const json& s = j["peaks"];
    check_keys(s, "peaks", {"min_prominence", "min_separation_s"});
    read_number(s, "peaks", "min_prominence", cfg.peaks.min_prominence);
    read_number(s, "peaks", "min_separation_s", cfg.peaks.min_separation_s);
  }
  if (j.contains("features")) {
    try {
      cfg.features = features::specs_from_json(j["features"]);
    } catch (const std::invalid_argument& e) {
      throw InvalidConfig(std::string("features: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string AnalysisConfig::hash() const { return io::fnv1a_hex(to_json().dump()); }

SignalSummary summarize(const SignalSeries& series) {
  SignalSummary s;
  s.length = series.size();
  if (series.empty()) return s;
  const auto [lo, hi] = std::ranges::minmax(series.values);
  s.min = lo;
  s.max = hi;
  s.mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(series.size());
  return s;
}

AnalysisReport analyze(const LandmarkSequence& seq, const AnalysisConfig& cfg, std::string input_digest,
                       unsigned threads) {
  cfg.validate();
  if (!seq.item) throw InvalidConfig("the item is unknown; set it in the file header or with --item");
  AnalysisReport r;
  r.subject_id = seq.subject_id;
  r.item = *seq.item;
  r.config_hash = cfg.hash();
  r.input_digest = std::move(input_digest);

  const LandmarkSequence prepared = ingest::prepare(seq, cfg.ingest);
  for (SignalSeries& series : signals::build_all(prepared, cfg.signal, cfg.tremor)) {
    ChannelReport ch;
    ch.summary = summarize(series);
    if (r.item != UpdrsItem::TremorAtRest && series.size() >= 3) {
      ch.extrema = peaks::detect_peaks(series, cfg.peaks);
      ch.cadence = peaks::cadence_stats(series, *ch.extrema);
    }
    ch.features = features::extract(series, cfg.features, threads);
    ch.series = std::move(series);
    r.channels.push_back(std::move(ch));
  }
  return r;
}

json to_json(const AnalysisReport& r) {
  json channels = json::array();
  for (const ChannelReport& ch : r.channels) {
    json c;
    c["channel"] = to_string(ch.series.channel);
    c["summary"] = {
        {"length", ch.summary.length},
        {"mean", number_or_null(ch.summary.mean)},
        {"min", number_or_null(ch.summary.min)},
        {"max", number_or_null(ch.summary.max)},
    };
    if (ch.cadence) {
      const peaks::CadenceStats& st = *ch.cadence;
      json peak_times = json::array();
      json trough_times = json::array();
      for (std::size_t i : ch.extrema->peaks) peak_times.push_back(ch.series.timestamps[i]);
      for (std::size_t i : ch.extrema->troughs) trough_times.push_back(ch.series.timestamps[i]);
      c["cadence"] = {
          {"peak_count", st.peak_count},
          {"trough_count", ch.extrema->troughs.size()},
          {"mean_amplitude", number_or_null(st.mean_amplitude)},
          {"mean_interval_s", number_or_null(st.mean_interval_s)},
          {"interval_slope_s_per_cycle", number_or_null(st.interval_slope_s_per_cycle)},
          {"amplitude_slope", number_or_null(st.amplitude_slope)},
          {"signal_mean", number_or_null(st.signal_mean)},
          {"peak_times", peak_times},
          {"trough_times", trough_times},
      };
    } else {
      c["cadence"] = nullptr;
    }
    const json fv = features::to_json(ch.features);
    c["features"] = fv["features"];
    c["feature_reasons"] = fv["reasons"];
    channels.push_back(std::move(c));
  }
  json j;
  j["schema"] = kSchema;
  j["tool_version"] = r.tool_version;
  j["subject"] = r.subject_id;
  j["item"] = to_string(r.item);
  j["config_hash"] = r.config_hash;
  j["input_digest"] = r.input_digest;
  j["channels"] = std::move(channels);
  return j;
}

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

std::string render_svg(const SignalSeries& s, const std::optional<peaks::PeakSet>& extrema) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 300.0;
  constexpr double kMargin = 20.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!s.empty()) {
    const SignalSummary sum = summarize(s);
    const double t0 = s.timestamps.front();
    const double span_t = std::max(s.timestamps.back() - t0, 1e-12);
    const double span_v = sum.max - sum.min > 0.0 ? sum.max - sum.min : 1.0;
    auto px = [&](double t) { return fixed(kMargin + (t - t0) / span_t * (kWidth - 2 * kMargin)); };
    auto py = [&](double v) { return fixed(kHeight - kMargin - (v - sum.min) / span_v * (kHeight - 2 * kMargin)); };

    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << (i ? " " : "") << px(s.timestamps[i]) << ',' << py(s.values[i]);
    }
    out << "\"/>\n";
    out << "<line class=\"mean\" x1=\"" << px(t0) << "\" y1=\"" << py(sum.mean) << "\" x2=\"" << px(s.timestamps.back())
        << "\" y2=\"" << py(sum.mean) << "\" stroke=\"red\" stroke-dasharray=\"4 2\"/>\n";
    if (extrema) {
      for (std::size_t i : extrema->peaks) {
        out << "<circle class=\"peak\" cx=\"" << px(s.timestamps[i]) << "\" cy=\"" << py(s.values[i])
            << "\" r=\"3\" fill=\"red\"/>\n";
      }
      for (std::size_t i : extrema->troughs) {
        out << "<circle class=\"trough\" cx=\"" << px(s.timestamps[i]) << "\" cy=\"" << py(s.values[i])
            << "\" r=\"3\" fill=\"none\" stroke=\"red\"/>\n";
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

void write_plot_csv(std::ostream& out, const SignalSeries& s) {
  const std::string mean = io::format_number(summarize(s).mean);
  out << "t,value,mean\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << io::format_number(s.timestamps[i]) << ',' << io::format_number(s.values[i]) << ',' << mean << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<json>& reports) {
  auto cell = [](const json& v) -> std::string {
    if (v.is_null()) return "";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number()) return io::format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  auto at = [](const json& obj, const char* key) { return obj.is_object() && obj.contains(key) ? obj[key] : json(); };

  out << "subject,item,channel,length,mean,min,max,peak_count,mean_amplitude,mean_interval_s,"
         "interval_slope_s_per_cycle,amplitude_slope,config_hash\n";
  for (const json& r : reports) {
    for (const json& ch : at(r, "channels")) {
      const json summary = at(ch, "summary");
      const json cadence = at(ch, "cadence");
      out << cell(at(r, "subject")) << ',' << cell(at(r, "item")) << ',' << cell(at(ch, "channel")) << ','
          << cell(at(summary, "length")) << ',' << cell(at(summary, "mean")) << ',' << cell(at(summary, "min")) << ','
          << cell(at(summary, "max")) << ',' << cell(at(cadence, "peak_count")) << ','
          << cell(at(cadence, "mean_amplitude")) << ',' << cell(at(cadence, "mean_interval_s")) << ','
          << cell(at(cadence, "interval_slope_s_per_cycle")) << ',' << cell(at(cadence, "amplitude_slope")) << ','
          << cell(at(r, "config_hash")) << '\n';
    }
  }
}

}  // namespace walkup::report

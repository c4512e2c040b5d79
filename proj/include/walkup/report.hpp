#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "walkup/core_types.hpp"
#include "walkup/features.hpp"
#include "walkup/ingest.hpp"
#include "walkup/peaks.hpp"
#include "walkup/signals.hpp"

namespace walkup::report {

inline constexpr std::string_view kSchema = "walkup-report/1";
inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kConfigVersion = 1;

/// Every tunable of the analysis pipeline. The JSON form is the config file
/// format; a partial file overrides only the keys it names.
struct AnalysisConfig {
  ingest::IngestConfig ingest;
  signals::SignalOptions signal;
  signals::TremorConfig tremor;
  peaks::PeakConfig peaks;
  std::vector<features::FeatureSpec> features = features::default_specs();

  /// Throws InvalidConfig.
  void validate() const;

  [[nodiscard]] nlohmann::json to_json() const;

  /// Starts from the defaults. Throws InvalidConfig on unknown keys, wrong
  /// types or a version other than kConfigVersion.
  [[nodiscard]] static AnalysisConfig from_json(const nlohmann::json& j);

  /// FNV-1a of the canonical JSON text; any changed knob changes it.
  [[nodiscard]] std::string hash() const;
};

struct SignalSummary {
  std::size_t length = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ChannelReport {
  SignalSeries series;
  SignalSummary summary;
  std::optional<peaks::PeakSet> extrema;  // absent for the tremor item
  std::optional<peaks::CadenceStats> cadence;
  features::FeatureVector features;
};

struct AnalysisReport {
  std::string subject_id;
  UpdrsItem item = UpdrsItem::FingerTaps;
  std::string tool_version{kToolVersion};
  std::string config_hash;
  std::string input_digest;
  std::vector<ChannelReport> channels;
};

[[nodiscard]] SignalSummary summarize(const SignalSeries& series);

/// Runs gap filling, signal building, peak and cadence analysis and feature
/// extraction. seq.item must be set.
[[nodiscard]] AnalysisReport analyze(const LandmarkSequence& seq, const AnalysisConfig& cfg,
                                     std::string input_digest, unsigned threads = 1);

[[nodiscard]] nlohmann::json to_json(const AnalysisReport& r);

/// Pretty-printed JSON text with a trailing newline.
[[nodiscard]] std::string render_json(const nlohmann::json& j);

/// Signal polyline, a horizontal mean line and red peak/trough markers.
[[nodiscard]] std::string render_svg(const SignalSeries& series, const std::optional<peaks::PeakSet>& extrema);

/// `t,value,mean` rows.
void write_plot_csv(std::ostream& out, const SignalSeries& series);

/// One row per channel of every report, in the order given.
void write_summary_csv(std::ostream& out, const std::vector<nlohmann::json>& reports);

}  // namespace walkup::report

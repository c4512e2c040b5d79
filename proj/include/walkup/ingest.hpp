#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "walkup/core_types.hpp"

namespace walkup::ingest {

enum class Format { JsonLines, Csv };

enum class GapFill { HoldLast, LinearInterp, Drop };

struct IngestConfig {
  std::optional<double> resample_fps;  // resampling is off unless set
  double min_visibility = 0.5;
  GapFill gap_fill = GapFill::LinearInterp;

  /// Throws InvalidConfig.
  void validate() const;
};

[[nodiscard]] std::optional<Format> parse_format(std::string_view name);
[[nodiscard]] std::optional<GapFill> parse_gap_fill(std::string_view name);
[[nodiscard]] std::string_view to_string(GapFill g);
[[nodiscard]] std::string_view to_string(Format f);

/// Reads a landmark file.
///
/// JSONL: an optional header line `{"fps": f, "item": "...", "subject": "..."}`
/// followed by one frame object per line. CSV: optional `# key=value` comment
/// lines (fps, item, subject), then a `t,body_0_x,...,rh_20_v` header row.
/// Without an fps header the rate is estimated from the mean frame spacing.
///
/// Throws UnreadableInput, SchemaError (1-based line) or EmptySequence.
[[nodiscard]] LandmarkSequence parse_frames(std::istream& in, Format format);
[[nodiscard]] LandmarkSequence parse_frames(const std::filesystem::path& path, Format format);

/// Infers the format from the extension (.jsonl/.json vs .csv).
[[nodiscard]] Format guess_format(const std::filesystem::path& path);

void write_jsonl(std::ostream& out, const LandmarkSequence& seq);
void write_csv(std::ostream& out, const LandmarkSequence& seq);
[[nodiscard]] std::string to_jsonl(const LandmarkSequence& seq);

/// Treats landmarks with visibility below cfg.min_visibility as missing and
/// repairs them per cfg.gap_fill, track by track (pose slot x landmark).
///   LinearInterp: interpolate in time between the bracketing observations;
///                 hold the nearest one at either end of the recording.
///   HoldLast:     carry the last observation forward.
///   Drop:         leave missing; signal builders then skip those frames.
/// A pose absent from frames strictly between two frames that carry it is
/// restored (LinearInterp, HoldLast); leading and trailing absences are kept.
/// Filled landmarks get visibility == min_visibility; landmarks that cannot
/// be filled inside a restored pose get visibility 0.
[[nodiscard]] LandmarkSequence fill_gaps(const LandmarkSequence& seq, const IngestConfig& cfg);

/// Resamples onto t_k = k / cfg.resample_fps, measured from the first frame.
/// Coordinates are linearly interpolated between bracketing frames. When a
/// pose is present on one side only, HoldLast keeps the earlier pose,
/// LinearInterp keeps whichever side exists, Drop omits it. Frames left with
/// no pose are omitted.
///
/// Throws EmptySequence, InvalidConfig (no resample_fps).
[[nodiscard]] LandmarkSequence resample(const LandmarkSequence& seq, const IngestConfig& cfg);

/// fill_gaps followed by resample when resample_fps is set.
[[nodiscard]] LandmarkSequence prepare(const LandmarkSequence& seq, const IngestConfig& cfg);

}  // namespace walkup::ingest

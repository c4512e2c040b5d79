#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "walkup/core_types.hpp"

namespace walkup::peaks {

struct PeakConfig {
  double min_prominence = 0.2;    // fraction of the signal range (max - min)
  double min_separation_s = 0.15;

  void validate() const;
};

struct PeakSet {
  std::vector<std::size_t> peaks;
  std::vector<std::size_t> troughs;
};

struct CadenceStats {
  std::size_t peak_count = 0;
  std::optional<double> mean_amplitude;              // mean of peak - adjacent trough
  std::optional<double> mean_interval_s;             // needs >= 2 peaks
  std::optional<double> interval_slope_s_per_cycle;  // needs >= 3 peaks
  std::optional<double> amplitude_slope;             // needs >= 2 peaks with a trough
  double signal_mean = 0.0;
};

/// Interior local maxima. A flat top counts once, at its (left-)middle
/// sample, when both neighbours of the plateau are strictly lower.
[[nodiscard]] std::vector<std::size_t> local_maxima(std::span<const double> x);

/// Topographic prominence of each index in `peaks`: height above the higher
/// of the two lowest points reached before meeting strictly higher ground
/// (or the series boundary) on either side.
[[nodiscard]] std::vector<double> prominences(std::span<const double> x, std::span<const std::size_t> peaks);

/// Peaks and troughs with prominence >= min_prominence * range, selected
/// greedily by descending prominence subject to min_separation_s, then made
/// to alternate: of two consecutive extrema of the same kind the less
/// extreme one is dropped. Endpoints are never reported.
///
/// Throws SeriesTooShort for fewer than 3 samples.
[[nodiscard]] PeakSet detect_peaks(const SignalSeries& series, const PeakConfig& cfg = {});

/// Sub-sample time of a peak from a parabola through its two neighbours.
[[nodiscard]] double refined_peak_time(const SignalSeries& series, std::size_t index);

/// Ordinary least-squares slope of y against 0, 1, ..., n-1. Needs n >= 2.
[[nodiscard]] double ols_slope(std::span<const double> y);

/// Cycle statistics. Peak times are refined with refined_peak_time before
/// intervals are taken; amplitudes use the sampled values.
[[nodiscard]] CadenceStats cadence_stats(const SignalSeries& series, const PeakSet& extrema);

/// `t,value,kind` rows (kind = peak|trough) in time order.
void write_overlay_csv(std::ostream& out, const SignalSeries& series, const PeakSet& extrema);

}  // namespace walkup::peaks

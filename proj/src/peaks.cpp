#include "walkup/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "walkup/errors.hpp"
#include "walkup/io_util.hpp"

namespace walkup::peaks {

namespace {

std::vector<std::size_t> select(std::span<const double> x, std::span<const double> t, double threshold,
                                double min_separation) {
  const auto candidates = local_maxima(x);
  const auto prom = prominences(x, candidates);

  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (prom[k] >= threshold) order.push_back(k);
  }
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return prom[a] > prom[b]; });

  std::vector<std::size_t> kept;
  for (std::size_t k : order) {
    const std::size_t i = candidates[k];
    const bool clear = std::ranges::all_of(kept, [&](std::size_t j) { return std::abs(t[i] - t[j]) >= min_separation; });
    if (clear) kept.push_back(i);
  }
  std::ranges::sort(kept);
  return kept;
}

}  // namespace

void PeakConfig::validate() const {
  if (!(min_prominence > 0.0 && min_prominence <= 1.0)) throw InvalidConfig("min_prominence must lie in (0,1]");
  if (!(min_separation_s >= 0.0)) throw InvalidConfig("min_separation_s must be non-negative");
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> out;
  if (x.size() < 3) return out;
  const std::size_t last = x.size() - 1;
  std::size_t i = 1;
  while (i < last) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead < last && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        out.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return out;
}

std::vector<double> prominences(std::span<const double> x, std::span<const std::size_t> peaks) {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t p : peaks) {
    const double h = x[p];
    double left_min = h;
    for (std::size_t i = p + 1; i-- > 0;) {
      if (x[i] > h) break;
      left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = p; i < x.size(); ++i) {
      if (x[i] > h) break;
      right_min = std::min(right_min, x[i]);
    }
    out.push_back(h - std::max(left_min, right_min));
  }
  return out;
}

PeakSet detect_peaks(const SignalSeries& series, const PeakConfig& cfg) {
  cfg.validate();
  const std::span<const double> x = series.values;
  if (x.size() < 3) throw SeriesTooShort(x.size());
  const auto [lo, hi] = std::ranges::minmax(x);
  const double range = hi - lo;
  PeakSet out;
  if (!(range > 0.0)) return out;

  const double threshold = cfg.min_prominence * range;
  std::vector<double> neg(x.size());
  std::ranges::transform(x, neg.begin(), std::negate<>());
  auto peaks = select(x, series.timestamps, threshold, cfg.min_separation_s);
  auto troughs = select(neg, series.timestamps, threshold, cfg.min_separation_s);

  // Merge, then enforce strict alternation.
  struct Extremum {
    std::size_t index;
    bool peak;
  };
  std::vector<Extremum> merged;
  for (std::size_t i : peaks) merged.push_back({i, true});
  for (std::size_t i : troughs) merged.push_back({i, false});
  std::ranges::sort(merged, {}, &Extremum::index);

  std::vector<Extremum> alt;
  for (const Extremum& e : merged) {
    if (!alt.empty() && alt.back().peak == e.peak) {
      const double prev = x[alt.back().index];
      const bool more_extreme = e.peak ? x[e.index] > prev : x[e.index] < prev;
      if (more_extreme) alt.back() = e;
      continue;
    }
    alt.push_back(e);
  }
  for (const Extremum& e : alt) (e.peak ? out.peaks : out.troughs).push_back(e.index);
  return out;
}

double refined_peak_time(const SignalSeries& s, std::size_t i) {
  const auto& x = s.values;
  const auto& t = s.timestamps;
  if (i == 0 || i + 1 >= x.size()) return t[i];
  const double denom = x[i - 1] - 2.0 * x[i] + x[i + 1];
  if (!(denom < 0.0)) return t[i];
  const double delta = std::clamp(0.5 * (x[i - 1] - x[i + 1]) / denom, -0.5, 0.5);
  return delta >= 0.0 ? t[i] + delta * (t[i + 1] - t[i]) : t[i] + delta * (t[i] - t[i - 1]);
}

double ols_slope(std::span<const double> y) {
  const auto n = static_cast<double>(y.size());
  const double xbar = (n - 1.0) / 2.0;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

CadenceStats cadence_stats(const SignalSeries& series, const PeakSet& extrema) {
  const auto& x = series.values;
  CadenceStats st;
  st.peak_count = extrema.peaks.size();
  if (!x.empty()) st.signal_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());

  std::vector<double> diffs;
  std::vector<double> cycle_amplitudes;
  for (std::size_t p : extrema.peaks) {
    const auto after = std::ranges::upper_bound(extrema.troughs, p);
    std::vector<double> adjacent;
    if (after != extrema.troughs.begin()) {
      const std::size_t before = *std::prev(after);
      // Adjacent only if no other peak lies in between.
      if (std::ranges::none_of(extrema.peaks, [&](std::size_t q) { return q > before && q < p; })) {
        adjacent.push_back(x[before]);
      }
    }
    if (after != extrema.troughs.end()) {
      if (std::ranges::none_of(extrema.peaks, [&](std::size_t q) { return q > p && q < *after; })) {
        adjacent.push_back(x[*after]);
      }
    }
    if (adjacent.empty()) continue;
    double sum = 0.0;
    for (double v : adjacent) {
      diffs.push_back(x[p] - v);
      sum += v;
    }
    cycle_amplitudes.push_back(x[p] - sum / static_cast<double>(adjacent.size()));
  }
  if (!diffs.empty()) st.mean_amplitude = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  if (cycle_amplitudes.size() >= 2) st.amplitude_slope = ols_slope(cycle_amplitudes);

  if (extrema.peaks.size() >= 2) {
    std::vector<double> intervals;
    double prev = refined_peak_time(series, extrema.peaks.front());
    for (std::size_t k = 1; k < extrema.peaks.size(); ++k) {
      const double t = refined_peak_time(series, extrema.peaks[k]);
      intervals.push_back(t - prev);
      prev = t;
    }
    st.mean_interval_s = std::accumulate(intervals.begin(), intervals.end(), 0.0) / static_cast<double>(intervals.size());
    if (intervals.size() >= 2) st.interval_slope_s_per_cycle = ols_slope(intervals);
  }
  return st;
}

void write_overlay_csv(std::ostream& out, const SignalSeries& s, const PeakSet& e) {
  struct Row {
    std::size_t index;
    const char* kind;
  };
  std::vector<Row> rows;
  for (std::size_t i : e.peaks) rows.push_back({i, "peak"});
  for (std::size_t i : e.troughs) rows.push_back({i, "trough"});
  std::ranges::sort(rows, {}, &Row::index);
  out << "t,value,kind\n";
  for (const Row& r : rows) {
    out << io::format_number(s.timestamps[r.index]) << ',' << io::format_number(s.values[r.index]) << ',' << r.kind
        << '\n';
  }
}

}  // namespace walkup::peaks

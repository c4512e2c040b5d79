#include "walkup/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "walkup/errors.hpp"

namespace walkup::filter {

Biquad butterworth_highpass(double cutoff_hz, double sample_rate_hz) {
  if (!(cutoff_hz > 0.0) || !(sample_rate_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz)) {
    throw InvalidConfig("high-pass cutoff must lie strictly between 0 and half the sample rate");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double k2 = k * k;
  const double d = 1.0 + std::numbers::sqrt2 * k + k2;
  Biquad f;
  f.b = {1.0 / d, -2.0 / d, 1.0 / d};
  f.a = {1.0, 2.0 * (k2 - 1.0) / d, (1.0 - std::numbers::sqrt2 * k + k2) / d};
  return f;
}

std::vector<double> lfilter(const Biquad& f, std::span<const double> x, std::array<double, 2> z) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = f.b[0] * xi + z[0];
    z[0] = f.b[1] * xi - f.a[1] * yi + z[1];
    z[1] = f.b[2] * xi - f.a[2] * yi;
    y[i] = yi;
  }
  return y;
}

std::array<double, 2> steady_state(const Biquad& f) {
  // Solve (I - companion(a)^T) z = b[1:] - a[1:] * b[0].
  const double m00 = 1.0 + f.a[1];
  const double m01 = -1.0;
  const double m10 = f.a[2];
  const double m11 = 1.0;
  const double r0 = f.b[1] - f.a[1] * f.b[0];
  const double r1 = f.b[2] - f.a[2] * f.b[0];
  const double det = m00 * m11 - m01 * m10;
  return {(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det};
}

std::vector<double> filtfilt(const Biquad& f, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n == 1) {
    const double dc_gain = (f.b[0] + f.b[1] + f.b[2]) / (f.a[0] + f.a[1] + f.a[2]);
    return {x[0] * dc_gain * dc_gain};
  }
  const std::size_t pad = std::min<std::size_t>(9, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = steady_state(f);
  std::vector<double> fwd = lfilter(f, ext, {zi[0] * ext.front(), zi[1] * ext.front()});
  std::ranges::reverse(fwd);
  std::vector<double> bwd = lfilter(f, fwd, {zi[0] * fwd.front(), zi[1] * fwd.front()});
  std::ranges::reverse(bwd);
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad), bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace walkup::filter

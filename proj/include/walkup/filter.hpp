#pragma once

#include <array>
#include <span>
#include <vector>

namespace walkup::filter {

/// Second-order IIR section, a[0] normalized to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Second-order Butterworth high-pass via the bilinear transform with
/// frequency prewarping. With K = tan(pi * fc / fs):
///   b = [1, -2, 1] / D
///   a = [1, 2(K^2 - 1) / D, (1 - sqrt2 K + K^2) / D],  D = 1 + sqrt2 K + K^2
/// Throws InvalidConfig unless 0 < fc < fs / 2.
[[nodiscard]] Biquad butterworth_highpass(double cutoff_hz, double sample_rate_hz);

/// Direct-form II transposed filtering with an explicit initial state.
[[nodiscard]] std::vector<double> lfilter(const Biquad& f, std::span<const double> x,
                                          std::array<double, 2> state = {});

/// Initial state giving the steady-state response to a unit step.
[[nodiscard]] std::array<double, 2> steady_state(const Biquad& f);

/// Zero-phase forward-backward filtering. The input is padded with an odd
/// reflection of min(9, n - 1) samples at each end and both passes start from
/// the steady state scaled by the first sample they see.
[[nodiscard]] std::vector<double> filtfilt(const Biquad& f, std::span<const double> x);

}  // namespace walkup::filter

#include "walkup/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "walkup/errors.hpp"
#include "walkup/io_util.hpp"

namespace walkup::features {

namespace {

using cd = std::complex<double>;
using Fn = FeatureValue (*)(std::span<const double>, const FeatureSpec&);

enum class Kind { Int, Real, Bool, Text };

struct ParamDef {
  std::string_view name;
  Kind kind;
  ParamValue fallback;
};

struct FeatureDef {
  std::string_view name;
  std::vector<ParamDef> params;
  Fn fn;
};

// Reason codes.
constexpr const char* kTooShort = "series too short";
constexpr const char* kShorterThanLag = "series shorter than lag";
constexpr const char* kZeroVariance = "zero variance";
constexpr const char* kZeroStd = "zero std";
constexpr const char* kZeroMean = "zero mean";
constexpr const char* kInvalidParam = "invalid parameter";
constexpr const char* kSingular = "singular recursion";

double sum_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

double mean_of(std::span<const double> x) { return sum_of(x) / static_cast<double>(x.size()); }

/// Population variance, two-pass.
double pop_variance(std::span<const double> x) {
  const double mu = mean_of(x);
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(x.size());
}

double median_of(std::vector<double> v) { return quantile_of(v, 0.5); }

std::optional<double> aggregate(std::span<const double> v, std::string_view how) {
  if (how == "mean") return mean_of(v);
  if (how == "median") return median_of({v.begin(), v.end()});
  if (how == "var") return pop_variance(v);
  if (how == "std") return std::sqrt(pop_variance(v));
  return std::nullopt;
}

// ---- Levinson-Durbin -------------------------------------------------------

struct Recursion {
  std::vector<double> reflection;  // partial autocorrelations 1..p
  std::vector<double> coeffs;      // AR(p) coefficients phi_1..phi_p
};

/// Solves the Toeplitz system of correlations rho[0..p] (rho[0] = 1).
std::optional<Recursion> levinson_durbin(std::span<const double> rho, std::size_t p) {
  Recursion out;
  std::vector<double> phi;
  std::vector<double> next;
  for (std::size_t k = 1; k <= p; ++k) {
    double num = rho[k];
    double den = 1.0;
    for (std::size_t j = 1; j < k; ++j) {
      num -= phi[j - 1] * rho[k - j];
      den -= phi[j - 1] * rho[j];
    }
    if (!(std::abs(den) > 1e-12)) return std::nullopt;
    const double kk = num / den;
    next.assign(k, 0.0);
    for (std::size_t j = 1; j < k; ++j) next[j - 1] = phi[j - 1] - kk * phi[k - j - 1];
    next[k - 1] = kk;
    phi.swap(next);
    out.reflection.push_back(kk);
  }
  out.coeffs = phi;
  return out;
}

// ---- Least squares by Householder QR --------------------------------------

struct LeastSquares {
  std::vector<double> beta;
  double rss = 0.0;
  std::vector<double> inv_gram_diag;  // diag((X^T X)^-1)
};

/// X is rows x cols, row-major.
std::optional<LeastSquares> solve_least_squares(std::vector<double> a, std::vector<double> y, std::size_t rows,
                                                std::size_t cols) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * cols + c]; };
  std::vector<double> diag(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double norm = 0.0;
    for (std::size_t r = c; r < rows; ++r) norm += at(r, c) * at(r, c);
    norm = std::sqrt(norm);
    if (norm == 0.0) return std::nullopt;
    const double alpha = at(c, c) > 0 ? -norm : norm;
    // v = x - alpha e1, stored in place below the diagonal.
    at(c, c) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t r = c; r < rows; ++r) vnorm2 += at(r, c) * at(r, c);
    if (vnorm2 > 0.0) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t r = c; r < rows; ++r) s += at(r, c) * at(r, j);
        s = 2.0 * s / vnorm2;
        for (std::size_t r = c; r < rows; ++r) at(r, j) -= s * at(r, c);
      }
      double s = 0.0;
      for (std::size_t r = c; r < rows; ++r) s += at(r, c) * y[r];
      s = 2.0 * s / vnorm2;
      for (std::size_t r = c; r < rows; ++r) y[r] -= s * at(r, c);
    }
    diag[c] = alpha;
  }
  double scale = 0.0;
  for (double d : diag) scale = std::max(scale, std::abs(d));
  for (double d : diag) {
    if (std::abs(d) <= 1e-12 * scale) return std::nullopt;
  }
  // R: diagonal in `diag`, strict upper triangle in a.
  auto r_at = [&](std::size_t i, std::size_t j) { return i == j ? diag[i] : a[i * cols + j]; };

  LeastSquares out;
  out.beta.assign(cols, 0.0);
  for (std::size_t i = cols; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < cols; ++j) s -= r_at(i, j) * out.beta[j];
    out.beta[i] = s / diag[i];
  }
  for (std::size_t r = cols; r < rows; ++r) out.rss += y[r] * y[r];

  // (X^T X)^-1 = R^-1 R^-T; its diagonal is the row norms of R^-1.
  std::vector<double> rinv(cols * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = j + 1; i-- > 0;) {
      double s = i == j ? 1.0 : 0.0;
      for (std::size_t k = i + 1; k <= j; ++k) s -= r_at(i, k) * rinv[k * cols + j];
      rinv[i * cols + j] = s / diag[i];
    }
  }
  out.inv_gram_diag.assign(cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = i; j < cols; ++j) out.inv_gram_diag[i] += rinv[i * cols + j] * rinv[i * cols + j];
  }
  return out;
}

// ---- FFT --------------------------------------------------------------------

void fft_pow2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cd u = a[i + j];
        const cd v = a[i + j + len / 2] * twiddle[j * step];
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (cd& v : a) v /= static_cast<double>(n);
  }
}

std::vector<double> one_sided_magnitudes(std::span<const double> x) {
  const auto spectrum = dft(x);
  std::vector<double> mag(x.size() / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spectrum[k]);
  return mag;
}

// ---- Feature calculators -----------------------------------------------------

FeatureValue f_abs_energy(std::span<const double> x, const FeatureSpec&) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return FeatureValue::of(acc);
}

double abs_change_sum(std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += std::abs(x[i] - x[i - 1]);
  return acc;
}

FeatureValue f_absolute_sum_of_changes(std::span<const double> x, const FeatureSpec&) {
  return FeatureValue::of(abs_change_sum(x));
}

FeatureValue f_mean_abs_change(std::span<const double> x, const FeatureSpec&) {
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  return FeatureValue::of(abs_change_sum(x) / static_cast<double>(x.size() - 1));
}

FeatureValue f_root_mean_square(std::span<const double> x, const FeatureSpec&) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return FeatureValue::of(std::sqrt(acc / static_cast<double>(x.size())));
}

FeatureValue f_variance(std::span<const double> x, const FeatureSpec&) {
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  return FeatureValue::of(pop_variance(x));
}

FeatureValue f_variation_coefficient(std::span<const double> x, const FeatureSpec&) {
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  const double mu = mean_of(x);
  if (mu == 0.0) return FeatureValue::undefined(kZeroMean);
  return FeatureValue::of(std::sqrt(pop_variance(x)) / mu);
}

// Bias-adjusted Fisher excess kurtosis (sample moments), as in pandas:
//   G2 = (n+1) n (n-1) / ((n-2)(n-3)) * m4 / S2^2 - 3 (n-1)^2 / ((n-2)(n-3))
// with S2 = sum (x - mean)^2 and m4 = sum (x - mean)^4.
FeatureValue f_kurtosis(std::span<const double> x, const FeatureSpec&) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 4) return FeatureValue::undefined(kTooShort);
  const double mu = mean_of(x);
  double s2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = (v - mu) * (v - mu);
    s2 += d;
    m4 += d * d;
  }
  if (s2 == 0.0) return FeatureValue::undefined(kZeroVariance);
  const double denom = (n - 2.0) * (n - 3.0);
  return FeatureValue::of((n + 1.0) * n * (n - 1.0) / denom * m4 / (s2 * s2) - 3.0 * (n - 1.0) * (n - 1.0) / denom);
}

FeatureValue f_quantile(std::span<const double> x, const FeatureSpec& spec) {
  const double q = spec.number("q");
  if (!(q >= 0.0 && q <= 1.0)) return FeatureValue::undefined(kInvalidParam);
  return FeatureValue::of(quantile_of(x, q));
}

FeatureValue f_autocorrelation(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t lag = spec.integer("lag");
  if (lag < 0) return FeatureValue::undefined(kInvalidParam);
  if (lag == 0) return FeatureValue::of(1.0);
  if (static_cast<std::size_t>(lag) >= x.size()) return FeatureValue::undefined(kShorterThanLag);
  if (pop_variance(x) == 0.0) return FeatureValue::undefined(kZeroVariance);
  return FeatureValue::of(autocorrelation_at(x, static_cast<std::size_t>(lag)));
}

FeatureValue f_agg_autocorrelation(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t maxlag = spec.integer("maxlag");
  if (maxlag < 1) return FeatureValue::undefined(kInvalidParam);
  if (static_cast<std::size_t>(maxlag) >= x.size()) return FeatureValue::undefined(kShorterThanLag);
  if (pop_variance(x) == 0.0) return FeatureValue::undefined(kZeroVariance);
  std::vector<double> r;
  for (std::int64_t lag = 1; lag <= maxlag; ++lag) r.push_back(autocorrelation_at(x, static_cast<std::size_t>(lag)));
  const auto agg = aggregate(r, spec.text("f_agg"));
  if (!agg) return FeatureValue::undefined(kInvalidParam);
  return FeatureValue::of(*agg);
}

FeatureValue f_partial_autocorrelation(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t lag = spec.integer("lag");
  if (lag < 0) return FeatureValue::undefined(kInvalidParam);
  if (lag == 0) return FeatureValue::of(1.0);
  const auto p = static_cast<std::size_t>(lag);
  if (p >= x.size()) return FeatureValue::undefined(kShorterThanLag);
  if (pop_variance(x) == 0.0) return FeatureValue::undefined(kZeroVariance);
  std::vector<double> rho(p + 1, 1.0);
  for (std::size_t k = 1; k <= p; ++k) rho[k] = autocorrelation_at(x, k);
  const auto rec = levinson_durbin(rho, p);
  if (!rec) return FeatureValue::undefined(kSingular);
  return FeatureValue::of(rec->reflection.back());
}

FeatureValue f_approximate_entropy(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t m = spec.integer("m");
  const double r = spec.number("r");
  if (m < 1 || !(r > 0.0)) return FeatureValue::undefined(kInvalidParam);
  const auto mm = static_cast<std::size_t>(m);
  if (x.size() < mm + 2) return FeatureValue::undefined(kTooShort);
  const double sd = std::sqrt(pop_variance(x));
  if (sd == 0.0) return FeatureValue::undefined(kZeroStd);
  const double tol = r * sd;
  auto phi = [&](std::size_t len) {
    const auto counts = template_match_counts(x, len, tol);
    const auto windows = static_cast<double>(counts.size());
    double acc = 0.0;
    for (std::size_t c : counts) acc += std::log(static_cast<double>(c) / windows);
    return acc / windows;
  };
  return FeatureValue::of(phi(mm) - phi(mm + 1));
}

FeatureValue f_sample_entropy(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t m = spec.integer("m");
  const double r = spec.number("r");
  if (m < 1 || !(r > 0.0)) return FeatureValue::undefined(kInvalidParam);
  const auto mm = static_cast<std::size_t>(m);
  if (x.size() < mm + 2) return FeatureValue::undefined(kTooShort);
  const double sd = std::sqrt(pop_variance(x));
  if (sd == 0.0) return FeatureValue::undefined(kZeroStd);
  const auto counts = sample_entropy_counts(x, mm, r * sd);
  if (counts.matches_m == 0 || counts.matches_m_plus_1 == 0) return FeatureValue::undefined("no matches");
  return FeatureValue::of(
      -std::log(static_cast<double>(counts.matches_m_plus_1) / static_cast<double>(counts.matches_m)));
}

FeatureValue f_fft_coefficient(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t k = spec.integer("coeff");
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  if (k < 0) return FeatureValue::undefined(kInvalidParam);
  if (static_cast<std::size_t>(k) >= x.size()) return FeatureValue::undefined("coefficient out of range");
  const cd c = dft(x)[static_cast<std::size_t>(k)];
  const std::string& attr = spec.text("attr");
  if (attr == "real") return FeatureValue::of(c.real());
  if (attr == "imag") return FeatureValue::of(c.imag());
  if (attr == "abs") return FeatureValue::of(std::abs(c));
  if (attr == "angle") return FeatureValue::of(std::arg(c) * 180.0 / std::numbers::pi);
  return FeatureValue::undefined("unsupported attr");
}

// Moments of the one-sided magnitude spectrum, normalized to unit mass over
// bin index. Kurtosis here is the plain (non-excess) fourth standardized moment.
FeatureValue f_fft_aggregated(std::span<const double> x, const FeatureSpec& spec) {
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  const std::string& type = spec.text("aggtype");
  if (type != "centroid" && type != "variance" && type != "skew" && type != "kurtosis") {
    return FeatureValue::undefined(kInvalidParam);
  }
  const auto mag = one_sided_magnitudes(x);
  const double total = sum_of(mag);
  if (total == 0.0) return FeatureValue::undefined("zero spectrum");
  double mu = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) mu += static_cast<double>(k) * mag[k];
  mu /= total;
  if (type == "centroid") return FeatureValue::of(mu);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    const double w = mag[k] / total;
    m2 += w * d * d;
    m3 += w * d * d * d;
    m4 += w * d * d * d * d;
  }
  if (type == "variance") return FeatureValue::of(m2);
  if (m2 == 0.0) return FeatureValue::undefined("zero spectral variance");
  if (type == "skew") return FeatureValue::of(m3 / std::pow(m2, 1.5));
  return FeatureValue::of(m4 / (m2 * m2));
}

// Yule-Walker with the biased autocovariance (divides by n), which keeps the
// Toeplitz matrix positive semi-definite.
FeatureValue f_ar_coefficient(std::span<const double> x, const FeatureSpec& spec) {
  const std::int64_t k = spec.integer("k");
  const std::int64_t p = spec.integer("p");
  if (p < 1 || k < 1 || k > p) return FeatureValue::undefined(kInvalidParam);
  const auto order = static_cast<std::size_t>(p);
  if (x.size() <= order) return FeatureValue::undefined("insufficient length");
  const double mu = mean_of(x);
  const std::size_t n = x.size();
  std::vector<double> gamma(order + 1, 0.0);
  for (std::size_t lag = 0; lag <= order; ++lag) {
    for (std::size_t t = 0; t + lag < n; ++t) gamma[lag] += (x[t] - mu) * (x[t + lag] - mu);
    gamma[lag] /= static_cast<double>(n);
  }
  if (gamma[0] == 0.0) return FeatureValue::undefined(kZeroVariance);
  std::vector<double> rho(order + 1);
  for (std::size_t lag = 0; lag <= order; ++lag) rho[lag] = gamma[lag] / gamma[0];
  const auto rec = levinson_durbin(rho, order);
  if (!rec) return FeatureValue::undefined(kSingular);
  return FeatureValue::of(rec->coeffs[static_cast<std::size_t>(k - 1)]);
}

// dx_t = alpha + beta x_{t-1} + sum_{i=1..L} gamma_i dx_{t-i} + e_t; the test
// statistic is beta / se(beta).
FeatureValue f_augmented_dickey_fuller(std::span<const double> x, const FeatureSpec& spec) {
  const std::string& attr = spec.text("attr");
  const std::int64_t lag = spec.integer("lag");
  if (lag < 0) return FeatureValue::undefined(kInvalidParam);
  if (attr == "pvalue") return FeatureValue::undefined("unsupported attr");
  if (attr == "usedlag") return FeatureValue::of(static_cast<double>(lag));
  if (attr != "teststat") return FeatureValue::undefined("unsupported attr");

  const auto L = static_cast<std::size_t>(lag);
  const std::size_t n = x.size();
  const std::size_t cols = 2 + L;
  if (n < L + 2) return FeatureValue::undefined("insufficient length");
  const std::size_t rows = n - 1 - L;
  if (rows <= cols) return FeatureValue::undefined("insufficient length");

  std::vector<double> design(rows * cols);
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + L + 1;  // dx_t = x[t] - x[t-1]
    y[r] = x[t] - x[t - 1];
    design[r * cols + 0] = 1.0;
    design[r * cols + 1] = x[t - 1];
    for (std::size_t i = 1; i <= L; ++i) design[r * cols + 1 + i] = x[t - i] - x[t - i - 1];
  }
  const auto fit = solve_least_squares(std::move(design), std::move(y), rows, cols);
  if (!fit) return FeatureValue::undefined("rank deficient");
  const double s2 = fit->rss / static_cast<double>(rows - cols);
  return FeatureValue::of(fit->beta[1] / std::sqrt(s2 * fit->inv_gram_diag[1]));
}

FeatureValue f_linear_trend(std::span<const double> x, const FeatureSpec& spec) {
  const std::string& attr = spec.text("attr");
  if (attr != "slope" && attr != "intercept" && attr != "rvalue" && attr != "pvalue" && attr != "stderr") {
    return FeatureValue::undefined("unsupported attr");
  }
  const std::size_t n = x.size();
  if (n < 2) return FeatureValue::undefined(kTooShort);
  const double tbar = static_cast<double>(n - 1) / 2.0;
  const double ybar = mean_of(x);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - tbar;
    const double dy = x[i] - ybar;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  if (attr == "slope") return FeatureValue::of(slope);
  if (attr == "intercept") return FeatureValue::of(ybar - slope * tbar);
  if (syy == 0.0 && attr != "stderr") return FeatureValue::undefined(kZeroVariance);
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (attr == "rvalue") return FeatureValue::of(r);
  if (n < 3) return FeatureValue::undefined("insufficient length");
  const auto dof = static_cast<double>(n - 2);
  if (attr == "stderr") {
    const double rss = std::max(0.0, syy - sxy * sxy / sxx);
    return FeatureValue::of(std::sqrt(rss / dof / sxx));
  }
  if (std::abs(r) >= 1.0) return FeatureValue::of(0.0);
  const double t = r * std::sqrt(dof / ((1.0 - r) * (1.0 + r)));
  return FeatureValue::of(student_t_two_sided_p(t, dof));
}

int first_significant_digit(double v) {
  // Shortest round-trip text, so 0.3 reads as 3 rather than 2.999...
  std::array<char, 64> buf{};
  std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v), std::chars_format::scientific);
  return buf[0] - '0';
}

FeatureValue f_benford_correlation(std::span<const double> x, const FeatureSpec&) {
  std::array<double, 9> counts{};
  std::size_t total = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    ++counts[static_cast<std::size_t>(first_significant_digit(v) - 1)];
    ++total;
  }
  if (total == 0) return FeatureValue::undefined("no nonzero values");
  std::array<double, 9> benford{};
  for (std::size_t d = 0; d < 9; ++d) {
    counts[d] /= static_cast<double>(total);
    benford[d] = std::log10(1.0 + 1.0 / static_cast<double>(d + 1));
  }
  const double ma = mean_of(counts);
  const double mb = mean_of(benford);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    sab += (counts[d] - ma) * (benford[d] - mb);
    saa += (counts[d] - ma) * (counts[d] - ma);
    sbb += (benford[d] - mb) * (benford[d] - mb);
  }
  if (saa == 0.0) return FeatureValue::undefined(kZeroVariance);
  return FeatureValue::of(sab / std::sqrt(saa * sbb));
}

FeatureValue f_change_quantiles(std::span<const double> x, const FeatureSpec& spec) {
  const double ql = spec.number("ql");
  const double qh = spec.number("qh");
  if (!(ql >= 0.0 && qh <= 1.0 && ql < qh)) return FeatureValue::undefined(kInvalidParam);
  const std::string& how = spec.text("f_agg");
  if (how != "mean" && how != "median" && how != "var" && how != "std") return FeatureValue::undefined(kInvalidParam);
  if (x.size() < 2) return FeatureValue::undefined(kTooShort);
  const double lo = quantile_of(x, ql);
  const double hi = quantile_of(x, qh);
  const bool isabs = spec.flag("isabs");
  std::vector<double> steps;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool inside = x[i - 1] >= lo && x[i - 1] <= hi && x[i] >= lo && x[i] <= hi;
    if (!inside) continue;
    const double d = x[i] - x[i - 1];
    steps.push_back(isabs ? std::abs(d) : d);
  }
  if (steps.empty()) return FeatureValue::of(0.0);
  return FeatureValue::of(*aggregate(steps, how));
}

FeatureValue f_cid_ce(std::span<const double> x, const FeatureSpec& spec) {
  std::vector<double> z(x.begin(), x.end());
  if (spec.flag("normalize")) {
    const double mu = mean_of(x);
    const double sd = std::sqrt(pop_variance(x));
    if (sd == 0.0) return FeatureValue::undefined(kZeroStd);
    for (double& v : z) v = (v - mu) / sd;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) acc += (z[i] - z[i - 1]) * (z[i] - z[i - 1]);
  return FeatureValue::of(std::sqrt(acc));
}

const std::vector<FeatureDef>& catalogue() {
  using P = ParamDef;
  static const std::vector<FeatureDef> defs = {
      {"abs_energy", {}, f_abs_energy},
      {"absolute_sum_of_changes", {}, f_absolute_sum_of_changes},
      {"agg_autocorrelation",
       {P{"f_agg", Kind::Text, std::string("mean")}, P{"maxlag", Kind::Int, std::int64_t{2}}},
       f_agg_autocorrelation},
      {"approximate_entropy", {P{"m", Kind::Int, std::int64_t{2}}, P{"r", Kind::Real, 0.2}}, f_approximate_entropy},
      {"ar_coefficient", {P{"k", Kind::Int, std::int64_t{1}}, P{"p", Kind::Int, std::int64_t{2}}}, f_ar_coefficient},
      {"augmented_dickey_fuller",
       {P{"attr", Kind::Text, std::string("teststat")}, P{"lag", Kind::Int, std::int64_t{1}}},
       f_augmented_dickey_fuller},
      {"autocorrelation", {P{"lag", Kind::Int, std::int64_t{1}}}, f_autocorrelation},
      {"benford_correlation", {}, f_benford_correlation},
      {"change_quantiles",
       {P{"ql", Kind::Real, 0.2}, P{"qh", Kind::Real, 0.8}, P{"isabs", Kind::Bool, true},
        P{"f_agg", Kind::Text, std::string("mean")}},
       f_change_quantiles},
      {"cid_ce", {P{"normalize", Kind::Bool, true}}, f_cid_ce},
      {"mean_abs_change", {}, f_mean_abs_change},
      {"fft_aggregated", {P{"aggtype", Kind::Text, std::string("centroid")}}, f_fft_aggregated},
      {"fft_coefficient",
       {P{"coeff", Kind::Int, std::int64_t{5}}, P{"attr", Kind::Text, std::string("abs")}},
       f_fft_coefficient},
      {"partial_autocorrelation", {P{"lag", Kind::Int, std::int64_t{1}}}, f_partial_autocorrelation},
      {"quantile", {P{"q", Kind::Real, 0.5}}, f_quantile},
      {"root_mean_square", {}, f_root_mean_square},
      {"sample_entropy", {P{"m", Kind::Int, std::int64_t{2}}, P{"r", Kind::Real, 0.2}}, f_sample_entropy},
      {"variance", {}, f_variance},
      {"variation_coefficient", {}, f_variation_coefficient},
      {"kurtosis", {}, f_kurtosis},
      {"linear_trend", {P{"attr", Kind::Text, std::string("slope")}}, f_linear_trend},
  };
  return defs;
}

const FeatureDef& lookup(std::string_view name) {
  for (const FeatureDef& d : catalogue()) {
    if (d.name == name) return d;
  }
  throw std::invalid_argument("unknown feature \"" + std::string(name) + "\"");
}

ParamValue coerce(const ParamDef& def, const ParamValue& v, std::string_view feature) {
  const std::string where = std::string(feature) + "." + std::string(def.name);
  switch (def.kind) {
    case Kind::Int:
      if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
      if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d && std::abs(*d) < 9e15) {
        return static_cast<std::int64_t>(*d);
      }
      throw std::invalid_argument(where + " must be an integer");
    case Kind::Real:
      if (const auto* d = std::get_if<double>(&v)) return *d;
      if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      throw std::invalid_argument(where + " must be a number");
    case Kind::Bool:
      if (const auto* b = std::get_if<bool>(&v)) return *b;
      throw std::invalid_argument(where + " must be a boolean");
    case Kind::Text:
      if (const auto* s = std::get_if<std::string>(&v)) return *s;
      throw std::invalid_argument(where + " must be a string");
  }
  return v;
}

std::string format_param(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return io::format_number(*d);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

template <class Overrides>
void build_spec(std::string_view name, const Overrides& overrides, std::vector<Param>& params) {
  const FeatureDef& def = lookup(name);
  for (const auto& [key, value] : overrides) {
    const bool known = std::ranges::any_of(def.params, [&](const ParamDef& p) { return p.name == key; });
    if (!known) {
      throw std::invalid_argument("feature \"" + std::string(name) + "\" has no parameter \"" + std::string(key) + "\"");
    }
  }
  for (const ParamDef& p : def.params) {
    ParamValue value = p.fallback;
    for (const auto& [key, v] : overrides) {
      if (key == p.name) value = coerce(p, v, name);
    }
    params.push_back({std::string(p.name), std::move(value)});
  }
}

}  // namespace

FeatureValue FeatureValue::undefined(std::string why) {
  return {std::numeric_limits<double>::quiet_NaN(), std::move(why)};
}

FeatureSpec FeatureSpec::make(std::string_view name,
                              std::initializer_list<std::pair<std::string_view, ParamValue>> overrides) {
  FeatureSpec spec;
  build_spec(name, overrides, spec.params_);
  spec.name_ = std::string(name);
  return spec;
}

FeatureSpec FeatureSpec::make(std::string_view name, const std::vector<std::pair<std::string, ParamValue>>& overrides) {
  FeatureSpec spec;
  build_spec(name, overrides, spec.params_);
  spec.name_ = std::string(name);
  return spec;
}

std::string FeatureSpec::id() const {
  std::string out = name_;
  for (const Param& p : params_) out += "__" + p.name + "=" + format_param(p.value);
  return out;
}

const ParamValue& FeatureSpec::get(std::string_view key) const {
  for (const Param& p : params_) {
    if (p.name == key) return p.value;
  }
  throw std::invalid_argument("feature \"" + name_ + "\" has no parameter \"" + std::string(key) + "\"");
}

std::int64_t FeatureSpec::integer(std::string_view key) const { return std::get<std::int64_t>(get(key)); }
double FeatureSpec::number(std::string_view key) const { return std::get<double>(get(key)); }
bool FeatureSpec::flag(std::string_view key) const { return std::get<bool>(get(key)); }
const std::string& FeatureSpec::text(std::string_view key) const { return std::get<std::string>(get(key)); }

const FeatureEntry* FeatureVector::find(std::string_view id) const {
  const auto it = std::ranges::lower_bound(entries, id, {}, [](const FeatureEntry& e) -> std::string_view { return e.id; });
  return it != entries.end() && it->id == id ? &*it : nullptr;
}

const std::vector<std::string_view>& feature_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> v;
    for (const FeatureDef& d : catalogue()) v.push_back(d.name);
    return v;
  }();
  return names;
}

std::vector<FeatureSpec> default_specs() {
  std::vector<FeatureSpec> s;
  s.push_back(FeatureSpec::make("abs_energy"));
  s.push_back(FeatureSpec::make("absolute_sum_of_changes"));
  s.push_back(FeatureSpec::make("agg_autocorrelation", {{"f_agg", std::string("mean")}, {"maxlag", std::int64_t{2}}}));
  s.push_back(FeatureSpec::make("approximate_entropy", {{"m", std::int64_t{2}}, {"r", 0.2}}));
  for (std::int64_t k : {1, 2}) s.push_back(FeatureSpec::make("ar_coefficient", {{"k", k}, {"p", std::int64_t{2}}}));
  s.push_back(FeatureSpec::make("augmented_dickey_fuller", {{"attr", std::string("teststat")}, {"lag", std::int64_t{1}}}));
  for (std::int64_t lag = 1; lag <= 5; ++lag) s.push_back(FeatureSpec::make("autocorrelation", {{"lag", lag}}));
  s.push_back(FeatureSpec::make("benford_correlation"));
  s.push_back(FeatureSpec::make("change_quantiles"));
  s.push_back(FeatureSpec::make("cid_ce", {{"normalize", true}}));
  s.push_back(FeatureSpec::make("mean_abs_change"));
  for (const char* t : {"centroid", "variance", "skew", "kurtosis"}) {
    s.push_back(FeatureSpec::make("fft_aggregated", {{"aggtype", std::string(t)}}));
  }
  s.push_back(FeatureSpec::make("fft_coefficient", {{"coeff", std::int64_t{5}}, {"attr", std::string("abs")}}));
  for (std::int64_t lag = 1; lag <= 5; ++lag) s.push_back(FeatureSpec::make("partial_autocorrelation", {{"lag", lag}}));
  for (double q : {0.1, 0.5, 0.9}) s.push_back(FeatureSpec::make("quantile", {{"q", q}}));
  s.push_back(FeatureSpec::make("root_mean_square"));
  s.push_back(FeatureSpec::make("sample_entropy", {{"m", std::int64_t{2}}, {"r", 0.2}}));
  s.push_back(FeatureSpec::make("variance"));
  s.push_back(FeatureSpec::make("variation_coefficient"));
  s.push_back(FeatureSpec::make("kurtosis"));
  for (const char* a : {"slope", "intercept", "rvalue", "pvalue", "stderr"}) {
    s.push_back(FeatureSpec::make("linear_trend", {{"attr", std::string(a)}}));
  }
  return s;
}

std::vector<FeatureSpec> specs_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() && j.contains("specs") ? j["specs"] : j;
  if (!list.is_array()) throw std::invalid_argument("feature spec file must hold an array of specs");
  std::vector<FeatureSpec> out;
  for (const auto& item : list) {
    if (item.is_string()) {
      out.push_back(FeatureSpec::make(item.get<std::string>()));
      continue;
    }
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
      throw std::invalid_argument("each spec needs a string \"name\"");
    }
    std::vector<std::pair<std::string, ParamValue>> overrides;
    if (item.contains("params")) {
      if (!item["params"].is_object()) throw std::invalid_argument("\"params\" must be an object");
      for (const auto& [key, v] : item["params"].items()) {
        if (v.is_boolean()) {
          overrides.emplace_back(key, v.get<bool>());
        } else if (v.is_number_integer()) {
          overrides.emplace_back(key, v.get<std::int64_t>());
        } else if (v.is_number()) {
          overrides.emplace_back(key, v.get<double>());
        } else if (v.is_string()) {
          overrides.emplace_back(key, v.get<std::string>());
        } else {
          throw std::invalid_argument("parameter \"" + key + "\" has an unsupported type");
        }
      }
    }
    out.push_back(FeatureSpec::make(item["name"].get<std::string>(), overrides));
  }
  return out;
}

nlohmann::json specs_to_json(std::span<const FeatureSpec> specs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FeatureSpec& s : specs) {
    nlohmann::json params = nlohmann::json::object();
    for (const Param& p : s.params()) {
      std::visit([&](const auto& v) { params[p.name] = v; }, p.value);
    }
    arr.push_back({{"name", s.name()}, {"params", params}});
  }
  return arr;
}

FeatureValue compute(std::span<const double> x, const FeatureSpec& spec) {
  if (x.empty()) throw EmptySeries();
  if (!std::ranges::all_of(x, [](double v) { return std::isfinite(v); })) {
    return FeatureValue::undefined("non-finite input");
  }
  FeatureValue v = lookup(spec.name()).fn(x, spec);
  if (!std::isfinite(v.value) && v.reason.empty()) v.reason = "non-finite result";
  return v;
}

FeatureVector extract(std::span<const double> x, std::span<const FeatureSpec> specs, unsigned threads) {
  if (x.empty()) throw EmptySeries();
  std::map<std::string, const FeatureSpec*> unique;
  for (const FeatureSpec& s : specs) unique.emplace(s.id(), &s);

  FeatureVector fv;
  fv.entries.reserve(unique.size());
  std::vector<const FeatureSpec*> order;
  for (const auto& [id, spec] : unique) {
    fv.entries.push_back({id, {}});
    order.push_back(spec);
  }
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, order.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < order.size(); ++i) fv.entries[i].value = compute(x, *order[i]);
    return fv;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < order.size(); i += workers) fv.entries[i].value = compute(x, *order[i]);
    });
  }
  pool.clear();
  return fv;
}

FeatureVector extract(const SignalSeries& series, std::span<const FeatureSpec> specs, unsigned threads) {
  return extract(std::span<const double>(series.values), specs, threads);
}

void write_csv(std::ostream& out, const FeatureVector& fv) {
  out << "feature_id,value,reason\n";
  for (const FeatureEntry& e : fv.entries) {
    out << e.id << ',' << io::format_number(e.value.value) << ',' << e.value.reason << '\n';
  }
}

nlohmann::json to_json(const FeatureVector& fv) {
  nlohmann::json features = nlohmann::json::object();
  nlohmann::json reasons = nlohmann::json::object();
  for (const FeatureEntry& e : fv.entries) {
    if (e.value.ok()) {
      features[e.id] = e.value.value;
    } else {
      features[e.id] = nullptr;
      reasons[e.id] = e.value.reason;
    }
  }
  return {{"features", features}, {"reasons", reasons}};
}

namespace {

// Bins 0 and n/2 of a real series are real; drop the rounding residue.
std::vector<cd> real_input_bins(std::vector<cd> out) {
  const std::size_t n = out.size();
  out[0].imag(0.0);
  if (n % 2 == 0) out[n / 2].imag(0.0);
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<cd> a(x.begin(), x.end());
    fft_pow2(a, false);
    return real_input_bins(std::move(a));
  }
  // Bluestein: X_k = w_k * sum_j (x_j w_j) conj(w_{k-j}), w_j = exp(-i pi j^2 / n).
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cd> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<unsigned long long>(j) * j % (2ULL * n);
    chirp[j] = std::polar(1.0, -std::numbers::pi * static_cast<double>(jj) / static_cast<double>(n));
  }
  std::vector<cd> a(m, 0.0);
  std::vector<cd> b(m, 0.0);
  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
  b[0] = std::conj(chirp[0]);
  for (std::size_t j = 1; j < n; ++j) b[j] = b[m - j] = std::conj(chirp[j]);
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return real_input_bins(std::move(out));
}

double quantile_of(std::span<const double> x, double q) {
  std::vector<double> s(x.begin(), x.end());
  std::ranges::sort(s);
  const double h = static_cast<double>(s.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + (h - static_cast<double>(lo)) * (s[lo + 1] - s[lo]);
}

double autocorrelation_at(std::span<const double> x, std::size_t lag) {
  const double mu = mean_of(x);
  const double var = pop_variance(x);
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) acc += (x[t] - mu) * (x[t + lag] - mu);
  return acc / (static_cast<double>(x.size() - lag) * var);
}

std::vector<std::size_t> template_match_counts(std::span<const double> x, std::size_t len, double tolerance) {
  if (x.size() < len || len == 0) return {};
  const std::size_t windows = x.size() - len + 1;
  std::vector<std::size_t> counts(windows, 1);  // self-match
  for (std::size_t i = 0; i < windows; ++i) {
    for (std::size_t j = i + 1; j < windows; ++j) {
      bool match = true;
      for (std::size_t k = 0; k < len && match; ++k) match = std::abs(x[i + k] - x[j + k]) <= tolerance;
      if (match) {
        ++counts[i];
        ++counts[j];
      }
    }
  }
  return counts;
}

SampleEntropyCounts sample_entropy_counts(std::span<const double> x, std::size_t m, double tolerance) {
  SampleEntropyCounts out;
  if (x.size() <= m) return out;
  const std::size_t windows = x.size() - m;
  for (std::size_t i = 0; i < windows; ++i) {
    for (std::size_t j = i + 1; j < windows; ++j) {
      bool match = true;
      for (std::size_t k = 0; k < m && match; ++k) match = std::abs(x[i + k] - x[j + k]) <= tolerance;
      if (!match) continue;
      ++out.matches_m;
      if (std::abs(x[i + m] - x[j + m]) <= tolerance) ++out.matches_m_plus_1;
    }
  }
  return out;
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double z) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * z / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * z / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(z) + b * std::log1p(-z));
  if (z < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, z) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - z) / b;
}

double student_t_two_sided_p(double t, double dof) {
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace walkup::features

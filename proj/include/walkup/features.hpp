#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "walkup/core_types.hpp"

namespace walkup::features {

using ParamValue = std::variant<std::int64_t, double, bool, std::string>;

struct Param {
  std::string name;
  ParamValue value;

  friend bool operator==(const Param&, const Param&) = default;
};

/// One parameterized feature request. Parameters are always complete and in
/// the catalogue's canonical order; build them through make().
class FeatureSpec {
 public:
  /// Validates the name and parameter names, coerces numeric kinds and fills
  /// defaults. Throws std::invalid_argument.
  static FeatureSpec make(std::string_view name,
                          std::initializer_list<std::pair<std::string_view, ParamValue>> overrides = {});
  static FeatureSpec make(std::string_view name, const std::vector<std::pair<std::string, ParamValue>>& overrides);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const std::vector<Param>& params() const { return params_; }

  /// `name__k=v__k=v` in canonical parameter order.
  [[nodiscard]] std::string id() const;

  [[nodiscard]] std::int64_t integer(std::string_view key) const;
  [[nodiscard]] double number(std::string_view key) const;
  [[nodiscard]] bool flag(std::string_view key) const;
  [[nodiscard]] const std::string& text(std::string_view key) const;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;

 private:
  const ParamValue& get(std::string_view key) const;

  std::string name_;
  std::vector<Param> params_;
};

/// A feature result. A NaN value always carries a machine-readable reason.
struct FeatureValue {
  double value = 0.0;
  std::string reason;

  [[nodiscard]] bool ok() const { return reason.empty(); }
  static FeatureValue of(double v) { return {v, {}}; }
  static FeatureValue undefined(std::string why);
};

struct FeatureEntry {
  std::string id;
  FeatureValue value;
};

struct FeatureVector {
  std::vector<FeatureEntry> entries;  // sorted by id, ids unique

  [[nodiscard]] const FeatureEntry* find(std::string_view id) const;
};

/// The 21 supported feature names.
[[nodiscard]] const std::vector<std::string_view>& feature_names();

/// Default request set; its size is kDefaultSpecCount.
[[nodiscard]] std::vector<FeatureSpec> default_specs();
inline constexpr std::size_t kDefaultSpecCount = 39;

/// Accepts `[{"name": ..., "params": {...}}, ...]` or `{"specs": [...]}`.
/// Throws std::invalid_argument.
[[nodiscard]] std::vector<FeatureSpec> specs_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json specs_to_json(std::span<const FeatureSpec> specs);

/// Evaluates one feature. Undefined cases come back as NaN with a reason.
[[nodiscard]] FeatureValue compute(std::span<const double> x, const FeatureSpec& spec);

/// One entry per distinct spec, sorted by id. Bit-identical for any thread
/// count. Throws EmptySeries.
[[nodiscard]] FeatureVector extract(const SignalSeries& series, std::span<const FeatureSpec> specs,
                                    unsigned threads = 1);
[[nodiscard]] FeatureVector extract(std::span<const double> x, std::span<const FeatureSpec> specs,
                                    unsigned threads = 1);

/// `feature_id,value,reason` with a header row.
void write_csv(std::ostream& out, const FeatureVector& fv);

/// `{"features": {id: value|null}, "reasons": {id: reason}}`.
[[nodiscard]] nlohmann::json to_json(const FeatureVector& fv);

// Building blocks, exposed for reuse and testing.

/// Discrete Fourier transform of a real series (radix-2, or Bluestein for
/// other lengths).
[[nodiscard]] std::vector<std::complex<double>> dft(std::span<const double> x);

/// Linear-interpolation quantile of the sorted sample, q in [0,1].
[[nodiscard]] double quantile_of(std::span<const double> x, double q);

/// R(lag) with population variance in the denominator; lag < n, variance > 0.
[[nodiscard]] double autocorrelation_at(std::span<const double> x, std::size_t lag);

/// Template-match counts for approximate entropy under Chebyshev distance,
/// self-matches included: for every length-`len` window i, the number of
/// windows j with max_k |x[i+k] - x[j+k]| <= tolerance.
[[nodiscard]] std::vector<std::size_t> template_match_counts(std::span<const double> x, std::size_t len,
                                                             double tolerance);

struct SampleEntropyCounts {
  std::uint64_t matches_m = 0;       // B: unordered pairs of m-windows within tolerance
  std::uint64_t matches_m_plus_1 = 0;  // A: same pairs still matching at length m+1
};

/// Uses the first n - m windows at both lengths, self-matches excluded.
[[nodiscard]] SampleEntropyCounts sample_entropy_counts(std::span<const double> x, std::size_t m,
                                                         double tolerance);

/// Regularized incomplete beta I_z(a, b) by continued fraction.
[[nodiscard]] double incomplete_beta(double a, double b, double z);

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
[[nodiscard]] double student_t_two_sided_p(double t, double dof);

}  // namespace walkup::features

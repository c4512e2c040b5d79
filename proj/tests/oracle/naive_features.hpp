#pragma once

// Straightforward reference implementations of the feature definitions,
// written directly from the formulas in extended precision. Quadratic time
// is fine here; these only serve as oracles for the engine.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "walkup/features.hpp"

namespace oracle {

using Real = long double;

/// nullopt when the feature is undefined on x.
std::optional<double> feature(const std::vector<double>& x, const walkup::features::FeatureSpec& spec);

std::vector<std::complex<Real>> dft(const std::vector<double>& x);

/// Per-window match counts at length len, self-match included.
std::vector<std::size_t> template_counts(const std::vector<double>& x, std::size_t len, double tol);

/// {B, A}: unordered m-window pairs within tol (first n-m windows), and how
/// many of those still match at length m+1.
std::pair<std::uint64_t, std::uint64_t> sample_entropy_counts(const std::vector<double>& x, std::size_t m, double tol);

/// First significant digit from the shortest decimal text that reads back
/// as the same double.
int leading_digit(double v);

/// The default set plus every other attribute, aggregate and a spread of
/// lags, orders and tolerances, so that all 21 features and their variants
/// are exercised.
std::vector<walkup::features::FeatureSpec> coverage_specs();

}  // namespace oracle

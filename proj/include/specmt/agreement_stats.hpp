#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace specmt::agreement {

enum class CorrelationKind { pearson, spearman };

std::string_view to_string(CorrelationKind kind);
CorrelationKind parse_correlation_kind(std::string_view s);

struct CorrelationResult {
  double coefficient = 0.0;
  double p_two_sided = 1.0;
  std::size_t n = 0;
  CorrelationKind kind = CorrelationKind::pearson;
  bool exact = false;  // p from full permutation enumeration
};

/// Sample correlation. Lengths must match, n ≥ 3, neither side constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// p from t = r·sqrt((n−2)/(1−r²)) on n−2 degrees of freedom, or, with
/// `exact`, from all n! pairings (n ≤ 8).
CorrelationResult pearson_with_p(std::span<const double> x, std::span<const double> y, bool exact = false);
/// Pearson on average ranks.
CorrelationResult spearman_with_p(std::span<const double> x, std::span<const double> y, bool exact = false);

}  // namespace specmt::agreement

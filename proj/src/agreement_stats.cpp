#include "specmt/agreement_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "specmt/error.hpp"
#include "specmt/stats_math.hpp"

namespace specmt::agreement {
namespace {

constexpr std::size_t kMaxExactN = 8;

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::invalid_argument, "length mismatch: " + std::to_string(x.size()) + " vs " +
                                            std::to_string(y.size()));
  }
  if (x.size() < 3) throw Error(Errc::invalid_argument, "correlation needs at least 3 pairs");
  for (const auto* v : {&x, &y}) {
    if (std::any_of(v->begin(), v->end(), [](double d) { return !std::isfinite(d); })) {
      throw Error(Errc::invalid_argument, "non-finite value");
    }
  }
}

double t_test_p(double r, std::size_t n) {
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  return stats::student_t_two_sided_p(r * std::sqrt(df / denom), df);
}

// Share of the n! pairings whose |r| reaches the observed |r|.
double permutation_p(std::span<const double> x, std::span<const double> y, double r_obs) {
  if (x.size() > kMaxExactN) throw Error(Errc::out_of_range, "exact permutation p is limited to n <= 8");
  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> yp(y.size());
  const double target = std::fabs(r_obs) - 1e-12;
  std::size_t hits = 0;
  std::size_t total = 0;
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) yp[i] = y[perm[i]];
    if (std::fabs(pearson_r(x, yp)) >= target) ++hits;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::string_view to_string(CorrelationKind kind) {
  return kind == CorrelationKind::pearson ? "pearson" : "spearman";
}

CorrelationKind parse_correlation_kind(std::string_view s) {
  if (s == "pearson") return CorrelationKind::pearson;
  if (s == "spearman") return CorrelationKind::spearman;
  throw Error(Errc::invalid_argument, "unknown correlation kind '" + std::string(s) + "'");
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::invalid_argument, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult pearson_with_p(std::span<const double> x, std::span<const double> y, bool exact) {
  CorrelationResult res;
  res.kind = CorrelationKind::pearson;
  res.coefficient = pearson_r(x, y);
  res.n = x.size();
  res.exact = exact;
  res.p_two_sided = exact ? permutation_p(x, y, res.coefficient) : t_test_p(res.coefficient, res.n);
  return res;
}

CorrelationResult spearman_with_p(std::span<const double> x, std::span<const double> y, bool exact) {
  check_inputs(x, y);
  const auto rx = stats::average_ranks(x);
  const auto ry = stats::average_ranks(y);
  CorrelationResult res = pearson_with_p(rx, ry, exact);
  res.kind = CorrelationKind::spearman;
  return res;
}

}  // namespace specmt::agreement

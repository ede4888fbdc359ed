#pragma once

#include <span>
#include <vector>

namespace specmt::stats {

double normal_cdf(double z);
/// P(|Z| ≥ |z|) for a standard normal Z.
double normal_two_sided_p(double z);

/// I_x(a, b) by continued fraction; absolute error below 1e-12 for the
/// argument ranges used here.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
/// P(|T| ≥ |t|) with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// 1-based ranks with tied values sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

double mean(std::span<const double> values);

}  // namespace specmt::stats

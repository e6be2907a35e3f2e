#pragma once

#include <vector>

namespace iduqa {

double mean(const std::vector<double>& values);

/// Quantile with linear interpolation at position p*(n-1) of the sorted data
/// (the same convention is used for medians, quartile fences, and bootstrap
/// percentiles throughout the project).
double quantile_sorted(const std::vector<double>& sorted, double p);

double quantile(std::vector<double> values, double p);

double median(std::vector<double> values);

/// Rounds to two decimals for reported averages.
double round2(double value);

} // namespace iduqa

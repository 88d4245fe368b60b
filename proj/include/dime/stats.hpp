#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dime {

double mean(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Studentized bootstrap interval for the mean at level 1-alpha, from
/// `resamples` resamples of Rng(seed). Resamples with zero spread are skipped;
/// if all are, the interval collapses to the mean.
ConfidenceInterval bootstrap_t_interval(std::span<const double> xs, double alpha = 0.05,
                                        std::size_t resamples = 2000, std::uint64_t seed = 0);

/// Classical Student-t interval for the mean.
ConfidenceInterval t_interval(std::span<const double> xs, double alpha = 0.05);

/// Quantile of Student's t with `dof` degrees of freedom.
double student_t_quantile(double p, double dof);

/// Rank correlation; ties get their average rank. NaN when either side is constant.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

}  // namespace dime

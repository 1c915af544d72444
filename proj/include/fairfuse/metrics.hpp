#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairfuse/errors.hpp"
#include "fairfuse/tdist.hpp"

// Accuracy and fairness measurements: RMSE against ground truth, per-pair
// gender-gap MAE, signed mean difference, the paired t-test, and Pareto
// dominance flags for frontier points.

namespace fairfuse {

/// One row of an audit or evaluation report.
struct AuditRow {
  std::string name;       // modality or fused model
  double acc_error = 0;   // RMSE vs truth
  double bias = 0;        // MAE between gender variants
};

struct TTestResult {
  double t_statistic = 0;
  long degrees_of_freedom = 0;
  double p_value = 1.0;
  bool zero_variance = false;  // sd(d) == 0; p forced to 0 or 1
};

inline double rmse(std::span<const double> predictions, std::span<const double> truth) {
  if (predictions.size() != truth.size())
    throw LengthMismatch("rmse: prediction/truth length mismatch");
  if (predictions.empty()) throw LengthMismatch("rmse: empty input");
  double ss = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predictions.size()));
}

/// Mean absolute per-template gap between the two gender variants.
inline double bias_mae(std::span<const double> male, std::span<const double> female) {
  if (male.size() != female.size())
    throw LengthMismatch("bias_mae: male/female length mismatch");
  if (male.empty()) throw LengthMismatch("bias_mae: empty input");
  double s = 0;
  for (std::size_t i = 0; i < male.size(); ++i) s += std::fabs(male[i] - female[i]);
  return s / static_cast<double>(male.size());
}

/// Signed group-mean gap: mean(scores_pos) - mean(scores_neg).
/// Zero for a fair scorer; groups need not be the same size.
inline double mean_difference(std::span<const double> scores_pos,
                              std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty())
    throw EmptyGroup("mean_difference: empty group");
  double a = 0, b = 0;
  for (double v : scores_pos) a += v;
  for (double v : scores_neg) b += v;
  return a / static_cast<double>(scores_pos.size()) -
         b / static_cast<double>(scores_neg.size());
}

/// Paired (dependent-samples) t-test on d_i = male_i - female_i, two-sided.
inline TTestResult paired_t_test(std::span<const double> male,
                                 std::span<const double> female) {
  if (male.size() != female.size())
    throw LengthMismatch("paired_t_test: male/female length mismatch");
  const std::size_t n = male.size();
  if (n < 2) throw LengthMismatch("paired_t_test: need at least 2 pairs");

  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += male[i] - female[i];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = (male[i] - female[i]) - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.degrees_of_freedom = static_cast<long>(n) - 1;
  if (sd == 0.0) {
    r.zero_variance = true;
    if (mean == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_two_sided_p(r.t_statistic,
                                    static_cast<double>(r.degrees_of_freedom));
  return r;
}

/// Dominance flags: points[i] is dominated iff some other point is <= in both
/// coordinates and < in at least one. Equal points do not dominate each other.
/// Sort-and-sweep, O(n log n); the O(n^2) scan lives in the tests as oracle.
inline std::vector<bool> pareto_filter(
    std::span<const std::pair<double, double>> points) {
  if (points.empty()) throw ValidationError("pareto_filter: empty input");
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first) return points[a].first < points[b].first;
    return points[a].second < points[b].second;
  });

  std::vector<bool> dominated(n, false);
  double best_prior = std::numeric_limits<double>::infinity();  // min y over strictly smaller x
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && points[order[j]].first == points[order[i]].first) ++j;
    double group_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = i; k < j; ++k)
      group_min = std::min(group_min, points[order[k]].second);
    for (std::size_t k = i; k < j; ++k) {
      const double y = points[order[k]].second;
      if (y >= best_prior || y > group_min) dominated[order[k]] = true;
    }
    best_prior = std::min(best_prior, group_min);
    i = j;
  }
  return dominated;
}

inline std::vector<bool> pareto_filter(
    const std::vector<std::pair<double, double>>& points) {
  return pareto_filter(std::span<const std::pair<double, double>>(points));
}

}  // namespace fairfuse

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairfuse/corpus.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/fusion.hpp"
#include "fairfuse/metrics.hpp"

// Beta sweeps over the fair regression, the accuracy/bias frontier they
// trace, utopia-point model selection and fairness-budget queries.

namespace fairfuse {

struct SweepPoint {
  double beta = 0;
  double acc_error = 0;
  double bias = 0;
  bool dominated = false;
};

struct UtopiaSelection {
  std::pair<double, double> utopia;  // (acc_error, bias)
  double chosen_beta = 0;
  SweepPoint chosen_point;
  double distance = 0;
  std::size_t chosen_index = 0;
};

enum class DistanceMode { raw, normalized };

inline DistanceMode parse_distance_mode(const std::string& s) {
  if (s == "raw") return DistanceMode::raw;
  if (s == "normalized") return DistanceMode::normalized;
  throw ValidationError("unknown distance mode '" + s + "' (raw|normalized)");
}

/// Log-spaced beta grid over [lo, hi] with n points, optionally prefixed
/// with beta = 0. Sorted ascending, deduplicated.
inline std::vector<double> build_beta_grid(double lo, double hi, std::size_t n,
                                           bool include_zero = true) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0)
    throw ValidationError("beta grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> grid;
  if (include_zero) grid.push_back(0.0);
  if (n == 1 || hi == lo) {
    grid.push_back(lo);
  } else {
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
      grid.push_back(std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1)));
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace detail {

inline void check_betas(const std::vector<double>& betas) {
  if (betas.empty()) throw ValidationError("sweep: empty beta list");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0.0) || !std::isfinite(betas[i]))
      throw ValidationError("sweep: betas must be finite and >= 0");
    if (i > 0 && betas[i] <= betas[i - 1])
      throw ValidationError("sweep: betas must be sorted ascending and deduplicated");
  }
}

}  // namespace detail

/// One fit + test evaluation per beta, with dominance flags over the sweep.
/// Deterministic: points come back in beta order regardless of scheduling.
inline std::vector<SweepPoint> sweep(const FusionDataset& train,
                                     const std::vector<GenderedPair>& test_pairs,
                                     const std::map<std::string, double>& truths,
                                     const std::vector<double>& betas, double lambda) {
  detail::check_betas(betas);
  std::vector<SweepPoint> points;
  points.reserve(betas.size());
  for (double beta : betas) {
    try {
      const FusionModel model = fit_ffr(train, beta, lambda);
      const AuditRow row = evaluate(model, test_pairs, truths);
      points.push_back({beta, row.acc_error, row.bias, false});
    } catch (const NumericError& err) {
      throw SingularSystem("sweep: solver failed at beta=" + std::to_string(beta) + ": " +
                           err.what());
    }
  }
  std::vector<std::pair<double, double>> coords;
  coords.reserve(points.size());
  for (const auto& p : points) coords.emplace_back(p.acc_error, p.bias);
  const std::vector<bool> dominated = pareto_filter(coords);
  for (std::size_t i = 0; i < points.size(); ++i) points[i].dominated = dominated[i];
  return points;
}

/// Pick the sweep point closest to the utopia point (OLS accuracy, FO bias).
/// Ties break toward smaller beta. In normalized mode both axes are min-max
/// scaled over the sweep before measuring distance.
inline UtopiaSelection utopia_select(const std::vector<SweepPoint>& points,
                                     std::pair<double, double> ols_point,
                                     std::pair<double, double> fo_point,
                                     DistanceMode mode = DistanceMode::raw) {
  if (points.empty()) throw ValidationError("utopia_select: empty sweep");
  UtopiaSelection sel;
  sel.utopia = {ols_point.first, fo_point.second};

  double acc_lo = sel.utopia.first, acc_hi = sel.utopia.first;
  double bias_lo = sel.utopia.second, bias_hi = sel.utopia.second;
  for (const auto& p : points) {
    acc_lo = std::min(acc_lo, p.acc_error);
    acc_hi = std::max(acc_hi, p.acc_error);
    bias_lo = std::min(bias_lo, p.bias);
    bias_hi = std::max(bias_hi, p.bias);
  }
  const double acc_scale = mode == DistanceMode::normalized && acc_hi > acc_lo
                               ? acc_hi - acc_lo : 1.0;
  const double bias_scale = mode == DistanceMode::normalized && bias_hi > bias_lo
                                ? bias_hi - bias_lo : 1.0;

  bool first = true;
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a].beta < points[b].beta; });
  for (std::size_t i : order) {
    const double da = (points[i].acc_error - sel.utopia.first) / acc_scale;
    const double db = (points[i].bias - sel.utopia.second) / bias_scale;
    const double dist = std::hypot(da, db);
    if (first || dist < sel.distance) {
      first = false;
      sel.distance = dist;
      sel.chosen_index = i;
      sel.chosen_point = points[i];
      sel.chosen_beta = points[i].beta;
    }
  }
  return sel;
}

/// Lowest-bias point whose accuracy error stays within
/// reference.acc_error * (1 + budget). Ties break toward smaller beta.
inline SweepPoint budget_query(const std::vector<SweepPoint>& points,
                               const SweepPoint& reference,
                               double accuracy_budget_fraction) {
  if (points.empty()) throw ValidationError("budget_query: empty sweep");
  if (!(reference.acc_error > 0.0))
    throw ValidationError("budget_query: reference accuracy error must be positive");
  if (!(accuracy_budget_fraction >= 0.0))
    throw ValidationError("budget_query: budget must be >= 0");
  const double limit = reference.acc_error * (1.0 + accuracy_budget_fraction);

  const SweepPoint* best = nullptr;
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a].beta < points[b].beta; });
  for (std::size_t i : order) {
    const auto& p = points[i];
    if (p.acc_error > limit) continue;
    if (!best || p.bias < best->bias) best = &p;
  }
  if (!best)
    throw EmptyBudgetSet("budget_query: no sweep point within the accuracy budget");
  return *best;
}

}  // namespace fairfuse

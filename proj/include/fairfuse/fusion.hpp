#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairfuse/corpus.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/metrics.hpp"

// Fusion models over k black-box modalities: the simple weighting baselines
// (unweighted / accuracy-weighted / fairness-count) and the fair ridge
// regression
//
//   L(w) = (1/T) ||X w - y||^2  +  (beta/T) ||Delta w||^2  +  lambda ||w||^2
//
// solved in closed form from the normal equations
//
//   (X'X + beta Delta'Delta + lambda T I) w = X'y.
//
// A first-order iterative solver (fit_ffr_oracle) exists purely to
// cross-check the closed form; it evaluates residual-form gradients and
// never touches the assembled normal matrix.

namespace fairfuse {

enum class FitMethod { unweighted, weighted, ols, fairness_opt, ffr };

inline const char* method_name(FitMethod m) {
  switch (m) {
    case FitMethod::unweighted: return "unweighted";
    case FitMethod::weighted: return "weighted";
    case FitMethod::ols: return "ols";
    case FitMethod::fairness_opt: return "fairness_opt";
    case FitMethod::ffr: return "ffr";
  }
  return "?";
}

inline FitMethod parse_method(const std::string& s) {
  if (s == "unweighted") return FitMethod::unweighted;
  if (s == "weighted") return FitMethod::weighted;
  if (s == "ols") return FitMethod::ols;
  if (s == "fairness_opt") return FitMethod::fairness_opt;
  if (s == "ffr") return FitMethod::ffr;
  throw ValidationError("unknown fit method '" + s + "'");
}

/// A fitted weight vector with its fit metadata.
struct FusionModel {
  std::vector<double> weights;  // length k
  FitMethod method = FitMethod::unweighted;
  double beta = 0;    // ffr only
  double lambda = 0;  // ffr / ols
  double tau = 0;     // fairness_opt only
  bool normalized = false;  // weights sum to 1
  double intercept = 0;
  bool has_intercept = false;
  bool degenerate_fallback = false;  // fairness_opt fell back to uniform
};

inline double predict(const FusionModel& model, std::span<const double> scores) {
  if (scores.size() != model.weights.size())
    throw LengthMismatch("predict: score vector length does not match model");
  double s = model.intercept;
  for (std::size_t j = 0; j < scores.size(); ++j) s += model.weights[j] * scores[j];
  return s;
}

inline FusionModel fit_unweighted(std::size_t k) {
  if (k == 0) throw ValidationError("fit_unweighted: k must be >= 1");
  FusionModel m;
  m.method = FitMethod::unweighted;
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.normalized = true;
  return m;
}

/// Inverse-train-RMSE weighting, normalized to sum 1. A modality with zero
/// train error is a perfect predictor and takes all the weight (ties split
/// evenly).
inline FusionModel fit_weighted(const FusionDataset& train) {
  const long k = train.cols();
  if (train.rows() < 1 || k < 1) throw ValidationError("fit_weighted: empty training set");
  std::vector<double> errors(static_cast<std::size_t>(k));
  std::vector<long> perfect;
  for (long j = 0; j < k; ++j) {
    const double e = std::sqrt((train.X.col(j) - train.y).squaredNorm() /
                               static_cast<double>(train.rows()));
    if (!std::isfinite(e)) throw NonFinite("fit_weighted: non-finite modality error");
    errors[static_cast<std::size_t>(j)] = e;
    if (e == 0.0) perfect.push_back(j);
  }
  FusionModel m;
  m.method = FitMethod::weighted;
  m.normalized = true;
  m.weights.assign(static_cast<std::size_t>(k), 0.0);
  if (!perfect.empty()) {
    for (long j : perfect)
      m.weights[static_cast<std::size_t>(j)] = 1.0 / static_cast<double>(perfect.size());
    return m;
  }
  double total = 0;
  for (double e : errors) total += 1.0 / e;
  for (std::size_t j = 0; j < errors.size(); ++j) m.weights[j] = (1.0 / errors[j]) / total;
  return m;
}

/// Delta rows from raw pairs: entry (i, j) = |male_ij - female_ij|.
inline Eigen::MatrixXd delta_matrix(const std::vector<GenderedPair>& pairs) {
  if (pairs.empty()) throw ValidationError("delta_matrix: no pairs");
  const std::size_t k = pairs.front().male_scores.size();
  Eigen::MatrixXd d(static_cast<long>(pairs.size()), static_cast<long>(k));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.male_scores.size() != k || p.female_scores.size() != k)
      throw InconsistentK("delta_matrix: inconsistent modality count at '" +
                          p.template_id + "'");
    for (std::size_t j = 0; j < k; ++j)
      d(static_cast<long>(i), static_cast<long>(j)) =
          std::fabs(p.male_scores[j] - p.female_scores[j]);
  }
  return d;
}

// Gaps that sit exactly on the threshold must count as fair; absorb the
// representation noise of decimal score differences.
inline constexpr double kTauSlack = 1e-12;

/// Fairness-count weighting: raw weight per modality = number of pairs whose
/// gender gap is within tau, normalized to sum 1. All-zero counts fall back
/// to uniform weights with degenerate_fallback set.
inline FusionModel fit_fairness_opt(const std::vector<GenderedPair>& pairs, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw ValidationError("fit_fairness_opt: tau must be in (0, 1]");
  const Eigen::MatrixXd d = delta_matrix(pairs);
  const long k = d.cols();
  FusionModel m;
  m.method = FitMethod::fairness_opt;
  m.normalized = true;
  m.tau = tau;
  m.weights.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (long i = 0; i < d.rows(); ++i)
    for (long j = 0; j < k; ++j)
      if (d(i, j) <= tau + kTauSlack) counts[static_cast<std::size_t>(j)] += 1.0;
  double total = 0;
  for (double c : counts) total += c;
  if (total == 0.0) {
    m.degenerate_fallback = true;
    m.weights.assign(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    return m;
  }
  for (std::size_t j = 0; j < counts.size(); ++j) m.weights[j] = counts[j] / total;
  return m;
}

namespace detail {

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

// X and Delta with an optional appended intercept column (ones in X, zeros
// in Delta, so the offset is never bias-penalized).
struct ExtendedSystem {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Delta;
};

inline ExtendedSystem extend(const FusionDataset& ds, bool intercept) {
  if (!intercept) return {ds.X, ds.Delta};
  ExtendedSystem e;
  e.X.resize(ds.X.rows(), ds.X.cols() + 1);
  e.X << ds.X, Eigen::VectorXd::Ones(ds.X.rows());
  e.Delta.resize(ds.Delta.rows(), ds.Delta.cols() + 1);
  e.Delta << ds.Delta, Eigen::VectorXd::Zero(ds.Delta.rows());
  return e;
}

inline void check_ffr_inputs(const FusionDataset& train, double beta, double lambda) {
  if (train.rows() < 1) throw ValidationError("fit_ffr: empty training set");
  if (!(beta >= 0.0) || !(lambda >= 0.0))
    throw ValidationError("fit_ffr: beta and lambda must be >= 0");
  if (!std::isfinite(beta) || !std::isfinite(lambda) || !all_finite(train.X) ||
      !all_finite(train.Delta) || !train.y.allFinite())
    throw NonFinite("fit_ffr: non-finite input");
  if (train.Delta.rows() != train.X.rows() || train.Delta.cols() != train.X.cols())
    throw InconsistentK("fit_ffr: Delta shape does not match X");
}

}  // namespace detail

/// The fair-ridge objective L(w), residual form.
inline double ffr_objective(const FusionDataset& train, double beta, double lambda,
                            const Eigen::VectorXd& w) {
  const double T = static_cast<double>(train.rows());
  return (train.X * w - train.y).squaredNorm() / T +
         beta * (train.Delta * w).squaredNorm() / T + lambda * w.squaredNorm();
}

/// Analytic gradient of L(w), residual form (no normal-matrix assembly).
inline Eigen::VectorXd ffr_gradient(const FusionDataset& train, double beta, double lambda,
                                    const Eigen::VectorXd& w) {
  const double T = static_cast<double>(train.rows());
  return 2.0 / T * (train.X.transpose() * (train.X * w - train.y)) +
         2.0 * beta / T * (train.Delta.transpose() * (train.Delta * w)) + 2.0 * lambda * w;
}

/// Training-set MSE of a fitted model, (1/T)||Xw + c - y||^2.
inline double training_mse(const FusionDataset& ds, const FusionModel& model) {
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(model.weights.data(),
                                                        static_cast<long>(model.weights.size()));
  Eigen::VectorXd r = ds.X * w - ds.y;
  r.array() += model.intercept;
  return r.squaredNorm() / static_cast<double>(ds.rows());
}

/// Fairness penalty P(w) = (1/T) sum_i (w . delta_i)^2. The intercept does
/// not enter (its Delta column is zero by construction).
inline double fairness_penalty(const FusionDataset& ds, const FusionModel& model) {
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(model.weights.data(),
                                                        static_cast<long>(model.weights.size()));
  return (ds.Delta * w).squaredNorm() / static_cast<double>(ds.rows());
}

/// Closed-form Flexible Fair Regression: the unique minimizer of L(w) via a
/// symmetric positive-definite factorization of the normal matrix.
inline FusionModel fit_ffr(const FusionDataset& train, double beta, double lambda,
                           bool intercept = false) {
  detail::check_ffr_inputs(train, beta, lambda);
  const auto [X, Delta] = detail::extend(train, intercept);
  const double T = static_cast<double>(train.rows());
  const long k = X.cols();

  Eigen::MatrixXd A = X.transpose() * X + beta * (Delta.transpose() * Delta) +
                      lambda * T * Eigen::MatrixXd::Identity(k, k);
  const Eigen::VectorXd b = X.transpose() * train.y;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw SingularSystem("fit_ffr: factorization failed (beta=" + std::to_string(beta) +
                         ", lambda=" + std::to_string(lambda) + ")");
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0) || d.minCoeff() < dmax * 1e-12)
    throw SingularSystem("fit_ffr: normal matrix is numerically singular (beta=" +
                         std::to_string(beta) + ", lambda=" + std::to_string(lambda) + ")");
  const Eigen::VectorXd w = ldlt.solve(b);
  if (!w.allFinite()) throw SingularSystem("fit_ffr: solve produced non-finite weights");

  FusionModel m;
  m.method = FitMethod::ffr;
  m.beta = beta;
  m.lambda = lambda;
  m.has_intercept = intercept;
  const long kw = intercept ? k - 1 : k;
  m.weights.assign(w.data(), w.data() + kw);
  if (intercept) m.intercept = w(k - 1);
  return m;
}

/// Ridge regression without the fairness term; delegates to fit_ffr(beta=0).
inline FusionModel fit_ols(const FusionDataset& train, double lambda,
                           bool intercept = false) {
  FusionModel m = fit_ffr(train, 0.0, lambda, intercept);
  m.method = FitMethod::ols;
  return m;
}

struct OracleOptions {
  double step = 0;          // <= 0: auto, 1/L from a power-iteration bound
  long max_iters = 500000;
  double tol = 1e-10;       // sup-norm gradient stop
};

struct OracleResult {
  FusionModel model;
  bool converged = false;
  long iterations = 0;
  double grad_sup_norm = 0;
  double step_used = 0;
};

/// Matrix-free spectral bound on the Hessian H = 2/T X'X + 2b/T D'D + 2l I
/// via power iteration (slightly inflated for a safe default step).
inline double ffr_hessian_bound(const FusionDataset& train, double beta, double lambda) {
  const double T = static_cast<double>(train.rows());
  const long k = train.cols();
  const auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return 2.0 / T * (train.X.transpose() * (train.X * v)) +
           2.0 * beta / T * (train.Delta.transpose() * (train.Delta * v)) + 2.0 * lambda * v;
  };
  Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  double eig = 2.0 * lambda;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd u = apply(v);
    const double n = u.norm();
    if (n == 0.0) break;
    eig = v.dot(u);
    v = u / n;
  }
  return std::max(eig, 2.0 * lambda) * 1.02 + 1e-300;
}

/// Plain gradient descent on L(w) from w = 0. Verification oracle for the
/// closed-form solver; divergence and iteration exhaustion surface as
/// converged = false, never as an exception.
inline OracleResult fit_ffr_oracle(const FusionDataset& train, double beta, double lambda,
                                   const OracleOptions& opts = {}) {
  detail::check_ffr_inputs(train, beta, lambda);
  OracleResult res;
  const double L = ffr_hessian_bound(train, beta, lambda);
  res.step_used = opts.step > 0 ? opts.step : 1.0 / L;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(train.cols());
  double gsup = std::numeric_limits<double>::infinity();
  long it = 0;
  for (; it < opts.max_iters; ++it) {
    const Eigen::VectorXd g = ffr_gradient(train, beta, lambda, w);
    gsup = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(gsup) || gsup > 1e12) break;  // divergent step
    if (gsup < opts.tol) {
      res.converged = true;
      break;
    }
    w -= res.step_used * g;
  }
  res.iterations = it;
  res.grad_sup_norm = gsup;
  res.model.method = FitMethod::ffr;
  res.model.beta = beta;
  res.model.lambda = lambda;
  res.model.weights.assign(w.data(), w.data() + train.cols());
  return res;
}

/// Test-set evaluation: accuracy error on the gender-averaged rows, bias as
/// the MAE between the fused per-gender predictions.
inline AuditRow evaluate(const FusionModel& model, const std::vector<GenderedPair>& pairs,
                         const std::map<std::string, double>& truths) {
  if (pairs.empty()) throw ValidationError("evaluate: empty test set");
  std::vector<double> pred, truth, pred_m, pred_f;
  pred.reserve(pairs.size());
  truth.reserve(pairs.size());
  std::vector<double> averaged;
  for (const auto& p : pairs) {
    const auto it = truths.find(p.template_id);
    if (it == truths.end())
      throw MissingTruth("evaluate: no truth for template '" + p.template_id + "'");
    if (p.male_scores.size() != model.weights.size())
      throw LengthMismatch("evaluate: pair modality count does not match model");
    averaged.resize(p.male_scores.size());
    for (std::size_t j = 0; j < p.male_scores.size(); ++j)
      averaged[j] = (p.male_scores[j] + p.female_scores[j]) / 2.0;
    pred.push_back(predict(model, averaged));
    truth.push_back(it->second);
    pred_m.push_back(predict(model, p.male_scores));
    pred_f.push_back(predict(model, p.female_scores));
  }
  AuditRow row;
  row.name = method_name(model.method);
  row.acc_error = rmse(pred, truth);
  row.bias = bias_mae(pred_m, pred_f);
  return row;
}

}  // namespace fairfuse

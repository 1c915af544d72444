#pragma once

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairfuse/corpus.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/fusion.hpp"
#include "fairfuse/metrics.hpp"

// Audit assembly and JSON serialization. Tables print with 4 decimals; JSON
// keeps full precision.

namespace fairfuse {

/// Per-modality audit: accuracy error, gender-gap MAE, the signed mean
/// difference diagnostic, and the paired t-test.
struct ModalityAudit {
  AuditRow row;
  double mean_diff = 0;
  TTestResult ttest;
};

inline ModalityAudit audit_modality(const std::string& name, std::vector<double> male,
                                    std::vector<double> female,
                                    const std::vector<double>& truth) {
  if (male.size() != female.size() || male.size() != truth.size())
    throw LengthMismatch("audit_modality: misaligned inputs");
  ModalityAudit a;
  a.row.name = name;
  std::vector<double> all_scores = male;
  all_scores.insert(all_scores.end(), female.begin(), female.end());
  std::vector<double> all_truth = truth;
  all_truth.insert(all_truth.end(), truth.begin(), truth.end());
  a.row.acc_error = rmse(all_scores, all_truth);
  a.row.bias = bias_mae(male, female);
  a.mean_diff = mean_difference(male, female);
  a.ttest = paired_t_test(male, female);
  return a;
}

/// Audit every modality of a scored corpus.
inline std::vector<ModalityAudit> audit_modalities(const std::vector<GenderedPair>& pairs,
                                                   const std::map<std::string, double>& truths,
                                                   const std::vector<std::string>& names) {
  if (pairs.empty()) throw ValidationError("audit: empty corpus");
  std::vector<double> truth;
  truth.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto it = truths.find(p.template_id);
    if (it == truths.end())
      throw MissingTruth("audit: no truth for template '" + p.template_id + "'");
    truth.push_back(it->second);
  }
  std::vector<ModalityAudit> audits;
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::vector<double> male, female;
    male.reserve(pairs.size());
    female.reserve(pairs.size());
    for (const auto& p : pairs) {
      if (p.male_scores.size() != names.size())
        throw InconsistentK("audit: modality count mismatch at '" + p.template_id + "'");
      male.push_back(p.male_scores[j]);
      female.push_back(p.female_scores[j]);
    }
    audits.push_back(audit_modality(names[j], std::move(male), std::move(female), truth));
  }
  return audits;
}

inline nlohmann::json audit_to_json(const ModalityAudit& a) {
  return {{"name", a.row.name},      {"acc_error", a.row.acc_error},
          {"bias", a.row.bias},      {"mean_diff", a.mean_diff},
          {"t", a.ttest.t_statistic}, {"df", a.ttest.degrees_of_freedom},
          {"p", a.ttest.p_value}};
}

inline nlohmann::json audit_report_json(const std::vector<ModalityAudit>& audits) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& a : audits) models.push_back(audit_to_json(a));
  return {{"models", models}};
}

inline nlohmann::json model_to_json(const FusionModel& m,
                                    const std::vector<std::string>& modality_names) {
  nlohmann::json j{{"method", method_name(m.method)},
                   {"weights", m.weights},
                   {"beta", m.beta},
                   {"lambda", m.lambda},
                   {"modality_names", modality_names}};
  if (m.method == FitMethod::fairness_opt) {
    j["tau"] = m.tau;
    if (m.degenerate_fallback) j["degenerate_fallback"] = true;
  }
  if (m.has_intercept) j["intercept"] = m.intercept;
  j["normalized"] = m.normalized;
  return j;
}

inline FusionModel model_from_json(const nlohmann::json& j) {
  FusionModel m;
  m.method = parse_method(j.at("method").get<std::string>());
  m.weights = j.at("weights").get<std::vector<double>>();
  m.beta = j.value("beta", 0.0);
  m.lambda = j.value("lambda", 0.0);
  m.tau = j.value("tau", 0.0);
  m.normalized = j.value("normalized", false);
  if (j.contains("intercept")) {
    m.intercept = j["intercept"].get<double>();
    m.has_intercept = true;
  }
  m.degenerate_fallback = j.value("degenerate_fallback", false);
  return m;
}

inline std::string format_fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

/// Aligned two-metric table, 4 decimals, mirroring the audit report layout.
inline std::string render_audit_table(const std::vector<ModalityAudit>& audits) {
  std::size_t name_w = 5;
  for (const auto& a : audits) name_w = std::max(name_w, a.row.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_w + 2)) << "model"
      << std::right << std::setw(11) << "acc_error" << std::setw(9) << "bias"
      << std::setw(12) << "mean_diff" << std::setw(10) << "t" << std::setw(6) << "df"
      << std::setw(12) << "p" << '\n';
  for (const auto& a : audits) {
    out << std::left << std::setw(static_cast<int>(name_w + 2)) << a.row.name << std::right
        << std::setw(11) << format_fixed(a.row.acc_error) << std::setw(9)
        << format_fixed(a.row.bias) << std::setw(12) << format_fixed(a.mean_diff)
        << std::setw(10) << format_fixed(a.ttest.t_statistic) << std::setw(6)
        << a.ttest.degrees_of_freedom << std::setw(12);
    if (a.ttest.p_value > 0 && a.ttest.p_value < 1e-4) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3e", a.ttest.p_value);
      out << buf;
    } else {
      out << format_fixed(a.ttest.p_value);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fairfuse

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairfuse/errors.hpp"
#include "fairfuse/rng.hpp"

// The gendered-template corpus: two-actor sentence patterns, identity-term
// expansion, annotation aggregation, gender-pair averaging and the
// train/test split.

namespace fairfuse {

/// One anonymized two-actor pattern with its ground-truth sentiment score.
/// text_pattern must contain exactly one "[S1]" and one "[S2]" slot.
struct TemplateRecord {
  std::string template_id;
  std::string text_pattern;
  double truth = 0;  // in [-1, 1]
};

struct IdentityTermPair {
  std::string male_term;
  std::string female_term;
};

enum class Valence { positive, negative };

struct AnnotationRecord {
  std::string template_id;
  std::string annotator_id;
  Valence valence = Valence::positive;
  int arousal = 1;  // 1..10
};

/// The two gender-swapped realizations of one template instance, with one
/// score per modality for each variant.
struct GenderedPair {
  std::string template_id;
  std::vector<double> male_scores;
  std::vector<double> female_scores;
  std::string male_text;
  std::string female_text;
};

/// Aligned fusion inputs over T template instances and k modalities.
/// X holds the gender-averaged scores, Delta the absolute gender gaps.
struct FusionDataset {
  std::vector<std::string> template_ids;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::MatrixXd Delta;
  std::vector<std::string> modality_names;

  long rows() const { return X.rows(); }
  long cols() const { return X.cols(); }
};

/// One expanded (template x identity-term) instance.
struct CorpusEntry {
  std::string template_id;  // the seed template's id
  std::size_t term_index = 0;
  std::string male_text;
  std::string female_text;
};

inline constexpr const char* kSlotOne = "[S1]";
inline constexpr const char* kSlotTwo = "[S2]";

namespace detail {

inline std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

inline std::string replace_once(std::string text, const std::string& needle,
                                const std::string& replacement) {
  const std::size_t pos = text.find(needle);
  text.replace(pos, needle.size(), replacement);
  return text;
}

}  // namespace detail

inline void validate_template(const TemplateRecord& t) {
  if (detail::count_occurrences(t.text_pattern, kSlotOne) != 1 ||
      detail::count_occurrences(t.text_pattern, kSlotTwo) != 1)
    throw MalformedTemplate("template '" + t.template_id +
                            "' must contain exactly one [S1] and one [S2] slot");
}

/// Instance id for one (template, term) realization: "<seed_id>#<index>".
inline std::string instance_id(const std::string& template_id, std::size_t term_index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "#%02zu", term_index);
  return template_id + buf;
}

/// Both gender realizations of a template. male_text gets the male term as
/// actor [S1] (perpetrator) and the female term as [S2]; female_text swaps
/// the roles.
inline std::pair<std::string, std::string> swap_gender(const TemplateRecord& t,
                                                       const IdentityTermPair& pair) {
  validate_template(t);
  std::string male = detail::replace_once(t.text_pattern, kSlotOne, pair.male_term);
  male = detail::replace_once(male, kSlotTwo, pair.female_term);
  std::string female = detail::replace_once(t.text_pattern, kSlotOne, pair.female_term);
  female = detail::replace_once(female, kSlotTwo, pair.male_term);
  return {male, female};
}

/// Cross product of templates and identity-term pairs. |templates| x |terms|
/// entries, two sentences each.
inline std::vector<CorpusEntry> expand_corpus(const std::vector<TemplateRecord>& templates,
                                              const std::vector<IdentityTermPair>& terms) {
  if (templates.empty() || terms.empty())
    throw ValidationError("expand_corpus: templates and terms must be non-empty");
  std::vector<CorpusEntry> entries;
  entries.reserve(templates.size() * terms.size());
  for (const auto& t : templates) {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      auto [male, female] = swap_gender(t, terms[j]);
      entries.push_back({t.template_id, j, std::move(male), std::move(female)});
    }
  }
  return entries;
}

/// Valence/arousal aggregation. Per-annotation score = sign(valence) *
/// arousal / 10. An annotator is dropped as inconsistent when their valence
/// label disagrees with the per-template strict-majority valence on more
/// than consistency_threshold of the templates they labeled (majorities are
/// computed from the unfiltered data, so the rule is order-independent).
/// Final truth per template = mean of the surviving annotators' scores.
inline std::map<std::string, double> aggregate_annotations(
    const std::vector<AnnotationRecord>& records, double consistency_threshold) {
  if (records.empty()) throw ValidationError("aggregate_annotations: no records");
  if (!(consistency_threshold >= 0.0 && consistency_threshold <= 1.0))
    throw ValidationError("aggregate_annotations: threshold outside [0, 1]");
  for (const auto& r : records)
    if (r.arousal < 1 || r.arousal > 10)
      throw ValidationError("aggregate_annotations: arousal outside 1..10 for template '" +
                            r.template_id + "'");

  // Strict-majority valence per template; ties mean nobody disagrees there.
  std::map<std::string, std::pair<int, int>> valence_counts;  // (positive, negative)
  for (const auto& r : records) {
    auto& c = valence_counts[r.template_id];
    (r.valence == Valence::positive ? c.first : c.second)++;
  }

  std::map<std::string, std::pair<int, int>> disagreements;  // annotator -> (disagree, labeled)
  for (const auto& r : records) {
    const auto& c = valence_counts[r.template_id];
    auto& d = disagreements[r.annotator_id];
    ++d.second;
    if (c.first != c.second) {
      const Valence majority = c.first > c.second ? Valence::positive : Valence::negative;
      if (r.valence != majority) ++d.first;
    }
  }

  std::set<std::string> dropped;
  for (const auto& [annotator, d] : disagreements) {
    if (static_cast<double>(d.first) >
        consistency_threshold * static_cast<double>(d.second))
      dropped.insert(annotator);
  }

  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& r : records) {
    if (dropped.count(r.annotator_id)) continue;
    const double score = (r.valence == Valence::positive ? 1.0 : -1.0) *
                         static_cast<double>(r.arousal) / 10.0;
    auto& s = sums[r.template_id];
    s.first += score;
    ++s.second;
  }

  std::map<std::string, double> truths;
  for (const auto& [tid, _] : valence_counts) {
    auto it = sums.find(tid);
    if (it == sums.end() || it->second.second == 0)
      throw EmptyAfterFilter("template '" + tid +
                             "' lost all annotators to the consistency filter");
    truths[tid] = it->second.first / static_cast<double>(it->second.second);
  }
  return truths;
}

/// Table-style pair averaging: X, Delta and y over the pairs, one row per
/// GenderedPair. X = (male + female) / 2, Delta = |male - female|.
inline FusionDataset pair_and_average(const std::vector<GenderedPair>& pairs,
                                      const std::map<std::string, double>& truths,
                                      std::vector<std::string> modality_names = {}) {
  if (pairs.empty()) throw ValidationError("pair_and_average: no pairs");
  const std::size_t k = pairs.front().male_scores.size();
  if (k == 0) throw ValidationError("pair_and_average: pairs carry no modality scores");
  for (const auto& p : pairs) {
    if (p.male_scores.size() != k || p.female_scores.size() != k)
      throw InconsistentK("pair_and_average: inconsistent modality count at '" +
                          p.template_id + "'");
  }
  if (modality_names.empty()) {
    for (std::size_t j = 0; j < k; ++j) modality_names.push_back("m" + std::to_string(j));
  } else if (modality_names.size() != k) {
    throw InconsistentK("pair_and_average: modality name count mismatch");
  }

  FusionDataset ds;
  ds.modality_names = std::move(modality_names);
  const long T = static_cast<long>(pairs.size());
  ds.X.resize(T, static_cast<long>(k));
  ds.Delta.resize(T, static_cast<long>(k));
  ds.y.resize(T);
  ds.template_ids.reserve(pairs.size());
  for (long i = 0; i < T; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    const auto it = truths.find(p.template_id);
    if (it == truths.end())
      throw MissingTruth("pair_and_average: no truth for template '" + p.template_id + "'");
    if (!(it->second >= -1.0 && it->second <= 1.0))
      throw ValidationError("pair_and_average: truth outside [-1, 1] for '" +
                            p.template_id + "'");
    ds.template_ids.push_back(p.template_id);
    ds.y(i) = it->second;
    for (std::size_t j = 0; j < k; ++j) {
      const double m = p.male_scores[j];
      const double f = p.female_scores[j];
      if (!(m >= -1.0 && m <= 1.0 && f >= -1.0 && f <= 1.0))
        throw ValidationError("pair_and_average: score outside [-1, 1] for '" +
                              p.template_id + "'");
      ds.X(i, static_cast<long>(j)) = (m + f) / 2.0;
      ds.Delta(i, static_cast<long>(j)) = std::fabs(m - f);
    }
  }
  return ds;
}

/// Deterministic index partition used by every split path, so a pair and its
/// averaged/Delta row always land on the same side. Selected indices keep
/// their original relative order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t total, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split: train_fraction must be in (0, 1)");
  if (total < 2) throw DatasetTooSmall("split: need at least 2 rows");
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(total)));
  if (n_train == 0 || n_train == total)
    throw DatasetTooSmall("split: one side of the split would be empty");

  std::vector<std::size_t> perm(total);
  for (std::size_t i = 0; i < total; ++i) perm[i] = i;
  rng::SplitMix prng(rng::mix(seed, rng::fnv1a64("split")));
  for (std::size_t i = total - 1; i > 0; --i)
    std::swap(perm[i], perm[prng.below(i + 1)]);

  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<long>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<long>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

inline FusionDataset take_rows(const FusionDataset& ds, const std::vector<std::size_t>& idx) {
  FusionDataset out;
  out.modality_names = ds.modality_names;
  out.X.resize(static_cast<long>(idx.size()), ds.X.cols());
  out.Delta.resize(static_cast<long>(idx.size()), ds.Delta.cols());
  out.y.resize(static_cast<long>(idx.size()));
  out.template_ids.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = static_cast<long>(idx[i]);
    out.X.row(static_cast<long>(i)) = ds.X.row(r);
    out.Delta.row(static_cast<long>(i)) = ds.Delta.row(r);
    out.y(static_cast<long>(i)) = ds.y(r);
    out.template_ids.push_back(ds.template_ids[idx[i]]);
  }
  return out;
}

/// Template-level 70:30-style split: each row (one template instance, both
/// gender variants) lands on exactly one side. |train| = round(fraction * T).
inline std::pair<FusionDataset, FusionDataset> split(const FusionDataset& ds,
                                                     double train_fraction,
                                                     std::uint64_t seed) {
  auto [train_idx, test_idx] =
      split_indices(static_cast<std::size_t>(ds.rows()), train_fraction, seed);
  return {take_rows(ds, train_idx), take_rows(ds, test_idx)};
}

}  // namespace fairfuse

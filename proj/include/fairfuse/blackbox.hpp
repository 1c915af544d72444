#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fairfuse/corpus.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/rng.hpp"

// Black-box score sources. A recorded provider replays scores collected from
// a real API; a synthetic provider generates scores with configurable
// accuracy noise and an additive gender shift, deterministically keyed by
// (seed, template_id, pair_index, gender) so results do not depend on
// iteration order.

namespace fairfuse {

enum class ProviderKind { recorded, synthetic };

/// Marker for "no explicit seed configured"; resolved from the global seed.
inline constexpr std::uint64_t kSeedUnset = UINT64_MAX;

struct ProviderSpec {
  std::string name;
  ProviderKind kind = ProviderKind::synthetic;
  // synthetic only
  double bias = 0.0;        // gender shift: male gets -bias/2, female +bias/2
  double noise_sigma = 0.0; // >= 0
  std::uint64_t seed = 0;
  // recorded only
  std::string path;  // backing score file
};

/// Recorded scores per template instance: instance id -> (male, female).
using RecordedTable = std::map<std::string, std::pair<double, double>>;

struct Provider {
  ProviderSpec spec;
  std::shared_ptr<const RecordedTable> recorded;  // set for recorded providers
};

inline void validate_provider(const ProviderSpec& spec) {
  if (spec.name.empty()) throw ValidationError("provider without a name");
  if (spec.kind == ProviderKind::synthetic) {
    if (!(spec.noise_sigma >= 0.0))
      throw ValidationError("provider '" + spec.name + "': noise_sigma must be >= 0");
  } else if (spec.path.empty()) {
    throw ValidationError("recorded provider '" + spec.name + "' needs a data path");
  }
}

namespace detail {

inline double synthetic_score(const ProviderSpec& spec, const TemplateRecord& t,
                              std::size_t pair_index, bool female) {
  std::uint64_t key = rng::mix(spec.seed, rng::fnv1a64(t.template_id));
  key = rng::mix(key, static_cast<std::uint64_t>(pair_index));
  key = rng::mix(key, female ? 2u : 1u);
  const double eps = spec.noise_sigma == 0.0 ? 0.0
                                             : spec.noise_sigma * rng::normal_from_key(key);
  const double shift = female ? spec.bias / 2.0 : -spec.bias / 2.0;
  return std::clamp(t.truth + shift + eps, -1.0, 1.0);
}

}  // namespace detail

/// Scores for the two gender variants of one template instance.
inline std::pair<double, double> score_pair(const Provider& provider,
                                            const TemplateRecord& t,
                                            std::size_t pair_index) {
  if (provider.spec.kind == ProviderKind::synthetic) {
    return {detail::synthetic_score(provider.spec, t, pair_index, false),
            detail::synthetic_score(provider.spec, t, pair_index, true)};
  }
  if (!provider.recorded)
    throw ValidationError("recorded provider '" + provider.spec.name + "' has no table loaded");
  const std::string id = instance_id(t.template_id, pair_index);
  const auto it = provider.recorded->find(id);
  if (it == provider.recorded->end())
    throw MissingRecordedScore("provider '" + provider.spec.name +
                               "': no recorded score for instance '" + id + "'");
  return it->second;
}

/// Score every corpus entry with every provider. Per entry, scores are
/// ordered as the provider list; the result is deterministic for fixed seeds.
inline std::vector<GenderedPair> score_corpus(const std::vector<Provider>& providers,
                                              const std::vector<TemplateRecord>& templates,
                                              const std::vector<CorpusEntry>& entries) {
  if (providers.empty()) throw ValidationError("score_corpus: no providers");
  std::map<std::string, const TemplateRecord*> by_id;
  for (const auto& t : templates) by_id[t.template_id] = &t;

  std::vector<GenderedPair> pairs;
  pairs.reserve(entries.size());
  for (const auto& e : entries) {
    const auto it = by_id.find(e.template_id);
    if (it == by_id.end())
      throw ValidationError("score_corpus: entry references unknown template '" +
                            e.template_id + "'");
    GenderedPair p;
    p.template_id = instance_id(e.template_id, e.term_index);
    p.male_text = e.male_text;
    p.female_text = e.female_text;
    p.male_scores.reserve(providers.size());
    p.female_scores.reserve(providers.size());
    for (const auto& provider : providers) {
      try {
        auto [m, f] = score_pair(provider, *it->second, e.term_index);
        p.male_scores.push_back(m);
        p.female_scores.push_back(f);
      } catch (const MissingRecordedScore& err) {
        throw MissingRecordedScore(std::string(err.what()) + " (while scoring entry '" +
                                   e.template_id + "' term " + std::to_string(e.term_index) +
                                   ")");
      }
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

/// Truths keyed by instance id, as needed alongside score_corpus output.
inline std::map<std::string, double> instance_truths(
    const std::vector<TemplateRecord>& templates,
    const std::vector<CorpusEntry>& entries) {
  std::map<std::string, double> by_seed_id;
  for (const auto& t : templates) by_seed_id[t.template_id] = t.truth;
  std::map<std::string, double> truths;
  for (const auto& e : entries) {
    const auto it = by_seed_id.find(e.template_id);
    if (it == by_seed_id.end())
      throw ValidationError("instance_truths: unknown template '" + e.template_id + "'");
    truths[instance_id(e.template_id, e.term_index)] = it->second;
  }
  return truths;
}

}  // namespace fairfuse

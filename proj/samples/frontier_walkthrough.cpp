// Library walkthrough: build a small synthetic corpus in memory, audit the
// providers, fit every fusion baseline, then sweep the fairness weight and
// query the frontier. Compile target: `samples_frontier_walkthrough`.

#include <cstdio>
#include <string>
#include <vector>

#include "fairfuse/fairfuse.hpp"

using namespace fairfuse;

int main() {
  // forty two-actor templates, mildly negative ground truth
  std::vector<TemplateRecord> templates;
  for (int i = 0; i < 40; ++i)
    templates.push_back({"t" + std::to_string(i),
                         "[S1] confronts [S2] case " + std::to_string(i),
                         -0.5 + 0.01 * i});
  const std::vector<IdentityTermPair> terms{
      {"man", "woman"}, {"boy", "girl"}, {"king", "queen"}, {"uncle", "aunt"},
      {"actor", "actress"}};

  // two skewed scorers and one clean-but-noisy one
  RunConfig cfg;
  cfg.seed = 21;
  cfg.providers = {
      {"skewed_a", ProviderKind::synthetic, 0.25, 0.30, kSeedUnset, ""},
      {"skewed_b", ProviderKind::synthetic, 0.15, 0.25, kSeedUnset, ""},
      {"clean", ProviderKind::synthetic, 0.00, 0.20, kSeedUnset, ""},
  };
  const auto providers = materialize_providers(cfg);

  const auto entries = expand_corpus(templates, terms);
  const auto pairs = score_corpus(providers, templates, entries);
  const auto truths = instance_truths(templates, entries);
  std::vector<std::string> names;
  for (const auto& p : providers) names.push_back(p.spec.name);

  std::printf("== provider audit (%zu gendered pairs) ==\n", pairs.size());
  for (const auto& a : audit_modalities(pairs, truths, names))
    std::printf("%-10s acc_error %.4f  bias %.4f  mean_diff %+.4f  p %.3g\n",
                a.row.name.c_str(), a.row.acc_error, a.row.bias, a.mean_diff,
                a.ttest.p_value);

  const auto [train_idx, test_idx] = split_indices(pairs.size(), 0.7, *cfg.seed);
  std::vector<GenderedPair> train_pairs, test_pairs;
  for (auto i : train_idx) train_pairs.push_back(pairs[i]);
  for (auto i : test_idx) test_pairs.push_back(pairs[i]);
  const FusionDataset train = pair_and_average(train_pairs, truths, names);

  std::printf("\n== fusion methods on the held-out split ==\n");
  const FusionModel ols = fit_ols(train, 1e-6);
  const FusionModel fo = fit_fairness_opt(train_pairs, 0.1);
  for (const FusionModel& m : {fit_unweighted(names.size()), fit_weighted(train), ols, fo,
                               fit_ffr(train, 0.5, 1e-6)}) {
    const AuditRow row = evaluate(m, test_pairs, truths);
    std::printf("%-13s acc_error %.4f  bias %.4f\n", row.name.c_str(), row.acc_error,
                row.bias);
  }

  const AuditRow ols_row = evaluate(ols, test_pairs, truths);
  const AuditRow fo_row = evaluate(fo, test_pairs, truths);
  const auto points =
      sweep(train, test_pairs, truths, build_beta_grid(1e-4, 1e2, 30), 1e-6);
  const UtopiaSelection sel = utopia_select(points, {ols_row.acc_error, ols_row.bias},
                                            {fo_row.acc_error, fo_row.bias});
  std::printf("\n== frontier ==\nutopia (%.4f, %.4f), chosen beta %g at (%.4f, %.4f)\n",
              sel.utopia.first, sel.utopia.second, sel.chosen_beta,
              sel.chosen_point.acc_error, sel.chosen_point.bias);
  const SweepPoint ref{0.0, ols_row.acc_error, ols_row.bias, false};
  for (double budget : {0.05, 0.10, 0.20}) {
    const SweepPoint q = budget_query(points, ref, budget);
    std::printf("budget %4.0f%%: beta %-10g bias %.4f (%.1f%% below the ridge baseline)\n",
                budget * 100, q.beta, q.bias, 100.0 * (1.0 - q.bias / ref.bias));
  }
  return 0;
}

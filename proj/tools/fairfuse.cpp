// fairfuse: audit black-box sentiment scorers for gender bias on two-actor
// templates and fuse them with a fairness-penalized regression.
//
// Subcommands: generate, audit, fit, sweep, report. Every command is
// deterministic given its config and seeds, and validates all inputs before
// writing any output file.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fairfuse/fairfuse.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> templates_path;
  std::optional<std::string> terms_path;
  std::optional<std::string> annotations_path;
  std::optional<std::string> corpus_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> split_fraction;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::optional<std::string> beta_grid;
  std::vector<double> budgets;
  std::optional<std::string> distance;
  std::optional<std::string> format;
  std::optional<bool> intercept;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Config file (flags override file values)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Global seed (FAIRFUSE_SEED is the fallback)");
  cmd->add_option("--format", o.format, "Output format: table|json|csv");
}

fairfuse::RunConfig resolve(const Overrides& o) {
  fairfuse::RunConfig cfg;
  if (o.config_path) cfg = fairfuse::load_config(*o.config_path);
  if (o.templates_path) cfg.templates_path = *o.templates_path;
  if (o.terms_path) cfg.terms_path = *o.terms_path;
  if (o.annotations_path) cfg.annotations_path = *o.annotations_path;
  if (o.corpus_path) cfg.corpus_path = *o.corpus_path;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.split_fraction) cfg.split_fraction = *o.split_fraction;
  if (o.tau) cfg.tau = *o.tau;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.beta) cfg.beta = *o.beta;
  if (o.beta_grid) cfg.beta_grid = fairfuse::parse_beta_grid(*o.beta_grid);
  if (!o.budgets.empty()) cfg.budgets = o.budgets;
  if (o.distance) cfg.distance = fairfuse::parse_distance_mode(*o.distance);
  if (o.format) cfg.format = *o.format;
  if (o.intercept) cfg.intercept = *o.intercept;
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
    throw fairfuse::ValidationError("--split must be in (0, 1)");
  return cfg;
}

void write_json_file(const fs::path& path, const json& j) {
  fairfuse::write_file(path.string(), j.dump(2) + "\n");
}

fs::path ensure_out_dir(const fairfuse::RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const Overrides& o) {
  const fairfuse::RunConfig cfg = resolve(o);
  if (cfg.templates_path.empty())
    throw fairfuse::ValidationError("generate needs --templates (or a config entry)");
  if (cfg.terms_path.empty())
    throw fairfuse::ValidationError("generate needs --terms (or a config entry)");

  std::vector<fairfuse::TemplateRecord> templates = fairfuse::load_templates(cfg.templates_path);
  const auto terms = fairfuse::load_identity_terms(cfg.terms_path);
  if (!cfg.annotations_path.empty()) {
    const auto annotations = fairfuse::load_annotations(cfg.annotations_path);
    const auto truths = fairfuse::aggregate_annotations(annotations, 0.3);
    for (auto& t : templates) {
      const auto it = truths.find(t.template_id);
      if (it == truths.end())
        throw fairfuse::ValidationError("no annotations for template '" + t.template_id + "'");
      t.truth = it->second;
    }
  }
  const auto providers = fairfuse::materialize_providers(cfg);

  const auto entries = fairfuse::expand_corpus(templates, terms);
  fairfuse::Corpus corpus;
  for (const auto& p : providers) corpus.modality_names.push_back(p.spec.name);
  corpus.pairs = fairfuse::score_corpus(providers, templates, entries);
  corpus.truths = fairfuse::instance_truths(templates, entries);

  const fs::path dir = ensure_out_dir(cfg);
  const fs::path out = dir / "corpus.csv";
  fairfuse::write_corpus(out.string(), corpus);
  std::cout << "wrote " << 2 * corpus.pairs.size() << " rows (" << corpus.pairs.size()
            << " gendered pairs, " << corpus.modality_names.size() << " modalities) to "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// audit

int cmd_audit(const Overrides& o) {
  const fairfuse::RunConfig cfg = resolve(o);
  if (cfg.corpus_path.empty())
    throw fairfuse::ValidationError("audit needs --corpus (or a config entry)");
  const fairfuse::Corpus corpus = fairfuse::load_corpus(cfg.corpus_path);
  const auto audits =
      fairfuse::audit_modalities(corpus.pairs, corpus.truths, corpus.modality_names);
  const json report = fairfuse::audit_report_json(audits);

  const fs::path dir = ensure_out_dir(cfg);
  write_json_file(dir / "audit.json", report);
  if (cfg.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else if (cfg.format == "csv") {
    std::cout << "name,acc_error,bias,mean_diff,t,df,p\n";
    for (const auto& a : audits)
      std::cout << fairfuse::csv::quote_field(a.row.name) << ','
                << fairfuse::csv::format_double(a.row.acc_error) << ','
                << fairfuse::csv::format_double(a.row.bias) << ','
                << fairfuse::csv::format_double(a.mean_diff) << ','
                << fairfuse::csv::format_double(a.ttest.t_statistic) << ','
                << a.ttest.degrees_of_freedom << ','
                << fairfuse::csv::format_double(a.ttest.p_value) << "\n";
  } else {
    std::cout << fairfuse::render_audit_table(audits);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct SplitCorpus {
  std::vector<fairfuse::GenderedPair> train_pairs, test_pairs;
  fairfuse::FusionDataset train, test;
};

SplitCorpus split_corpus(const fairfuse::Corpus& corpus, const fairfuse::RunConfig& cfg) {
  const auto [train_idx, test_idx] = fairfuse::split_indices(
      corpus.pairs.size(), cfg.split_fraction, cfg.effective_seed());
  SplitCorpus s;
  for (std::size_t i : train_idx) s.train_pairs.push_back(corpus.pairs[i]);
  for (std::size_t i : test_idx) s.test_pairs.push_back(corpus.pairs[i]);
  s.train = fairfuse::pair_and_average(s.train_pairs, corpus.truths, corpus.modality_names);
  s.test = fairfuse::pair_and_average(s.test_pairs, corpus.truths, corpus.modality_names);
  return s;
}

fairfuse::FusionModel fit_by_method(fairfuse::FitMethod method, const SplitCorpus& s,
                                    const fairfuse::RunConfig& cfg) {
  switch (method) {
    case fairfuse::FitMethod::unweighted:
      return fairfuse::fit_unweighted(static_cast<std::size_t>(s.train.cols()));
    case fairfuse::FitMethod::weighted:
      return fairfuse::fit_weighted(s.train);
    case fairfuse::FitMethod::ols:
      return fairfuse::fit_ols(s.train, cfg.lambda, cfg.intercept);
    case fairfuse::FitMethod::fairness_opt:
      return fairfuse::fit_fairness_opt(s.train_pairs, cfg.tau);
    case fairfuse::FitMethod::ffr:
      return fairfuse::fit_ffr(s.train, cfg.beta.value_or(0.0), cfg.lambda, cfg.intercept);
  }
  throw fairfuse::ValidationError("unreachable method");
}

void upsert_report_row(const fs::path& report_path, const json& row) {
  json report = json::object();
  report["models"] = json::array();
  if (fs::exists(report_path)) {
    std::ifstream in(report_path);
    in >> report;
    if (!report.contains("models") || !report["models"].is_array())
      report["models"] = json::array();
  }
  bool replaced = false;
  for (auto& entry : report["models"]) {
    if (entry.value("name", "") == row.value("name", "")) {
      entry = row;
      replaced = true;
    }
  }
  if (!replaced) report["models"].push_back(row);
  write_json_file(report_path, report);
}

int cmd_fit(const Overrides& o, const std::string& method_str) {
  const fairfuse::RunConfig cfg = resolve(o);
  if (cfg.corpus_path.empty())
    throw fairfuse::ValidationError("fit needs --corpus (or a config entry)");
  const fairfuse::FitMethod method = fairfuse::parse_method(method_str);
  const fairfuse::Corpus corpus = fairfuse::load_corpus(cfg.corpus_path);
  const SplitCorpus s = split_corpus(corpus, cfg);

  const fairfuse::FusionModel model = fit_by_method(method, s, cfg);
  const fairfuse::AuditRow row = fairfuse::evaluate(model, s.test_pairs, corpus.truths);

  json row_json{{"name", row.name},
                {"acc_error", row.acc_error},
                {"bias", row.bias},
                {"train_mse", fairfuse::training_mse(s.train, model)},
                {"train_penalty", fairfuse::fairness_penalty(s.train, model)}};
  if (method == fairfuse::FitMethod::ffr) {
    row_json["beta"] = model.beta;
    row_json["lambda"] = model.lambda;
  } else if (method == fairfuse::FitMethod::ols) {
    row_json["lambda"] = model.lambda;
  } else if (method == fairfuse::FitMethod::fairness_opt) {
    row_json["tau"] = model.tau;
  }

  const fs::path dir = ensure_out_dir(cfg);
  write_json_file(dir / ("model_" + method_str + ".json"),
                  fairfuse::model_to_json(model, corpus.modality_names));
  upsert_report_row(dir / "report.json", row_json);

  std::cout << row.name << "  acc_error=" << fairfuse::format_fixed(row.acc_error)
            << "  bias=" << fairfuse::format_fixed(row.bias) << "\n";
  std::cout << "weights:";
  for (double w : model.weights) std::cout << ' ' << fairfuse::format_fixed(w);
  if (model.has_intercept)
    std::cout << "  intercept=" << fairfuse::format_fixed(model.intercept);
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const Overrides& o) {
  const fairfuse::RunConfig cfg = resolve(o);
  if (cfg.corpus_path.empty())
    throw fairfuse::ValidationError("sweep needs --corpus (or a config entry)");
  const fairfuse::Corpus corpus = fairfuse::load_corpus(cfg.corpus_path);
  const SplitCorpus s = split_corpus(corpus, cfg);

  std::vector<double> betas;
  if (cfg.beta) {
    betas.push_back(*cfg.beta);
  } else {
    betas = fairfuse::build_beta_grid(cfg.beta_grid.lo, cfg.beta_grid.hi, cfg.beta_grid.n,
                                      cfg.beta_grid.include_zero);
  }

  const fairfuse::FusionModel ols = fairfuse::fit_ols(s.train, cfg.lambda, cfg.intercept);
  const fairfuse::FusionModel fo = fairfuse::fit_fairness_opt(s.train_pairs, cfg.tau);
  const fairfuse::AuditRow ols_row = fairfuse::evaluate(ols, s.test_pairs, corpus.truths);
  const fairfuse::AuditRow fo_row = fairfuse::evaluate(fo, s.test_pairs, corpus.truths);

  const auto points = fairfuse::sweep(s.train, s.test_pairs, corpus.truths, betas, cfg.lambda);
  const auto selection = fairfuse::utopia_select(points, {ols_row.acc_error, ols_row.bias},
                                                 {fo_row.acc_error, fo_row.bias}, cfg.distance);

  const fairfuse::SweepPoint reference{0.0, ols_row.acc_error, ols_row.bias, false};
  json budget_answers = json::array();
  for (double budget : cfg.budgets) {
    const fairfuse::SweepPoint q = fairfuse::budget_query(points, reference, budget);
    budget_answers.push_back({{"budget", budget},
                              {"beta", q.beta},
                              {"acc_error", q.acc_error},
                              {"bias", q.bias},
                              {"bias_reduction_vs_reference",
                               reference.bias > 0 ? 1.0 - q.bias / reference.bias : 0.0}});
  }

  json sweep_json{
      {"lambda", cfg.lambda},
      {"distance_mode", cfg.distance == fairfuse::DistanceMode::raw ? "raw" : "normalized"},
      {"baselines",
       {{"ols", {{"acc_error", ols_row.acc_error}, {"bias", ols_row.bias}}},
        {"fairness_opt", {{"acc_error", fo_row.acc_error}, {"bias", fo_row.bias}}}}},
      {"utopia", {{"acc_error", selection.utopia.first}, {"bias", selection.utopia.second}}},
      {"chosen",
       {{"beta", selection.chosen_beta},
        {"acc_error", selection.chosen_point.acc_error},
        {"bias", selection.chosen_point.bias},
        {"distance", selection.distance}}},
      {"budgets", budget_answers}};

  const fs::path dir = ensure_out_dir(cfg);
  fairfuse::write_frontier_csv((dir / "frontier.csv").string(), points);
  write_json_file(dir / "sweep.json", sweep_json);

  if (cfg.format == "json") {
    std::cout << sweep_json.dump(2) << "\n";
    return 0;
  }
  std::size_t kept = 0;
  for (const auto& p : points)
    if (!p.dominated) ++kept;
  std::cout << "swept " << points.size() << " beta values (" << kept << " non-dominated)\n";
  std::cout << "baseline ols          acc_error=" << fairfuse::format_fixed(ols_row.acc_error)
            << "  bias=" << fairfuse::format_fixed(ols_row.bias) << "\n";
  std::cout << "baseline fairness_opt acc_error=" << fairfuse::format_fixed(fo_row.acc_error)
            << "  bias=" << fairfuse::format_fixed(fo_row.bias) << "\n";
  std::cout << "utopia point          acc_error=" << fairfuse::format_fixed(selection.utopia.first)
            << "  bias=" << fairfuse::format_fixed(selection.utopia.second) << "\n";
  std::cout << "chosen beta=" << fairfuse::csv::format_double(selection.chosen_beta)
            << "  acc_error=" << fairfuse::format_fixed(selection.chosen_point.acc_error)
            << "  bias=" << fairfuse::format_fixed(selection.chosen_point.bias)
            << "  distance=" << fairfuse::format_fixed(selection.distance) << "\n";
  for (const auto& b : budget_answers) {
    std::cout << "budget " << fairfuse::format_fixed(b["budget"].get<double>(), 2)
              << ": beta=" << fairfuse::csv::format_double(b["beta"].get<double>())
              << "  acc_error=" << fairfuse::format_fixed(b["acc_error"].get<double>())
              << "  bias=" << fairfuse::format_fixed(b["bias"].get<double>()) << "  ("
              << fairfuse::format_fixed(
                     100.0 * b["bias_reduction_vs_reference"].get<double>(), 1)
              << "% bias reduction vs ols)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const Overrides& o) {
  const fairfuse::RunConfig cfg = resolve(o);
  const fs::path dir(cfg.out_dir);
  bool printed = false;

  const fs::path report_path = dir / "report.json";
  if (fs::exists(report_path)) {
    std::ifstream in(report_path);
    json report;
    in >> report;
    if (cfg.format == "json") {
      std::cout << report.dump(2) << "\n";
    } else if (cfg.format == "csv") {
      std::cout << "name,acc_error,bias\n";
      for (const auto& m : report["models"])
        std::cout << m.value("name", "") << ','
                  << fairfuse::csv::format_double(m.value("acc_error", 0.0)) << ','
                  << fairfuse::csv::format_double(m.value("bias", 0.0)) << "\n";
    } else {
      std::cout << std::left << std::setw(16) << "model" << std::right << std::setw(11)
                << "acc_error" << std::setw(9) << "bias" << "\n";
      for (const auto& m : report["models"])
        std::cout << std::left << std::setw(16) << m.value("name", "") << std::right
                  << std::setw(11) << fairfuse::format_fixed(m.value("acc_error", 0.0))
                  << std::setw(9) << fairfuse::format_fixed(m.value("bias", 0.0)) << "\n";
    }
    printed = true;
  }

  const fs::path sweep_path = dir / "sweep.json";
  if (fs::exists(sweep_path) && cfg.format != "json" && cfg.format != "csv") {
    std::ifstream in(sweep_path);
    json sj;
    in >> sj;
    std::cout << "chosen beta=" << fairfuse::csv::format_double(sj["chosen"]["beta"].get<double>())
              << "  acc_error=" << fairfuse::format_fixed(sj["chosen"]["acc_error"].get<double>())
              << "  bias=" << fairfuse::format_fixed(sj["chosen"]["bias"].get<double>()) << "\n";
    printed = true;
  }

  if (!printed)
    throw fairfuse::ValidationError("nothing to report in '" + cfg.out_dir +
                                    "' (run audit/fit/sweep first)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gender-bias auditing and fair fusion of black-box sentiment scorers"};
  app.require_subcommand(1);

  Overrides o;
  std::string fit_method;

  CLI::App* generate = app.add_subcommand("generate", "Expand templates and score the corpus");
  add_common_flags(generate, o);
  generate->add_option("--templates", o.templates_path, "Template seed CSV");
  generate->add_option("--terms", o.terms_path, "Identity term pairs CSV");
  generate->add_option("--annotations", o.annotations_path,
                       "Annotation CSV; aggregated scores replace the seed truths");

  CLI::App* audit = app.add_subcommand("audit", "Per-modality accuracy and bias report");
  add_common_flags(audit, o);
  audit->add_option("--corpus", o.corpus_path, "Scored corpus CSV");

  CLI::App* fit = app.add_subcommand("fit", "Fit a fusion model and evaluate it");
  add_common_flags(fit, o);
  fit->add_option("method", fit_method, "unweighted|weighted|ols|fairness_opt|ffr")
      ->required();
  fit->add_option("--corpus", o.corpus_path, "Scored corpus CSV");
  fit->add_option("--split", o.split_fraction, "Train fraction in (0, 1)");
  fit->add_option("--tau", o.tau, "Fairness threshold for fairness_opt");
  fit->add_option("--lambda", o.lambda, "Ridge strength");
  fit->add_option("--beta", o.beta, "Fairness penalty strength (ffr)");
  fit->add_flag("--intercept", [&o](std::int64_t) { o.intercept = true; },
                "Fit an unpenalized-offset intercept column");

  CLI::App* sweep = app.add_subcommand("sweep", "Beta sweep, frontier and utopia selection");
  add_common_flags(sweep, o);
  sweep->add_option("--corpus", o.corpus_path, "Scored corpus CSV");
  sweep->add_option("--split", o.split_fraction, "Train fraction in (0, 1)");
  sweep->add_option("--tau", o.tau, "Fairness threshold for the FO anchor");
  sweep->add_option("--lambda", o.lambda, "Ridge strength");
  sweep->add_option("--beta", o.beta, "Sweep a single beta instead of the grid");
  sweep->add_option("--beta-grid", o.beta_grid, "lo:hi:n log-spaced grid (plus beta=0)");
  sweep->add_option("--budget", o.budgets, "Accuracy budget fraction (repeatable)");
  sweep->add_option("--distance", o.distance, "Utopia distance: raw|normalized");

  CLI::App* report = app.add_subcommand("report", "Re-render reports from an output directory");
  add_common_flags(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (generate->parsed()) return cmd_generate(o);
    if (audit->parsed()) return cmd_audit(o);
    if (fit->parsed()) return cmd_fit(o, fit_method);
    if (sweep->parsed()) return cmd_sweep(o);
    if (report->parsed()) return cmd_report(o);
  } catch (const fairfuse::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fairfuse::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "senti/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> business_path;
  std::optional<std::string> review_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::string> grid;
  std::optional<std::string> mode;
  std::optional<int> k;
  std::optional<int> epochs;
  std::optional<std::string> stoplist;
};

void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "flat key = value config file");
  cmd->add_option("--business", ov.business_path, "business JSON Lines file");
  cmd->add_option("--reviews", ov.review_path, "review JSON Lines file");
  cmd->add_option("--out", ov.out_dir, "run output directory");
  cmd->add_option("--seed", ov.seed, "root seed for all randomness");
  cmd->add_option("--lambda", ov.lambda, "regularization parameter");
  cmd->add_option("--grid", ov.grid, "comma-separated lambda grid");
  cmd->add_option("--mode", ov.mode, "feature mode: bow or tfidf");
  cmd->add_option("--k", ov.k, "top-k entries per report scope");
  cmd->add_option("--epochs", ov.epochs, "training epochs");
  cmd->add_option("--stoplist", ov.stoplist, "generic-adjective stoplist file");
}

senti::PipelineConfig resolve(const Overrides& ov) {
  senti::PipelineConfig cfg;
  if (ov.config_path) cfg = senti::load_config(*ov.config_path);
  if (ov.business_path) cfg.business_path = *ov.business_path;
  if (ov.review_path) cfg.review_path = *ov.review_path;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.lambda) cfg.lambda = *ov.lambda;
  if (ov.grid) senti::apply_config_entry(cfg, "lambda_grid", *ov.grid);
  if (ov.mode) cfg.feature_mode = senti::feature_mode_from_string(*ov.mode);
  if (ov.k) cfg.top_k = *ov.k;
  if (ov.epochs) cfg.max_epochs = *ov.epochs;
  if (ov.stoplist) cfg.stoplist_path = *ov.stoplist;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiment lexicon pipeline for restaurant reviews"};
  app.require_subcommand(1);
  Overrides ov;

  auto* ingest = app.add_subcommand(
      "ingest", "load, join, label and split the raw dataset");
  auto* train = app.add_subcommand(
      "train", "build vocabulary and train the SVM on the ingested splits");
  auto* sweep = app.add_subcommand(
      "sweep", "train across a lambda grid and pick the validation winner");
  auto* report = app.add_subcommand(
      "report", "emit overall and per-category polarity reports");
  for (auto* cmd : {ingest, train, sweep, report}) add_common(cmd, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    const senti::PipelineConfig cfg = resolve(ov);
    if (ingest->parsed()) {
      auto out = senti::cmd_ingest(cfg);
      std::cout << "ingest: " << out.stats.reviews_joined << " reviews -> "
                << out.n_train << "/" << out.n_validation << "/" << out.n_test
                << " (train/validation/test)\n";
    } else if (train->parsed() || sweep->parsed()) {
      auto out = sweep->parsed() ? senti::cmd_sweep(cfg) : senti::cmd_train(cfg);
      std::cout << "lambda " << out.lambda_used
                << "  validation accuracy " << out.validation.accuracy
                << "  test accuracy " << out.test.accuracy << '\n';
      if (out.sweep)
        for (const auto& row : out.sweep->table)
          std::cout << "  lambda " << row.lambda << " -> validation accuracy "
                    << row.validation.accuracy << '\n';
    } else if (report->parsed()) {
      auto rep = senti::cmd_report(cfg);
      std::cout << "report: " << rep.scopes.size() << " scopes, k=" << rep.k
                << ", stoplist " << rep.stoplist_id << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return senti::exit_code_for(e);
  }
  return 0;
}

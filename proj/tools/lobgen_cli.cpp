// Command-line front end: ties ingestion, training, generation, and
// evaluation together behind a flat config file with flag overrides.

#include <CLI11.hpp>
#include <iostream>

#include "lobgen/cli/commands.hpp"
#include "lobgen/cli/config.hpp"

namespace cli = lobgen::cli;

int main(int argc, char** argv) {
  CLI::App app{"order flow model toolkit"};
  app.require_subcommand(1);

  std::string config_file;
  cli::RunConfig cfg;
  bool seed_set = false, workers_set = false, out_set = false;
  std::uint64_t seed_flag = 0;
  int workers_flag = 0;
  std::string out_flag;
  app.add_option("--config", config_file, "config file (key = value lines)");
  app.add_option("--seed", seed_flag, "master seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--workers", workers_flag, "worker thread count")
      ->each([&](const std::string&) { workers_set = true; });
  app.add_option("--out", out_flag, "output directory override")
      ->each([&](const std::string&) { out_set = true; });

  auto* ingest = app.add_subcommand("ingest", "parse and preprocess raw days");
  auto* preprocess =
      app.add_subcommand("preprocess", "alias of ingest (parse + preprocess)");
  cli::IngestOptions ingest_opt;
  for (auto* sub : {ingest, preprocess}) {
    sub->add_option("dates", ingest_opt.dates, "dates to process")->required();
    sub->add_option("--synthetic", ingest_opt.synthetic_messages,
                    "generate synthetic fixture days with this many messages");
  }

  auto* encode = app.add_subcommand("encode", "dataset file to token stream");
  std::string encode_in, encode_out = "tokens.bin";
  encode->add_option("dataset", encode_in, "dataset file")->required();
  encode->add_option("--tokens", encode_out, "output token stream path");

  auto* train = app.add_subcommand("train", "train the model on dataset files");
  std::vector<std::string> train_sets;
  train->add_option("datasets", train_sets, "dataset files")->required();

  auto* generate = app.add_subcommand("generate", "closed-loop generation");
  std::string gen_ckpt, gen_dataset, gen_out = "generated";
  generate->add_option("--checkpoint", gen_ckpt, "model checkpoint")->required();
  generate->add_option("dataset", gen_dataset, "seed dataset file")->required();
  generate->add_option("--gen-out", gen_out, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluation protocol reports");
  std::string eval_ckpt, eval_dataset;
  eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval->add_option("dataset", eval_dataset, "dataset file")->required();

  auto* replay = app.add_subcommand("replay-check", "verify stored book states");
  std::string replay_dataset;
  replay->add_option("dataset", replay_dataset, "dataset file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_file.empty()) cfg = cli::load_config(config_file, cfg);
    // precedence: flag > file > default
    if (seed_set) cfg.seed = seed_flag;
    if (workers_set) cfg.workers = workers_flag;
    if (out_set) {
      cfg.dataset_dir = out_flag;
      cfg.checkpoint_dir = out_flag;
      cfg.report_dir = out_flag;
    }
    cli::apply_env_overrides(cfg);

    if (ingest->parsed() || preprocess->parsed())
      return cli::cmd_ingest(cfg, ingest_opt);
    if (encode->parsed()) return cli::cmd_encode(encode_in, encode_out);
    if (train->parsed()) {
      std::vector<std::filesystem::path> paths(train_sets.begin(), train_sets.end());
      return cli::cmd_train(cfg, paths);
    }
    if (generate->parsed()) return cli::cmd_generate(cfg, gen_ckpt, gen_dataset, gen_out);
    if (eval->parsed()) return cli::cmd_eval(cfg, eval_ckpt, eval_dataset);
    if (replay->parsed()) return cli::cmd_replay_check(replay_dataset);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// hydec command-line front end: corpus generation, benchmark runs, and
// report emission. See README.md for the config file format.

#include <exception>
#include <iostream>
#include <string>

#include "hydec/harness.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hybrid draft-verify decoding benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string corpus_path;
  std::string out_path;
  std::string results_path;
  std::size_t threads = 0;

  CLI::App* generate = app.add_subcommand(
      "generate", "Generate a synthetic utterance corpus (JSONL)");
  generate->add_option("--config", config_path, "Experiment config (JSON)")
      ->required();
  generate->add_option("--out", out_path, "Corpus output path")->required();

  CLI::App* run = app.add_subcommand(
      "run", "Run baseline, draft, and hybrid decodes over a corpus");
  run->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required();
  run->add_option("--out", out_path, "Results output directory")->required();
  run->add_option("--threads", threads,
                  "Worker threads (0 = hardware concurrency)");

  CLI::App* report = app.add_subcommand(
      "report", "Render report tables from a results directory");
  report->add_option("--results", results_path, "Results directory")
      ->required();
  report->add_option("--out", out_path, "Report output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const hydec::ExperimentConfig config = hydec::load_config(config_path);
      hydec::generate_corpus(config, out_path);
      std::cout << "wrote corpus: " << out_path << "\n";
    } else if (run->parsed()) {
      const hydec::ExperimentConfig config = hydec::load_config(config_path);
      hydec::RunOptions options;
      options.threads = threads;
      const auto records =
          hydec::run_experiment(corpus_path, config, out_path, options);
      std::cout << "processed " << records.size() << " utterances -> "
                << out_path << "\n";
    } else if (report->parsed()) {
      hydec::write_report(results_path, out_path);
      std::cout << "wrote report: " << out_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

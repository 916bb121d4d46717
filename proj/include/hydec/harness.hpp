#pragma once

/**
 * Experiment orchestration: synthetic corpus generation, the
 * draft-then-verify benchmark runner, and report emission.
 *
 * Reproducibility contract: every artifact is byte-identical across runs
 * and thread counts given the same master seed. Per-utterance seeds are
 * stable hashes of (master_seed, utterance_id, attempt), so parallel
 * scheduling cannot perturb any draw, and workers write into slots that
 * are serialized strictly in utterance order.
 */

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hydec/core.hpp"
#include "hydec/hybrid.hpp"
#include "hydec/models.hpp"

#include "json.hpp"

namespace hydec {

// ============================================================================
// Configuration
// ============================================================================

/// Inclusive rate range; per-utterance rates are drawn uniformly from it.
/// A scalar in the config file is shorthand for [x, x].
struct RateRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct CorpusConfig {
  std::size_t n_utterances = 100;
  TokenId vocab_size = 32;
  int ngram_order = 3;
  double eos_bias = 0.01;
  /// Accepted greedy length band: utterance models are redrawn until the
  /// greedy decode terminates with a length in [min_len, max_len]
  /// (max_len 0 means the length cap).
  std::size_t min_len = 1;
  std::size_t max_len = 0;
};

struct CorruptionRanges {
  RateRange sub;
  RateRange ins;
  RateRange del;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::size_t l_cap = 1024;
  CorpusConfig corpus;
  CorruptionRanges corruption;
  std::vector<std::size_t> k_values = {1, 3, 5, 7, 9};
  StepCostModel cost;
  double histogram_bin_width_percent = 5.0;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// ============================================================================
// Per-utterance results
// ============================================================================

struct KOutcome {
  std::size_t k = 0;
  HybridTrace trace;
  TokenSeq output;
  double ratio = 0.0;
  double wer_hybrid = 0.0;
};

struct UtteranceRecord {
  std::uint64_t utterance_id = 0;
  std::uint64_t seed = 0;
  std::size_t greedy_len = 0;
  bool greedy_terminated = false;
  std::uint64_t baseline_steps = 0;
  std::size_t draft_len = 0;
  std::uint64_t draft_steps = 0;
  double wer_draft = 0.0;
  std::vector<KOutcome> outcomes;  // one per configured K
};

// ============================================================================
// Pipeline stages
// ============================================================================

/// Writes one JSONL line per utterance: the seeded model spec that greedy
/// decodes to a length inside the configured band. Deterministic
/// byte-for-byte given the master seed.
void generate_corpus(const ExperimentConfig& config,
                     const std::filesystem::path& corpus_path);

struct RunOptions {
  /// Worker threads; 0 picks the hardware concurrency. Output bytes do not
  /// depend on this.
  std::size_t threads = 0;
};

/// Runs baseline, draft, and one hybrid decode per K for every corpus
/// utterance. Writes results.csv, traces.jsonl, summary.csv, and a
/// config.json snapshot into out_dir. Returns the records in utterance
/// order for in-process callers.
std::vector<UtteranceRecord> run_experiment(
    const std::filesystem::path& corpus_path, const ExperimentConfig& config,
    const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Reads a results directory produced by run_experiment and writes the
/// report bundle into out_dir: summary_table.csv, ratio_histogram.csv,
/// length_binned_costs.csv, high_ratio_lengths.csv, and report.md. Empty
/// results produce header-only tables.
void write_report(const std::filesystem::path& results_dir,
                  const std::filesystem::path& out_dir);

// ============================================================================
// Results file schema (shared with the report reader and tests)
// ============================================================================

inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kResultsHeader =
    "utterance_id,k,greedy_len,greedy_terminated,baseline_steps,draft_len,"
    "draft_steps,verify_passes,ar_steps,iterations,transformer_steps,"
    "step_ratio,exit_path,wer_draft,wer_hybrid";

inline constexpr const char* kSummaryHeader =
    "k,n_utterances,mean_wer_draft,mean_wer_hybrid,mean_step_ratio,"
    "median_step_ratio,mean_transformer_steps,n_eos_confirmed,"
    "n_appended_eos,n_appended_truncated";

}  // namespace hydec

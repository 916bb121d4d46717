#pragma once

/**
 * Alignment and step-accounting metrics: token-level edit distance / WER,
 * hybrid-vs-baseline step ratios, and the histogram/binning summaries the
 * report layer serializes.
 *
 * Everything here is a pure function over value types.
 */

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydec/core.hpp"

namespace hydec {

// ============================================================================
// Edit distance / WER
// ============================================================================

/// Counts from a minimal unit-cost alignment of hypothesis to reference.
/// The total distance S+D+I is unique; the split is made reproducible by a
/// fixed backtrace preference of substitution over insertion over deletion.
struct EditStats {
  std::uint64_t substitutions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t ref_len = 0;
  double wer = 0.0;
  /// Set when the reference was empty but the hypothesis was not; wer is
  /// then reported under the insertions/1 convention.
  bool empty_reference = false;
};

EditStats edit_distance(std::span<const TokenId> reference,
                        std::span<const TokenId> hypothesis);

inline EditStats edit_distance(const TokenSeq& reference,
                               const TokenSeq& hypothesis) {
  return edit_distance(std::span<const TokenId>(reference.tokens()),
                       std::span<const TokenId>(hypothesis.tokens()));
}

/// Word-level WER over whitespace-split text. Words are interned to ids
/// and run through the same token-level alignment.
EditStats word_edit_distance(std::string_view reference,
                             std::string_view hypothesis);

// ============================================================================
// Step ratios
// ============================================================================

/// Hybrid transformer cost over baseline greedy cost:
/// (verify_passes * verify_pass_cost + ar_steps * ar_step_cost) /
/// (baseline_steps * ar_step_cost).
/// Throws std::domain_error when the denominator is zero.
double step_ratio(const HybridTrace& trace, const StepCostModel& cost = {});

/// Histogram of step ratios in half-open percent bins
/// [k*width, (k+1)*width).
struct RatioHistogram {
  double bin_width_percent = 5.0;
  std::map<std::size_t, std::uint64_t> bins;  // bin index -> count

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (const auto& [bin, count] : bins) sum += count;
    return sum;
  }
};

RatioHistogram bin_ratios(std::span<const double> ratios,
                          double bin_width_percent = 5.0);

// ============================================================================
// Length-binned costs
// ============================================================================

/// Per-utterance costs keyed by output token length, averaged in bins of
/// 10 tokens.
struct LengthCostRow {
  std::size_t output_len = 0;
  double baseline_cost = 0.0;
  double draft_cost = 0.0;
  double hybrid_cost = 0.0;
};

struct LengthBinnedCost {
  static constexpr std::size_t kBinSize = 10;

  struct Bin {
    std::uint64_t count = 0;
    double mean_baseline = 0.0;
    double mean_draft = 0.0;
    double mean_hybrid = 0.0;
  };

  std::map<std::size_t, Bin> bins;  // bin index -> stats
};

LengthBinnedCost bin_costs_by_length(std::span<const LengthCostRow> rows);

// ============================================================================
// CSV serialization
// ============================================================================

/// Fixed-precision decimal rendering used by every CSV artifact so outputs
/// are byte-stable.
std::string format_fixed(double value, int precision = 6);

/// Header: bin_lo_percent,bin_hi_percent,count
std::string to_csv(const RatioHistogram& histogram);

/// Header: length_bin_lo,length_bin_hi,n,mean_baseline_steps,
///         mean_draft_steps,mean_hybrid_steps
std::string to_csv(const LengthBinnedCost& binned);

}  // namespace hydec

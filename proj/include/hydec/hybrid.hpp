#pragma once

/**
 * Two-pass hybrid decoding.
 *
 * A cheap draft decoder proposes a whole reference sequence up front. The
 * expensive verifier then checks it in a single teacher-forced pass and
 * only spends autoregressive steps where the reference disagrees with its
 * own predictions:
 *
 *   loop:
 *     y_tf  = teacher-forced predictions over ref        (1 verify pass)
 *     i*    = first index where ref and y_tf differ
 *     if no difference and the verifier ends the sequence: done
 *     if no difference but the sequence is incomplete:    append up to
 *         `patch_budget` greedy tokens and return (also the guard rail
 *         that stops runaway token repetition)
 *     else: regenerate a short patch from the confirmed prefix, locate
 *         the reference segment it replaces, splice, and re-verify
 *
 * The replaced segment ends at the first occurrence of the patch's last
 * token within the next 2|patch| reference tokens, which realigns the
 * reference across insertion, deletion, and substitution errors. A patch
 * that ran into eos replaces everything to the end of the reference.
 *
 * For a deterministic verifier the confirmed prefix only grows, the loop
 * terminates, and an eos_confirmed decode is token-for-token identical to
 * the plain greedy decode at a fraction of the forward steps.
 */

#include <cstdint>
#include <span>

#include "hydec/core.hpp"
#include "hydec/models.hpp"

#include "json.hpp"

namespace hydec {

// ============================================================================
// Configuration and results
// ============================================================================

struct HybridConfig {
  /// Patch/append budget: the maximum tokens generated per correction or
  /// termination attempt. Must be >= 1.
  std::size_t patch_budget = 3;
  /// Decode length cap shared with the greedy baseline.
  std::size_t l_cap = 1024;
  /// Loop safety bound; 0 means the default l_cap + 2. Exceeding it is a
  /// NonTerminationError and signals a model that broke the determinism
  /// contract, never a property of a conforming decode.
  std::size_t iteration_cap = 0;

  std::size_t effective_iteration_cap() const {
    return iteration_cap != 0 ? iteration_cap : l_cap + 2;
  }

  void validate() const {
    if (patch_budget < 1) {
      throw std::invalid_argument("HybridConfig: patch_budget must be >= 1");
    }
    if (l_cap < 1) {
      throw std::invalid_argument("HybridConfig: l_cap must be >= 1");
    }
  }
};

struct PatchResult {
  /// Regenerated tokens, at most `patch_budget` of them; eos is recorded in
  /// the flag and never stored.
  TokenSeq patch;
  bool patch_eos = false;
  std::uint64_t ar_steps_used = 0;
};

/// Reference segment to replace: [i_star, end_index] inclusive, or the
/// whole tail from i_star when `tail` is set.
struct PatchRange {
  bool tail = false;
  std::size_t end_index = 0;
};

struct HybridOutcome {
  TokenSeq output;
  HybridTrace trace;
};

// ============================================================================
// Algorithm pieces
// ============================================================================

/// Index of the first difference between the reference and the
/// teacher-forced predictions; |ref| when they fully agree. The prediction
/// row must have exactly |ref| entries (throws std::invalid_argument
/// otherwise). Mid-sequence eos predictions arrive encoded as the eos id,
/// which can never equal a reference token.
std::size_t first_divergence(const TokenSeq& ref,
                             std::span<const TokenId> predictions);

/// Autoregressively extends the confirmed prefix by at most `patch_budget`
/// tokens, stopping immediately on eos. Each verifier invocation, including
/// the one that produced eos, counts one ar step, so
/// ar_steps_used == |patch| + (patch_eos ? 1 : 0) <= patch_budget.
PatchResult generate_patch(const VerifierModel& model,
                           const TokenSeq& confirmed_prefix,
                           std::size_t patch_budget);

/// Locates the reference segment the patch replaces.
///
/// A patch that hit eos replaces the whole tail: the verifier has declared
/// the sequence complete at the patch. Otherwise the segment ends at the
/// first j in [i_star, min(|ref|, i_star + 2|patch|)) with
/// ref[j] == patch.back(); if the last patch token does not occur in that
/// window, a same-length segment (clipped to the reference end) is
/// replaced. Requires i_star < |ref| and a non-empty patch or patch_eos.
PatchRange find_patch_range(const TokenSeq& ref, std::size_t i_star,
                            const PatchResult& patch);

/// Splices the patch over the located segment:
/// ref[0..i_star) + patch + ref[end+1..), with the suffix dropped entirely
/// for a tail range. Throws DecodeOverflowError when the result would
/// exceed l_cap.
TokenSeq apply_patch(const TokenSeq& ref, std::size_t i_star,
                     const PatchRange& range, const TokenSeq& patch,
                     std::size_t l_cap);

/// Termination attempt after the full reference verified but the verifier
/// did not end the sequence: appends up to `budget` greedy tokens, stopping
/// early on eos. The caller returns immediately afterward without
/// re-verification, which is what bounds runaway repetition. Throws
/// DecodeOverflowError when the extension would exceed l_cap.
struct AppendResult {
  TokenSeq extended;
  bool got_eos = false;
  std::uint64_t ar_steps = 0;
};

AppendResult append_continuation(const VerifierModel& model,
                                 const TokenSeq& ref, std::size_t budget,
                                 std::size_t l_cap);

// ============================================================================
// The decoder
// ============================================================================

/// Runs the full verify-and-patch loop on a draft reference sequence.
///
/// Exit paths and their guarantees against greedy_decode(model, l_cap):
/// - eos_confirmed:      output equals the greedy output exactly.
/// - appended_eos:       output is a prefix of the greedy continuation.
/// - appended_truncated: output is a prefix of the greedy continuation.
///
/// The trace records one verify pass and one divergence index per
/// iteration, one patch length per non-final iteration, and every
/// autoregressive step. draft_steps and baseline_steps are left for the
/// caller, which knows the draft's cost and the greedy baseline.
HybridOutcome hybrid_decode(const VerifierModel& model, const TokenSeq& draft,
                            const HybridConfig& config);

// ============================================================================
// Serialization
// ============================================================================

/// One JSON object per decode: all trace fields plus the output tokens.
nlohmann::ordered_json trace_to_json(const HybridTrace& trace,
                                     const TokenSeq& output);

}  // namespace hydec

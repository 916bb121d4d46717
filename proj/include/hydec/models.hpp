#pragma once

/**
 * Decoder models: the abstract deterministic verifier interface plus the
 * toy implementations used for simulation and testing, and the draft
 * generators that stand in for a fast first-pass decoder.
 *
 * A verifier is a pure function next(context) -> token-or-eos. Identical
 * context must give an identical answer across calls and across processes
 * given the same model spec; every decoding guarantee in hybrid.hpp rests
 * on that contract. Models are immutable after construction and safe for
 * concurrent read-only use.
 */

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "hydec/core.hpp"
#include "hydec/rng.hpp"

#include "json.hpp"

namespace hydec {

// ============================================================================
// Verifier interface
// ============================================================================

class VerifierModel {
 public:
  virtual ~VerifierModel() = default;

  virtual const Vocab& vocab() const = 0;

  /// Deterministic next-token prediction: a content id or vocab().eos_id().
  /// Where an implementation is table-driven with scores, argmax ties break
  /// toward the lowest token id.
  virtual TokenId next(const TokenSeq& context) const = 0;

  /// Self-describing spec, sufficient to reconstruct an identical model.
  virtual nlohmann::ordered_json spec_json() const = 0;
};

/// Single-step prediction on an explicit context.
inline TokenId next_token(const VerifierModel& model, const TokenSeq& context) {
  return model.next(context);
}

// ============================================================================
// Whole-sequence operations
// ============================================================================

/// Teacher-forced verification of a reference sequence.
///
/// predictions[i] = next(ref[0..i]) for every i, so |predictions| == |ref|.
/// A mid-sequence eos prediction is stored verbatim as the eos id: the
/// reference never contains eos, so the entry acts as a guaranteed-mismatch
/// marker at that position. eos_flag is the prediction after consuming the
/// whole reference.
///
/// Counts as exactly one verify pass in trace accounting regardless of
/// reference length.
struct TeacherForcedResult {
  std::vector<TokenId> predictions;
  bool eos_flag = false;
};

TeacherForcedResult teacher_forced_predict(const VerifierModel& model,
                                           const TokenSeq& ref);

/// Plain autoregressive greedy decode, capped at l_cap content tokens.
/// This is the baseline the hybrid decoder is measured against and the
/// oracle for its equivalence tests. steps = |output| plus one for the
/// step that produced eos when the decode terminated. A decode that
/// reaches l_cap without eos is flagged non-terminating; the eos probe
/// after a full-cap output is not performed.
struct GreedyResult {
  TokenSeq output;
  bool terminated = false;
  std::uint64_t steps = 0;
};

GreedyResult greedy_decode(const VerifierModel& model, std::size_t l_cap);

// ============================================================================
// Toy verifiers
// ============================================================================

/// Deterministic n-gram verifier. Conceptually a total table mapping every
/// length-n context window (left-padded with a bos sentinel) to a next
/// token or eos; realized as a stable per-window hash of the seed so the
/// table never has to be materialized. eos_bias is the fraction of windows
/// that map to eos, which tunes expected greedy lengths.
class NGramModel final : public VerifierModel {
 public:
  NGramModel(Vocab vocab, int order, double eos_bias, std::uint64_t seed);

  const Vocab& vocab() const override { return vocab_; }
  TokenId next(const TokenSeq& context) const override;
  nlohmann::ordered_json spec_json() const override;

  int order() const { return order_; }
  double eos_bias() const { return eos_bias_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Vocab vocab_;
  int order_;
  double eos_bias_;
  std::uint64_t seed_;
};

/// Validates parameters (order in {1,2,3}, eos_bias in [0,1]) and builds
/// the model.
NGramModel build_ngram_model(const Vocab& vocab, int order, double eos_bias,
                             std::uint64_t seed);

/// Scripted verifier for exact scenario construction.
///
/// On any prefix of the trunk it follows the trunk (eos at the end). Off
/// the trunk, a repair rule keyed by (confirmed-prefix length, observed
/// off-trunk suffix) may script a continuation; otherwise the model resyncs
/// by position: it predicts trunk[|context|], or eos once the context is at
/// least trunk length. Position-resync is what a strong verifier does with
/// a substituted reference and yields Table-style verification rows.
class ScriptedModel final : public VerifierModel {
 public:
  struct RepairRule {
    std::size_t prefix_len = 0;          // confirmed trunk prefix length
    std::vector<TokenId> suffix;         // observed off-trunk tokens (non-empty)
    std::vector<TokenId> continuation;   // scripted next tokens, in order
    bool then_eos = false;               // emit eos after the continuation
  };

  ScriptedModel(Vocab vocab, TokenSeq trunk, std::vector<RepairRule> rules = {});

  const Vocab& vocab() const override { return vocab_; }
  TokenId next(const TokenSeq& context) const override;
  nlohmann::ordered_json spec_json() const override;

  const TokenSeq& trunk() const { return trunk_; }

 private:
  Vocab vocab_;
  TokenSeq trunk_;
  // Keyed by (prefix_len, suffix); longest matching suffix wins.
  std::map<std::pair<std::size_t, std::vector<TokenId>>,
           std::pair<std::vector<TokenId>, bool>>
      rules_;
};

/// Emits one fixed content token for every context and never eos. Induces
/// the repetition pathology the append budget exists to limit.
class RepeaterModel final : public VerifierModel {
 public:
  RepeaterModel(Vocab vocab, TokenId repeated_token);

  const Vocab& vocab() const override { return vocab_; }
  TokenId next(const TokenSeq&) const override { return repeated_token_; }
  nlohmann::ordered_json spec_json() const override;

  TokenId repeated_token() const { return repeated_token_; }

 private:
  Vocab vocab_;
  TokenId repeated_token_;
};

/// Reconstructs a model from its spec_json(). Throws std::invalid_argument
/// on unknown type or malformed fields.
std::unique_ptr<VerifierModel> model_from_spec_json(
    const nlohmann::ordered_json& spec);

// ============================================================================
// Draft generation
// ============================================================================

/// Seeded error injection rates for synthetic drafts. All-zero rates are
/// the identity corruption.
struct CorruptionSpec {
  double sub_rate = 0.0;
  double ins_rate = 0.0;
  double del_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Applies seeded substitution / insertion / deletion noise in a single
/// left-to-right pass. Per input position, the event draws happen in a
/// fixed order (deletion, substitution, insertion-after); substituted
/// tokens are drawn uniformly among the other content tokens and inserted
/// tokens uniformly among all content tokens. The result never contains
/// eos.
TokenSeq corrupt_draft(const TokenSeq& greedy_output, const CorruptionSpec& spec,
                       const Vocab& vocab);

/// First-pass draft producer. Stands in for a fast decoder: it reports its
/// own step cost next to the proposed reference sequence.
struct DraftResult {
  TokenSeq draft;
  std::uint64_t draft_steps = 0;
};

class DraftGenerator {
 public:
  virtual ~DraftGenerator() = default;
  virtual DraftResult draft() const = 0;
};

/// Drafts by greedy-decoding the verifier and corrupting the result, which
/// simulates a cheap decoder with a controllable error rate. Step cost is
/// one per emitted draft token.
class CorruptingDraftGenerator final : public DraftGenerator {
 public:
  CorruptingDraftGenerator(const VerifierModel& model, CorruptionSpec spec,
                           std::size_t greedy_cap);

  DraftResult draft() const override;

 private:
  const VerifierModel& model_;
  CorruptionSpec spec_;
  std::size_t greedy_cap_;
};

}  // namespace hydec

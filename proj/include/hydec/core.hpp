#pragma once

/**
 * Core value types shared by every decoding component: vocabulary,
 * token sequences, per-decode trace accounting, and the abstract step
 * cost model. No algorithmic logic lives here.
 *
 * Conventions:
 * - Token ids are small non-negative integers in [0, vocab.size()).
 * - The end-of-sentence id is reserved as vocab.size() itself; it is a
 *   termination signal and is never stored inside a content sequence.
 * - All types are immutable-after-construction values, safe to copy and
 *   share across decode workers.
 */

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hydec {

using TokenId = std::int32_t;

// ============================================================================
// Errors
// ============================================================================

/// A decode result would exceed the configured length cap.
class DecodeOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The hybrid loop exceeded its iteration cap. Only a model that violates
/// the determinism contract can trigger this.
class NonTerminationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ============================================================================
// Vocab
// ============================================================================

/// A vocabulary of `size` ordinary content tokens with ids [0, size).
/// The reserved eos id is `size`, distinct from every content id.
class Vocab {
 public:
  explicit Vocab(TokenId size) : size_(size) {
    if (size < 2) {
      throw std::invalid_argument("Vocab: size must be >= 2, got " +
                                  std::to_string(size));
    }
  }

  TokenId size() const { return size_; }
  TokenId eos_id() const { return size_; }

  bool is_content(TokenId id) const { return id >= 0 && id < size_; }

  bool operator==(const Vocab&) const = default;

 private:
  TokenId size_;
};

// ============================================================================
// TokenSeq
// ============================================================================

/// An ordered sequence of content token ids. The validating constructor
/// rejects any element that is out of vocabulary range or equals eos.
class TokenSeq {
 public:
  TokenSeq() = default;

  TokenSeq(std::vector<TokenId> tokens, const Vocab& vocab)
      : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!vocab.is_content(tokens_[i])) {
        throw std::invalid_argument(
            "TokenSeq: token " + std::to_string(tokens_[i]) + " at position " +
            std::to_string(i) + " is not a content token of this vocab");
      }
    }
  }

  /// Wraps tokens the caller already knows are valid (model outputs,
  /// splices of validated sequences).
  static TokenSeq unchecked(std::vector<TokenId> tokens) {
    TokenSeq seq;
    seq.tokens_ = std::move(tokens);
    return seq;
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  TokenId operator[](std::size_t i) const { return tokens_[i]; }
  TokenId back() const { return tokens_.back(); }

  const std::vector<TokenId>& tokens() const { return tokens_; }

  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  /// First `n` tokens (n <= size()).
  TokenSeq prefix(std::size_t n) const {
    return unchecked({tokens_.begin(), tokens_.begin() + n});
  }

  /// Appends a content token. The caller guarantees validity.
  void push_back(TokenId id) { tokens_.push_back(id); }

  bool operator==(const TokenSeq&) const = default;

 private:
  std::vector<TokenId> tokens_;
};

/// True if `prefix` equals the first prefix.size() tokens of `seq`.
inline bool is_prefix_of(const TokenSeq& prefix, const TokenSeq& seq) {
  if (prefix.size() > seq.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] != seq[i]) return false;
  }
  return true;
}

// ============================================================================
// Trace accounting
// ============================================================================

/// How a hybrid decode ended.
enum class ExitPath {
  /// Teacher-forced verification matched the full reference and the
  /// verifier produced eos: output provably equals the greedy decode.
  eos_confirmed,
  /// The reference matched but was incomplete; appending produced eos.
  appended_eos,
  /// The reference matched but was incomplete; the append budget ran out
  /// before eos (the repetition-limiting path).
  appended_truncated,
};

inline const char* to_string(ExitPath path) {
  switch (path) {
    case ExitPath::eos_confirmed:
      return "eos_confirmed";
    case ExitPath::appended_eos:
      return "appended_eos";
    case ExitPath::appended_truncated:
      return "appended_truncated";
  }
  return "unknown";
}

inline ExitPath exit_path_from_string(const std::string& s) {
  if (s == "eos_confirmed") return ExitPath::eos_confirmed;
  if (s == "appended_eos") return ExitPath::appended_eos;
  if (s == "appended_truncated") return ExitPath::appended_truncated;
  throw std::invalid_argument("unknown exit path: " + s);
}

/// Per-decode accounting. One verify pass is charged per teacher-forced
/// verification regardless of sequence length; every single-token verifier
/// invocation (patch token, append token, or eos attempt) is one ar step.
struct HybridTrace {
  std::uint64_t verify_passes = 0;
  std::uint64_t ar_steps = 0;
  std::uint64_t draft_steps = 0;
  std::uint64_t iterations = 0;
  /// First-divergence index observed by each verification pass, in order.
  std::vector<std::size_t> divergence_indices;
  /// Patch length per patching iteration (all iterations except the final,
  /// exiting one). A zero entry is an empty patch that truncated the
  /// reference at the divergence point.
  std::vector<std::size_t> patch_lengths;
  ExitPath exit_path = ExitPath::eos_confirmed;
  /// Steps a pure autoregressive greedy decode of the same verifier takes:
  /// |greedy output| + 1 when it terminates with eos, else the length cap.
  /// Filled by the caller that ran the greedy baseline; 0 means unknown.
  std::uint64_t baseline_steps = 0;
};

// ============================================================================
// StepCostModel
// ============================================================================

/// Abstract cost units per decoder invocation. Defaults count transformer
/// forward steps: one unit per teacher-forced pass, one per autoregressive
/// step, and free draft steps.
struct StepCostModel {
  double verify_pass_cost = 1.0;
  double ar_step_cost = 1.0;
  double draft_step_cost = 0.0;

  void validate() const {
    if (verify_pass_cost < 0 || ar_step_cost < 0 || draft_step_cost < 0) {
      throw std::invalid_argument("StepCostModel: costs must be >= 0");
    }
  }
};

/// Expensive-decoder cost of a decode: verify passes plus ar steps.
inline double transformer_cost(const HybridTrace& trace,
                               const StepCostModel& cost = {}) {
  return static_cast<double>(trace.verify_passes) * cost.verify_pass_cost +
         static_cast<double>(trace.ar_steps) * cost.ar_step_cost;
}

/// Total cost including the draft decoder's own steps.
inline double total_cost(const HybridTrace& trace,
                         const StepCostModel& cost = {}) {
  return transformer_cost(trace, cost) +
         static_cast<double>(trace.draft_steps) * cost.draft_step_cost;
}

}  // namespace hydec

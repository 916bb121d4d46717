#include "doctest.h"

#include <vector>

#include "hydec/hybrid.hpp"
#include "hydec/metrics.hpp"
#include "hydec/rng.hpp"
#include "test_support.hpp"

using namespace hydec;

namespace {

const Vocab kVocab16(16);

ScriptedModel trunk_model(std::vector<TokenId> trunk) {
  return ScriptedModel(kVocab16, TokenSeq(std::move(trunk), kVocab16));
}

TokenSeq seq(std::vector<TokenId> tokens) {
  return TokenSeq::unchecked(std::move(tokens));
}

// Violates the determinism contract on purpose: answers flip between two
// tokens on successive calls regardless of context.
class FlipFlopModel final : public VerifierModel {
 public:
  const Vocab& vocab() const override { return vocab_; }
  TokenId next(const TokenSeq&) const override { return (calls_++ % 2) ? 2 : 1; }
  nlohmann::ordered_json spec_json() const override {
    return {{"type", "flipflop"}};
  }

 private:
  Vocab vocab_{8};
  mutable std::uint64_t calls_ = 0;
};

}  // namespace

// ============================================================================
// first_divergence
// ============================================================================

TEST_CASE("first_divergence: full match returns the reference length") {
  const std::vector<TokenId> y_tf = {3, 4, 5};
  CHECK(first_divergence(seq({3, 4, 5}), y_tf) == 3);
}

TEST_CASE("first_divergence: first mismatch position") {
  const std::vector<TokenId> y_tf = {3, 9, 5};
  CHECK(first_divergence(seq({3, 4, 5}), y_tf) == 1);
}

TEST_CASE("first_divergence: empty reference") {
  CHECK(first_divergence(seq({}), std::vector<TokenId>{}) == 0);
}

TEST_CASE("first_divergence: length mismatch is a contract violation") {
  const std::vector<TokenId> y_tf = {3, 4};
  CHECK_THROWS_AS(first_divergence(seq({3, 4, 5}), y_tf),
                  std::invalid_argument);
}

TEST_CASE("property: first_divergence agrees with a naive scan") {
  Rng rng(606060);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t len = rng.next_below(20);
    std::vector<TokenId> ref(len);
    std::vector<TokenId> row(len);
    for (std::size_t i = 0; i < len; ++i) {
      ref[i] = static_cast<TokenId>(rng.next_below(4));
      row[i] = static_cast<TokenId>(rng.next_below(4));
    }
    std::size_t naive = len;
    for (std::size_t i = 0; i < len; ++i) {
      if (ref[i] != row[i]) {
        naive = i;
        break;
      }
    }
    CHECK(first_divergence(TokenSeq::unchecked(ref), row) == naive);
  }
}

// ============================================================================
// generate_patch
// ============================================================================

TEST_CASE("generate_patch: stops at eos and counts the eos attempt") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  const PatchResult result = generate_patch(model, seq({4}), 3);
  CHECK(result.patch == seq({5, 6}));
  CHECK(result.patch_eos);
  CHECK(result.ar_steps_used == 3);
}

TEST_CASE("generate_patch: budget-limited on a constant model") {
  const RepeaterModel model(kVocab16, 7);
  const PatchResult result = generate_patch(model, seq({}), 2);
  CHECK(result.patch == seq({7, 7}));
  CHECK(!result.patch_eos);
  CHECK(result.ar_steps_used == 2);
}

TEST_CASE("generate_patch: immediate eos gives an empty patch") {
  const ScriptedModel model = trunk_model({4});
  const PatchResult result = generate_patch(model, seq({4}), 5);
  CHECK(result.patch.empty());
  CHECK(result.patch_eos);
  CHECK(result.ar_steps_used == 1);
}

TEST_CASE("property: patch length and step accounting stay within budget") {
  Rng rng(515151);
  for (int trial = 0; trial < 200; ++trial) {
    const Vocab vocab(16);
    const NGramModel model =
        build_ngram_model(vocab, 1, rng.next_unit() * 0.5, rng.next_u64());
    const std::size_t budget = 1 + rng.next_below(9);
    std::vector<TokenId> prefix(rng.next_below(10));
    for (TokenId& t : prefix) t = static_cast<TokenId>(rng.next_below(16));
    const PatchResult result =
        generate_patch(model, TokenSeq::unchecked(prefix), budget);
    CHECK(result.patch.size() <= budget);
    CHECK(result.ar_steps_used ==
          result.patch.size() + (result.patch_eos ? 1 : 0));
    CHECK(result.ar_steps_used <= budget);
  }
}

// ============================================================================
// find_patch_range
// ============================================================================

TEST_CASE("find_patch_range: last patch token located inside the window") {
  // Substitution-style realignment in id space: the reference tail
  // [6,7,8,9,10] is patched with [11,7,8,9]; the last patch token 9 is
  // found at offset 3, so the replaced segment is [6,7,8,9].
  const TokenSeq ref = seq({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  PatchResult patch;
  patch.patch = seq({11, 7, 8, 9});
  const PatchRange range = find_patch_range(ref, 5, patch);
  CHECK(!range.tail);
  CHECK(range.end_index == 8);

  const TokenSeq result = apply_patch(ref, 5, range, patch.patch, 1024);
  CHECK(result == seq({1, 2, 3, 4, 5, 11, 7, 8, 9, 10}));
}

TEST_CASE("find_patch_range: absent last token falls back to same length") {
  const TokenSeq ref = seq({1, 2, 3, 4, 5, 6});
  PatchResult patch;
  patch.patch = seq({11});
  const PatchRange range = find_patch_range(ref, 2, patch);
  CHECK(!range.tail);
  CHECK(range.end_index == 2);  // replaces exactly one token
}

TEST_CASE("find_patch_range: search window is exclusive at 2|patch|") {
  // Window for a 1-token patch at i*=1 is positions [1, 3); the match at
  // position 3 is out of reach.
  const TokenSeq ref = seq({1, 2, 4, 9, 9});
  PatchResult patch;
  patch.patch = seq({9});
  const PatchRange range = find_patch_range(ref, 1, patch);
  CHECK(!range.tail);
  CHECK(range.end_index == 1);
}

TEST_CASE("find_patch_range: eos patch replaces through the reference end") {
  const TokenSeq ref = seq({1, 2, 3, 4, 5, 6});
  PatchResult patch;
  patch.patch = seq({5});
  patch.patch_eos = true;
  const PatchRange range = find_patch_range(ref, 2, patch);
  CHECK(range.tail);
  const TokenSeq result = apply_patch(ref, 2, range, patch.patch, 1024);
  CHECK(result == seq({1, 2, 5}));
}

TEST_CASE("find_patch_range: fallback segment clips at the reference end") {
  const TokenSeq ref = seq({1, 2, 3});
  PatchResult patch;
  patch.patch = seq({9, 9, 9, 9});
  const PatchRange range = find_patch_range(ref, 2, patch);
  CHECK(!range.tail);
  CHECK(range.end_index == 2);
}

TEST_CASE("find_patch_range: contract violations throw") {
  PatchResult empty;
  CHECK_THROWS_AS(find_patch_range(seq({1, 2}), 0, empty),
                  std::invalid_argument);
  PatchResult patch;
  patch.patch = seq({1});
  CHECK_THROWS_AS(find_patch_range(seq({1, 2}), 2, patch),
                  std::invalid_argument);
}

// ============================================================================
// apply_patch
// ============================================================================

TEST_CASE("apply_patch: splice by definition") {
  const TokenSeq result = apply_patch(
      seq({1, 2, 3, 4}), 1, {.tail = false, .end_index = 2}, seq({9}), 1024);
  CHECK(result == seq({1, 9, 4}));
}

TEST_CASE("apply_patch: tail range with an empty patch truncates fully") {
  const TokenSeq result =
      apply_patch(seq({1, 2}), 0, {.tail = true, .end_index = 1}, seq({}), 1024);
  CHECK(result.empty());
}

TEST_CASE("apply_patch: result beyond the cap is a decode overflow") {
  CHECK_THROWS_AS(apply_patch(seq({1, 2, 3}), 1,
                              {.tail = false, .end_index = 1},
                              seq({7, 7, 7, 7}), 5),
                  DecodeOverflowError);
}

TEST_CASE("property: spliced length identity for non-tail replacements") {
  Rng rng(717171);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t ref_len = 1 + rng.next_below(30);
    std::vector<TokenId> ref(ref_len);
    for (TokenId& t : ref) t = static_cast<TokenId>(rng.next_below(8));
    const std::size_t i_star = rng.next_below(ref_len);
    const std::size_t end = i_star + rng.next_below(ref_len - i_star);
    std::vector<TokenId> patch(rng.next_below(10));
    for (TokenId& t : patch) t = static_cast<TokenId>(rng.next_below(8));

    const TokenSeq result =
        apply_patch(TokenSeq::unchecked(ref), i_star,
                    {.tail = false, .end_index = end},
                    TokenSeq::unchecked(patch), 1 << 20);
    CHECK(result.size() == i_star + patch.size() + (ref_len - end - 1));
  }
}

// ============================================================================
// append_continuation
// ============================================================================

TEST_CASE("append_continuation: repeater consumes the whole budget") {
  const RepeaterModel model(kVocab16, 7);
  const AppendResult result =
      append_continuation(model, seq({7, 7}), 3, 1024);
  CHECK(result.extended == seq({7, 7, 7, 7, 7}));
  CHECK(!result.got_eos);
  CHECK(result.ar_steps == 3);
}

TEST_CASE("append_continuation: stops early on eos") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  const AppendResult result = append_continuation(model, seq({4, 5}), 3, 1024);
  CHECK(result.extended == seq({4, 5, 6}));
  CHECK(result.got_eos);
  CHECK(result.ar_steps == 2);
}

TEST_CASE("append_continuation: overflow past the cap throws") {
  const RepeaterModel model(kVocab16, 7);
  CHECK_THROWS_AS(append_continuation(model, seq({7, 7}), 3, 2),
                  DecodeOverflowError);
}

// ============================================================================
// hybrid_decode
// ============================================================================

TEST_CASE("hybrid_decode: perfect draft costs one verify pass") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  HybridConfig config;
  config.patch_budget = 3;
  const HybridOutcome outcome =
      hybrid_decode(model, seq({4, 5, 6}), config);
  CHECK(outcome.output == seq({4, 5, 6}));
  CHECK(outcome.trace.exit_path == ExitPath::eos_confirmed);
  CHECK(outcome.trace.verify_passes == 1);
  CHECK(outcome.trace.ar_steps == 0);
  CHECK(outcome.trace.iterations == 1);
  CHECK(outcome.trace.divergence_indices == std::vector<std::size_t>{3});
  CHECK(outcome.trace.patch_lengths.empty());
}

TEST_CASE("hybrid_decode: one substitution is patched then re-verified") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  HybridConfig config;
  config.patch_budget = 3;
  const HybridOutcome outcome = hybrid_decode(model, seq({4, 9, 6}), config);
  CHECK(outcome.output == seq({4, 5, 6}));
  CHECK(outcome.trace.exit_path == ExitPath::eos_confirmed);
  CHECK(outcome.trace.verify_passes == 2);
  CHECK(outcome.trace.ar_steps == 3);  // patch [5,6] plus its eos attempt
  CHECK(outcome.trace.divergence_indices ==
        std::vector<std::size_t>{1, 3});
  CHECK(outcome.trace.patch_lengths == std::vector<std::size_t>{2});
}

TEST_CASE("hybrid_decode: repetition is cut off by the append budget") {
  const RepeaterModel model(kVocab16, 7);
  HybridConfig config;
  config.patch_budget = 3;
  const HybridOutcome outcome = hybrid_decode(model, seq({7, 7}), config);
  CHECK(outcome.output == seq({7, 7, 7, 7, 7}));
  CHECK(outcome.trace.exit_path == ExitPath::appended_truncated);
  CHECK(outcome.trace.verify_passes == 1);
  CHECK(outcome.trace.ar_steps == 3);
}

TEST_CASE("hybrid_decode: empty draft is completed by appending") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  HybridConfig config;
  config.patch_budget = 5;
  const HybridOutcome outcome = hybrid_decode(model, TokenSeq(), config);
  CHECK(outcome.output == seq({4, 5, 6}));
  CHECK(outcome.trace.exit_path == ExitPath::appended_eos);
  CHECK(outcome.trace.verify_passes == 1);
  CHECK(outcome.trace.ar_steps == 4);
}

TEST_CASE("hybrid_decode: draft running past the trunk end is truncated") {
  // The verifier predicts eos inside the row (guaranteed mismatch), the
  // patch is empty-with-eos, and the reference is truncated and re-verified.
  const ScriptedModel model = trunk_model({4, 5, 6});
  HybridConfig config;
  config.patch_budget = 3;
  const HybridOutcome outcome =
      hybrid_decode(model, seq({4, 5, 6, 9, 9}), config);
  CHECK(outcome.output == seq({4, 5, 6}));
  CHECK(outcome.trace.exit_path == ExitPath::eos_confirmed);
  CHECK(outcome.trace.verify_passes == 2);
  CHECK(outcome.trace.ar_steps == 1);
  CHECK(outcome.trace.divergence_indices == std::vector<std::size_t>{3, 3});
  CHECK(outcome.trace.patch_lengths == std::vector<std::size_t>{0});
}

TEST_CASE("hybrid_decode: invalid drafts and configs are rejected") {
  const ScriptedModel model = trunk_model({4, 5, 6});
  HybridConfig config;
  CHECK_THROWS_AS(hybrid_decode(model, seq({4, 99}), config),
                  std::invalid_argument);
  HybridConfig zero_k;
  zero_k.patch_budget = 0;
  CHECK_THROWS_AS(hybrid_decode(model, seq({4}), zero_k),
                  std::invalid_argument);
}

TEST_CASE("hybrid_decode: a nondeterministic model trips the iteration cap") {
  const FlipFlopModel model;
  HybridConfig config;
  config.patch_budget = 1;
  config.l_cap = 8;
  CHECK_THROWS_AS(hybrid_decode(model, seq({5}), config), NonTerminationError);
}

// ============================================================================
// Scripted correction scenarios
// ============================================================================

TEST_CASE("scenario: end-of-utterance corrections cost 2 passes + |patch|+1") {
  for (const auto& scenario : hydec::testing::table_scenarios()) {
    CAPTURE(scenario.name);
    HybridConfig config;
    config.patch_budget = scenario.k;
    const HybridOutcome outcome =
        hybrid_decode(scenario.model, scenario.draft, config);
    CHECK(outcome.output == scenario.model.trunk());
    CHECK(outcome.trace.exit_path == ExitPath::eos_confirmed);
    CHECK(outcome.trace.verify_passes == 2);
    CHECK(outcome.trace.ar_steps == scenario.expected_patch_len + 1);
    CHECK(outcome.trace.patch_lengths ==
          std::vector<std::size_t>{scenario.expected_patch_len});

    HybridTrace trace = outcome.trace;
    trace.baseline_steps = scenario.expected_baseline;
    if (scenario.name == "substitution") {
      CHECK(transformer_cost(trace) == 8.0);
      CHECK(step_ratio(trace) == doctest::Approx(0.40));
    }
  }
}

TEST_CASE("scenario: mid-sequence substitution realigns via the token search") {
  // The error sits far from the end, so the patch stays eos-free and the
  // replaced segment comes from the 2|patch| window search.
  const Vocab vocab(32);
  std::vector<TokenId> trunk(19);
  for (std::size_t i = 0; i < trunk.size(); ++i) {
    trunk[i] = static_cast<TokenId>(i + 1);
  }
  const ScriptedModel model(vocab, TokenSeq(trunk, vocab));
  std::vector<TokenId> draft = trunk;
  draft[5] = 30;

  HybridConfig config;
  config.patch_budget = 4;
  const HybridOutcome outcome =
      hybrid_decode(model, TokenSeq(draft, vocab), config);
  CHECK(outcome.output == model.trunk());
  CHECK(outcome.trace.exit_path == ExitPath::eos_confirmed);
  CHECK(outcome.trace.verify_passes == 2);
  CHECK(outcome.trace.ar_steps == 4);  // full-budget patch, no eos attempt
  CHECK(outcome.trace.divergence_indices == std::vector<std::size_t>{5, 19});
}

TEST_CASE("scenario: tail deletion larger than the budget stays uncorrected") {
  // Deleting K+2 trailing tokens leaves the verified reference short; the
  // append step recovers only K tokens and the decode reports truncation
  // instead of silently fixing it.
  const Vocab vocab(32);
  std::vector<TokenId> trunk(12);
  for (std::size_t i = 0; i < trunk.size(); ++i) {
    trunk[i] = static_cast<TokenId>(i + 1);
  }
  const ScriptedModel model(vocab, TokenSeq(trunk, vocab));

  for (std::size_t k : {1UL, 2UL, 3UL, 5UL}) {
    CAPTURE(k);
    const std::size_t deleted = k + 2;
    const TokenSeq draft =
        TokenSeq(trunk, vocab).prefix(trunk.size() - deleted);
    HybridConfig config;
    config.patch_budget = k;
    const HybridOutcome outcome = hybrid_decode(model, draft, config);
    CHECK(outcome.trace.exit_path == ExitPath::appended_truncated);
    CHECK(outcome.trace.verify_passes == 1);
    CHECK(outcome.trace.ar_steps == k);
    CHECK(outcome.output.size() == trunk.size() - 2);
    CHECK(is_prefix_of(outcome.output, model.trunk()));
  }
}

// ============================================================================
// Randomized equivalence and trace invariants
// ============================================================================

TEST_CASE("property: randomized drafts keep the greedy-equivalence contract") {
  int confirmed = 0;
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    const auto outcome =
        hydec::testing::run_equivalence_trial(stable_hash(0xABCDEF, trial));
    CAPTURE(trial);
    CAPTURE(outcome.trace_failure);
    CHECK(outcome.equivalence_ok);
    CHECK(outcome.prefix_ok);
    CHECK(outcome.trace_ok);
    if (outcome.exit_path == ExitPath::eos_confirmed) ++confirmed;
  }
  // The trial mix must actually exercise the equivalence branch.
  CHECK(confirmed > 50);
}

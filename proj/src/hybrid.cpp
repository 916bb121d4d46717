#include "hydec/hybrid.hpp"

#include <algorithm>
#include <string>

namespace hydec {

std::size_t first_divergence(const TokenSeq& ref,
                             std::span<const TokenId> predictions) {
  if (predictions.size() != ref.size()) {
    throw std::invalid_argument(
        "first_divergence: prediction row length " +
        std::to_string(predictions.size()) + " != reference length " +
        std::to_string(ref.size()));
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] != predictions[i]) return i;
  }
  return ref.size();
}

PatchResult generate_patch(const VerifierModel& model,
                           const TokenSeq& confirmed_prefix,
                           std::size_t patch_budget) {
  PatchResult result;
  const TokenId eos = model.vocab().eos_id();
  TokenSeq context = confirmed_prefix;
  for (std::size_t k = 0; k < patch_budget; ++k) {
    const TokenId t = model.next(context);
    ++result.ar_steps_used;
    if (t == eos) {
      result.patch_eos = true;
      break;
    }
    result.patch.push_back(t);
    context.push_back(t);
  }
  return result;
}

PatchRange find_patch_range(const TokenSeq& ref, std::size_t i_star,
                            const PatchResult& patch) {
  if (i_star >= ref.size()) {
    throw std::invalid_argument(
        "find_patch_range: i_star " + std::to_string(i_star) +
        " out of bounds for reference of length " + std::to_string(ref.size()));
  }
  if (patch.patch.empty() && !patch.patch_eos) {
    throw std::invalid_argument(
        "find_patch_range: patch must be non-empty or carry eos");
  }
  if (patch.patch_eos) {
    return {.tail = true, .end_index = ref.size() - 1};
  }
  const std::size_t window_end =
      std::min(ref.size(), i_star + 2 * patch.patch.size());
  const TokenId last = patch.patch.back();
  for (std::size_t j = i_star; j < window_end; ++j) {
    if (ref[j] == last) return {.tail = false, .end_index = j};
  }
  // Last patch token absent from the window: replace a same-length segment,
  // clipped to the reference end.
  return {.tail = false,
          .end_index = std::min(ref.size(), i_star + patch.patch.size()) - 1};
}

TokenSeq apply_patch(const TokenSeq& ref, std::size_t i_star,
                     const PatchRange& range, const TokenSeq& patch,
                     std::size_t l_cap) {
  const std::size_t resume = range.tail ? ref.size() : range.end_index + 1;
  if (i_star > resume || resume > ref.size()) {
    throw std::invalid_argument("apply_patch: range out of bounds");
  }
  const std::size_t result_len = i_star + patch.size() + (ref.size() - resume);
  if (result_len > l_cap) {
    throw DecodeOverflowError("apply_patch: spliced reference of length " +
                              std::to_string(result_len) +
                              " exceeds cap " + std::to_string(l_cap));
  }
  std::vector<TokenId> out;
  out.reserve(result_len);
  out.insert(out.end(), ref.begin(), ref.begin() + i_star);
  out.insert(out.end(), patch.begin(), patch.end());
  out.insert(out.end(), ref.begin() + resume, ref.end());
  return TokenSeq::unchecked(std::move(out));
}

AppendResult append_continuation(const VerifierModel& model,
                                 const TokenSeq& ref, std::size_t budget,
                                 std::size_t l_cap) {
  AppendResult result;
  result.extended = ref;
  const TokenId eos = model.vocab().eos_id();
  for (std::size_t k = 0; k < budget; ++k) {
    const TokenId t = model.next(result.extended);
    ++result.ar_steps;
    if (t == eos) {
      result.got_eos = true;
      break;
    }
    if (result.extended.size() + 1 > l_cap) {
      throw DecodeOverflowError(
          "append_continuation: extension exceeds cap " +
          std::to_string(l_cap));
    }
    result.extended.push_back(t);
  }
  return result;
}

HybridOutcome hybrid_decode(const VerifierModel& model, const TokenSeq& draft,
                            const HybridConfig& config) {
  config.validate();
  TokenSeq ref(draft.tokens(), model.vocab());

  HybridOutcome outcome;
  HybridTrace& trace = outcome.trace;
  const std::size_t iteration_cap = config.effective_iteration_cap();

  while (trace.iterations < iteration_cap) {
    ++trace.iterations;
    const TeacherForcedResult verified = teacher_forced_predict(model, ref);
    ++trace.verify_passes;
    const std::size_t i_star = first_divergence(ref, verified.predictions);
    trace.divergence_indices.push_back(i_star);

    if (i_star == ref.size()) {
      if (verified.eos_flag) {
        trace.exit_path = ExitPath::eos_confirmed;
        outcome.output = std::move(ref);
        return outcome;
      }
      AppendResult appended = append_continuation(
          model, ref, config.patch_budget, config.l_cap);
      trace.ar_steps += appended.ar_steps;
      trace.exit_path = appended.got_eos ? ExitPath::appended_eos
                                         : ExitPath::appended_truncated;
      outcome.output = std::move(appended.extended);
      return outcome;
    }

    const PatchResult patch =
        generate_patch(model, ref.prefix(i_star), config.patch_budget);
    trace.ar_steps += patch.ar_steps_used;
    trace.patch_lengths.push_back(patch.patch.size());
    const PatchRange range = find_patch_range(ref, i_star, patch);
    ref = apply_patch(ref, i_star, range, patch.patch, config.l_cap);
  }

  throw NonTerminationError(
      "hybrid_decode: iteration cap " + std::to_string(iteration_cap) +
      " exceeded; the verifier is violating the determinism contract");
}

nlohmann::ordered_json trace_to_json(const HybridTrace& trace,
                                     const TokenSeq& output) {
  return {{"verify_passes", trace.verify_passes},
          {"ar_steps", trace.ar_steps},
          {"draft_steps", trace.draft_steps},
          {"iterations", trace.iterations},
          {"divergence_indices", trace.divergence_indices},
          {"patch_lengths", trace.patch_lengths},
          {"exit_path", to_string(trace.exit_path)},
          {"baseline_steps", trace.baseline_steps},
          {"output", output.tokens()}};
}

}  // namespace hydec

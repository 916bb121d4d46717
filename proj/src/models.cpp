#include "hydec/models.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hydec {

namespace {

// Domain-separation tags for the n-gram window hash.
constexpr std::uint64_t kNgramTag = 0x4E4752414D5441ULL;
constexpr std::uint64_t kEosDrawTag = 0xE05DECA1ULL;
constexpr std::uint64_t kTokenDrawTag = 0x70CEDECA1ULL;

std::uint64_t reduce_to_range(std::uint64_t h, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(h) * n) >> 64);
}

}  // namespace

// ============================================================================
// Whole-sequence operations
// ============================================================================

TeacherForcedResult teacher_forced_predict(const VerifierModel& model,
                                           const TokenSeq& ref) {
  TeacherForcedResult result;
  result.predictions.reserve(ref.size());
  TokenSeq context;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    result.predictions.push_back(model.next(context));
    context.push_back(ref[i]);
  }
  result.eos_flag = model.next(context) == model.vocab().eos_id();
  return result;
}

GreedyResult greedy_decode(const VerifierModel& model, std::size_t l_cap) {
  GreedyResult result;
  const TokenId eos = model.vocab().eos_id();
  while (result.output.size() < l_cap) {
    const TokenId t = model.next(result.output);
    ++result.steps;
    if (t == eos) {
      result.terminated = true;
      break;
    }
    result.output.push_back(t);
  }
  return result;
}

// ============================================================================
// NGramModel
// ============================================================================

NGramModel::NGramModel(Vocab vocab, int order, double eos_bias,
                       std::uint64_t seed)
    : vocab_(vocab), order_(order), eos_bias_(eos_bias), seed_(seed) {}

NGramModel build_ngram_model(const Vocab& vocab, int order, double eos_bias,
                             std::uint64_t seed) {
  if (order < 1 || order > 3) {
    throw std::invalid_argument("build_ngram_model: order must be in {1,2,3}");
  }
  if (!(eos_bias >= 0.0 && eos_bias <= 1.0)) {
    throw std::invalid_argument(
        "build_ngram_model: eos_bias must be in [0,1]");
  }
  return NGramModel(vocab, order, eos_bias, seed);
}

TokenId NGramModel::next(const TokenSeq& context) const {
  // Window = last `order` tokens, left-padded with a bos sentinel.
  // Encoding shifts content ids by one so bos gets a slot of its own.
  std::uint64_t h = splitmix64(seed_ ^ kNgramTag);
  for (int k = order_; k >= 1; --k) {
    const std::uint64_t encoded =
        context.size() >= static_cast<std::size_t>(k)
            ? static_cast<std::uint64_t>(context[context.size() - k]) + 1
            : 0;
    h = splitmix64(h ^ (encoded + 0x9E3779B97F4A7C15ULL));
  }
  if (to_unit_real(splitmix64(h ^ kEosDrawTag)) < eos_bias_) {
    return vocab_.eos_id();
  }
  return static_cast<TokenId>(reduce_to_range(
      splitmix64(h ^ kTokenDrawTag), static_cast<std::uint64_t>(vocab_.size())));
}

nlohmann::ordered_json NGramModel::spec_json() const {
  return {{"type", "ngram"},
          {"vocab_size", vocab_.size()},
          {"order", order_},
          {"eos_bias", eos_bias_},
          {"seed", seed_}};
}

// ============================================================================
// ScriptedModel
// ============================================================================

ScriptedModel::ScriptedModel(Vocab vocab, TokenSeq trunk,
                             std::vector<RepairRule> rules)
    : vocab_(vocab), trunk_(TokenSeq(trunk.tokens(), vocab)) {
  for (auto& rule : rules) {
    if (rule.suffix.empty()) {
      throw std::invalid_argument("ScriptedModel: rule suffix must be non-empty");
    }
    if (rule.prefix_len > trunk_.size()) {
      throw std::invalid_argument(
          "ScriptedModel: rule prefix_len exceeds trunk length");
    }
    if (rule.prefix_len < trunk_.size() &&
        rule.suffix.front() == trunk_[rule.prefix_len]) {
      throw std::invalid_argument(
          "ScriptedModel: rule suffix is not off-trunk at its prefix");
    }
    for (TokenId t : rule.continuation) {
      if (!vocab_.is_content(t)) {
        throw std::invalid_argument(
            "ScriptedModel: rule continuation contains a non-content token");
      }
    }
    for (TokenId t : rule.suffix) {
      if (!vocab_.is_content(t)) {
        throw std::invalid_argument(
            "ScriptedModel: rule suffix contains a non-content token");
      }
    }
    rules_[{rule.prefix_len, rule.suffix}] = {std::move(rule.continuation),
                                              rule.then_eos};
  }
}

TokenId ScriptedModel::next(const TokenSeq& context) const {
  // Longest common prefix with the trunk.
  std::size_t lcp = 0;
  while (lcp < context.size() && lcp < trunk_.size() &&
         context[lcp] == trunk_[lcp]) {
    ++lcp;
  }

  if (lcp == context.size()) {
    // On-trunk: follow the trunk, eos at the end.
    return lcp < trunk_.size() ? trunk_[lcp] : vocab_.eos_id();
  }

  // Off-trunk: the rule whose (prefix, suffix) most specifically matches the
  // observed deviation wins. The scripted continuation is indexed by how far
  // the context has advanced past the rule's suffix, so a single rule drives
  // several consecutive next() calls as the context grows.
  const std::size_t observed_len = context.size() - lcp;
  const std::vector<TokenId>& ctx = context.tokens();
  TokenId candidate = -1;
  std::size_t best_suffix_len = 0;
  bool found = false;
  for (auto it = rules_.lower_bound({lcp, {}});
       it != rules_.end() && it->first.first == lcp; ++it) {
    const std::vector<TokenId>& key_suffix = it->first.second;
    if (key_suffix.size() > observed_len) continue;
    if (!std::equal(key_suffix.begin(), key_suffix.end(), ctx.begin() + lcp)) {
      continue;
    }
    const std::size_t advanced = observed_len - key_suffix.size();
    const auto& [continuation, then_eos] = it->second;
    TokenId value;
    if (advanced < continuation.size()) {
      value = continuation[advanced];
    } else if (advanced == continuation.size() && then_eos) {
      value = vocab_.eos_id();
    } else {
      continue;  // continuation exhausted: this rule no longer applies
    }
    if (!found || key_suffix.size() > best_suffix_len) {
      candidate = value;
      best_suffix_len = key_suffix.size();
      found = true;
    }
  }
  if (found) return candidate;

  // Position resync: predict the trunk token at this position.
  return context.size() < trunk_.size() ? trunk_[context.size()]
                                        : vocab_.eos_id();
}

nlohmann::ordered_json ScriptedModel::spec_json() const {
  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& [key, value] : rules_) {
    rules.push_back({{"prefix_len", key.first},
                     {"suffix", key.second},
                     {"continuation", value.first},
                     {"then_eos", value.second}});
  }
  return {{"type", "scripted"},
          {"vocab_size", vocab_.size()},
          {"trunk", trunk_.tokens()},
          {"rules", rules}};
}

// ============================================================================
// RepeaterModel
// ============================================================================

RepeaterModel::RepeaterModel(Vocab vocab, TokenId repeated_token)
    : vocab_(vocab), repeated_token_(repeated_token) {
  if (!vocab_.is_content(repeated_token)) {
    throw std::invalid_argument(
        "RepeaterModel: repeated token must be a content token");
  }
}

nlohmann::ordered_json RepeaterModel::spec_json() const {
  return {{"type", "repeater"},
          {"vocab_size", vocab_.size()},
          {"token", repeated_token_}};
}

// ============================================================================
// Model deserialization
// ============================================================================

std::unique_ptr<VerifierModel> model_from_spec_json(
    const nlohmann::ordered_json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  const Vocab vocab(spec.at("vocab_size").get<TokenId>());
  if (type == "ngram") {
    return std::make_unique<NGramModel>(build_ngram_model(
        vocab, spec.at("order").get<int>(), spec.at("eos_bias").get<double>(),
        spec.at("seed").get<std::uint64_t>()));
  }
  if (type == "scripted") {
    TokenSeq trunk(spec.at("trunk").get<std::vector<TokenId>>(), vocab);
    std::vector<ScriptedModel::RepairRule> rules;
    if (spec.contains("rules")) {
      for (const auto& r : spec.at("rules")) {
        rules.push_back({r.at("prefix_len").get<std::size_t>(),
                         r.at("suffix").get<std::vector<TokenId>>(),
                         r.at("continuation").get<std::vector<TokenId>>(),
                         r.at("then_eos").get<bool>()});
      }
    }
    return std::make_unique<ScriptedModel>(vocab, std::move(trunk),
                                           std::move(rules));
  }
  if (type == "repeater") {
    return std::make_unique<RepeaterModel>(vocab,
                                           spec.at("token").get<TokenId>());
  }
  throw std::invalid_argument("model_from_spec_json: unknown model type '" +
                              type + "'");
}

// ============================================================================
// Draft generation
// ============================================================================

void CorruptionSpec::validate() const {
  for (double rate : {sub_rate, ins_rate, del_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw std::invalid_argument("CorruptionSpec: rates must be in [0,1]");
    }
  }
}

TokenSeq corrupt_draft(const TokenSeq& greedy_output,
                       const CorruptionSpec& spec, const Vocab& vocab) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<TokenId> out;
  out.reserve(greedy_output.size());
  const auto n = static_cast<std::uint64_t>(vocab.size());
  for (std::size_t i = 0; i < greedy_output.size(); ++i) {
    // Fixed draw order per position: delete, substitute, insert-after.
    const bool deleted = rng.bernoulli(spec.del_rate);
    const bool substituted = rng.bernoulli(spec.sub_rate);
    const bool inserted = rng.bernoulli(spec.ins_rate);
    if (!deleted) {
      const TokenId orig = greedy_output[i];
      out.push_back(substituted
                        ? static_cast<TokenId>(rng.next_below_except(
                              n, static_cast<std::uint64_t>(orig)))
                        : orig);
    }
    if (inserted) {
      out.push_back(static_cast<TokenId>(rng.next_below(n)));
    }
  }
  return TokenSeq::unchecked(std::move(out));
}

CorruptingDraftGenerator::CorruptingDraftGenerator(const VerifierModel& model,
                                                   CorruptionSpec spec,
                                                   std::size_t greedy_cap)
    : model_(model), spec_(spec), greedy_cap_(greedy_cap) {
  spec_.validate();
}

DraftResult CorruptingDraftGenerator::draft() const {
  const GreedyResult greedy = greedy_decode(model_, greedy_cap_);
  TokenSeq corrupted = corrupt_draft(greedy.output, spec_, model_.vocab());
  const auto steps = static_cast<std::uint64_t>(corrupted.size());
  return {std::move(corrupted), steps};
}

}  // namespace hydec

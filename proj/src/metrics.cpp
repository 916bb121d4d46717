#include "hydec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hydec {

// ============================================================================
// Edit distance
// ============================================================================

EditStats edit_distance(std::span<const TokenId> reference,
                        std::span<const TokenId> hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();

  // dp[i][j] = minimal edits turning reference[0..i) into hypothesis[0..j).
  std::vector<std::uint32_t> dp((n + 1) * (m + 1));
  const auto at = [m](std::size_t i, std::size_t j) -> std::size_t {
    return i * (m + 1) + j;
  };
  for (std::size_t i = 0; i <= n; ++i) dp[at(i, 0)] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) dp[at(0, j)] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t sub =
          dp[at(i - 1, j - 1)] + (reference[i - 1] != hypothesis[j - 1]);
      const std::uint32_t ins = dp[at(i, j - 1)] + 1;
      const std::uint32_t del = dp[at(i - 1, j)] + 1;
      dp[at(i, j)] = std::min({sub, ins, del});
    }
  }

  // Backtrace with fixed tie preference: substitution/match, then
  // insertion, then deletion, so the S/D/I split is reproducible.
  EditStats stats;
  stats.ref_len = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        dp[at(i, j)] ==
            dp[at(i - 1, j - 1)] + (reference[i - 1] != hypothesis[j - 1])) {
      if (reference[i - 1] != hypothesis[j - 1]) ++stats.substitutions;
      --i;
      --j;
    } else if (j > 0 && dp[at(i, j)] == dp[at(i, j - 1)] + 1) {
      ++stats.insertions;
      --j;
    } else {
      ++stats.deletions;
      --i;
    }
  }

  const std::uint64_t total =
      stats.substitutions + stats.deletions + stats.insertions;
  if (n == 0) {
    stats.empty_reference = m > 0;
    stats.wer = static_cast<double>(total);  // insertions/1 convention
  } else {
    stats.wer = static_cast<double>(total) / static_cast<double>(n);
  }
  return stats;
}

EditStats word_edit_distance(std::string_view reference,
                             std::string_view hypothesis) {
  std::unordered_map<std::string, TokenId> intern;
  const auto to_ids = [&intern](std::string_view text) {
    std::vector<TokenId> ids;
    std::istringstream stream{std::string(text)};
    std::string word;
    while (stream >> word) {
      const auto [it, _] =
          intern.emplace(word, static_cast<TokenId>(intern.size()));
      ids.push_back(it->second);
    }
    return ids;
  };
  const std::vector<TokenId> ref_ids = to_ids(reference);
  const std::vector<TokenId> hyp_ids = to_ids(hypothesis);
  return edit_distance(std::span<const TokenId>(ref_ids),
                       std::span<const TokenId>(hyp_ids));
}

// ============================================================================
// Step ratios
// ============================================================================

double step_ratio(const HybridTrace& trace, const StepCostModel& cost) {
  cost.validate();
  const double denominator =
      static_cast<double>(trace.baseline_steps) * cost.ar_step_cost;
  if (denominator <= 0.0) {
    throw std::domain_error(
        "step_ratio: baseline cost is zero; ratio undefined");
  }
  return transformer_cost(trace, cost) / denominator;
}

RatioHistogram bin_ratios(std::span<const double> ratios,
                          double bin_width_percent) {
  if (!(bin_width_percent > 0.0)) {
    throw std::invalid_argument("bin_ratios: bin width must be > 0");
  }
  RatioHistogram histogram;
  histogram.bin_width_percent = bin_width_percent;
  for (double ratio : ratios) {
    const auto bin = static_cast<std::size_t>(
        std::floor(ratio * 100.0 / bin_width_percent));
    ++histogram.bins[bin];
  }
  return histogram;
}

// ============================================================================
// Length-binned costs
// ============================================================================

LengthBinnedCost bin_costs_by_length(std::span<const LengthCostRow> rows) {
  LengthBinnedCost binned;
  for (const LengthCostRow& row : rows) {
    auto& bin = binned.bins[row.output_len / LengthBinnedCost::kBinSize];
    // Running mean keeps single-pass accumulation exact enough for step
    // counts while staying deterministic in input order.
    const double k = static_cast<double>(++bin.count);
    bin.mean_baseline += (row.baseline_cost - bin.mean_baseline) / k;
    bin.mean_draft += (row.draft_cost - bin.mean_draft) / k;
    bin.mean_hybrid += (row.hybrid_cost - bin.mean_hybrid) / k;
  }
  return binned;
}

// ============================================================================
// CSV serialization
// ============================================================================

std::string format_fixed(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

std::string to_csv(const RatioHistogram& histogram) {
  std::string out = "bin_lo_percent,bin_hi_percent,count\n";
  for (const auto& [bin, count] : histogram.bins) {
    const double lo = static_cast<double>(bin) * histogram.bin_width_percent;
    out += format_fixed(lo, 2) + ',' +
           format_fixed(lo + histogram.bin_width_percent, 2) + ',' +
           std::to_string(count) + '\n';
  }
  return out;
}

std::string to_csv(const LengthBinnedCost& binned) {
  std::string out =
      "length_bin_lo,length_bin_hi,n,mean_baseline_steps,mean_draft_steps,"
      "mean_hybrid_steps\n";
  for (const auto& [bin, stats] : binned.bins) {
    out += std::to_string(bin * LengthBinnedCost::kBinSize) + ',' +
           std::to_string((bin + 1) * LengthBinnedCost::kBinSize) + ',' +
           std::to_string(stats.count) + ',' +
           format_fixed(stats.mean_baseline) + ',' +
           format_fixed(stats.mean_draft) + ',' +
           format_fixed(stats.mean_hybrid) + '\n';
  }
  return out;
}

}  // namespace hydec

#include "hydec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hydec/metrics.hpp"
#include "hydec/rng.hpp"

namespace hydec {

namespace {

// Domain tags for per-utterance seed derivation.
constexpr std::uint64_t kRateDrawTag = 0x52415445ULL;      // rates
constexpr std::uint64_t kCorruptionTag = 0xD4AF7ULL;       // draft noise
constexpr std::size_t kMaxCorpusAttempts = 100000;

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RateRange rate_from_json(const nlohmann::ordered_json& value) {
  if (value.is_array()) {
    if (value.size() != 2) {
      throw std::invalid_argument("corruption rate range must be [lo, hi]");
    }
    return {value[0].get<double>(), value[1].get<double>()};
  }
  const double rate = value.get<double>();
  return {rate, rate};
}

nlohmann::ordered_json rate_to_json(const RateRange& range) {
  if (range.lo == range.hi) return range.lo;
  return nlohmann::ordered_json::array({range.lo, range.hi});
}

void validate_rate(const RateRange& range, const char* name) {
  if (!(range.lo >= 0.0 && range.lo <= range.hi && range.hi <= 1.0)) {
    throw std::invalid_argument(std::string("corruption.") + name +
                                ": need 0 <= lo <= hi <= 1");
  }
}

double draw_rate(Rng& rng, const RateRange& range) {
  return range.lo + rng.next_unit() * (range.hi - range.lo);
}

}  // namespace

// ============================================================================
// Configuration
// ============================================================================

void ExperimentConfig::validate() const {
  cost.validate();
  if (l_cap < 1) throw std::invalid_argument("l_cap must be >= 1");
  if (corpus.n_utterances < 1) {
    throw std::invalid_argument("corpus.n_utterances must be >= 1");
  }
  if (corpus.vocab_size < 2) {
    throw std::invalid_argument("corpus.vocab_size must be >= 2");
  }
  if (corpus.ngram_order < 1 || corpus.ngram_order > 3) {
    throw std::invalid_argument("corpus.ngram_order must be in {1,2,3}");
  }
  if (!(corpus.eos_bias >= 0.0 && corpus.eos_bias <= 1.0)) {
    throw std::invalid_argument("corpus.eos_bias must be in [0,1]");
  }
  const std::size_t effective_max =
      corpus.max_len == 0 ? l_cap : corpus.max_len;
  if (corpus.min_len > effective_max) {
    throw std::invalid_argument("corpus.min_len exceeds corpus.max_len");
  }
  validate_rate(corruption.sub, "sub_rate");
  validate_rate(corruption.ins, "ins_rate");
  validate_rate(corruption.del, "del_rate");
  if (k_values.empty()) throw std::invalid_argument("k_values must be non-empty");
  for (std::size_t k : k_values) {
    if (k < 1) throw std::invalid_argument("k_values entries must be >= 1");
  }
  if (!(histogram_bin_width_percent > 0.0)) {
    throw std::invalid_argument("histogram_bin_width_percent must be > 0");
  }
}

ExperimentConfig config_from_json(const nlohmann::ordered_json& doc) {
  ExperimentConfig config;
  config.master_seed = doc.value("master_seed", config.master_seed);
  config.l_cap = doc.value("l_cap", config.l_cap);
  if (doc.contains("corpus")) {
    const auto& c = doc.at("corpus");
    config.corpus.n_utterances = c.value("n_utterances", config.corpus.n_utterances);
    config.corpus.vocab_size = c.value("vocab_size", config.corpus.vocab_size);
    config.corpus.ngram_order = c.value("ngram_order", config.corpus.ngram_order);
    config.corpus.eos_bias = c.value("eos_bias", config.corpus.eos_bias);
    config.corpus.min_len = c.value("min_len", config.corpus.min_len);
    config.corpus.max_len = c.value("max_len", config.corpus.max_len);
  }
  if (doc.contains("corruption")) {
    const auto& c = doc.at("corruption");
    if (c.contains("sub_rate")) config.corruption.sub = rate_from_json(c.at("sub_rate"));
    if (c.contains("ins_rate")) config.corruption.ins = rate_from_json(c.at("ins_rate"));
    if (c.contains("del_rate")) config.corruption.del = rate_from_json(c.at("del_rate"));
  }
  if (doc.contains("k_values")) {
    config.k_values = doc.at("k_values").get<std::vector<std::size_t>>();
  }
  if (doc.contains("cost")) {
    const auto& c = doc.at("cost");
    config.cost.verify_pass_cost = c.value("verify_pass_cost", config.cost.verify_pass_cost);
    config.cost.ar_step_cost = c.value("ar_step_cost", config.cost.ar_step_cost);
    config.cost.draft_step_cost = c.value("draft_step_cost", config.cost.draft_step_cost);
  }
  config.histogram_bin_width_percent =
      doc.value("histogram_bin_width_percent", config.histogram_bin_width_percent);
  config.validate();
  return config;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  return {{"schema_version", kSchemaVersion},
          {"master_seed", config.master_seed},
          {"l_cap", config.l_cap},
          {"corpus",
           {{"n_utterances", config.corpus.n_utterances},
            {"vocab_size", config.corpus.vocab_size},
            {"ngram_order", config.corpus.ngram_order},
            {"eos_bias", config.corpus.eos_bias},
            {"min_len", config.corpus.min_len},
            {"max_len", config.corpus.max_len}}},
          {"corruption",
           {{"sub_rate", rate_to_json(config.corruption.sub)},
            {"ins_rate", rate_to_json(config.corruption.ins)},
            {"del_rate", rate_to_json(config.corruption.del)}}},
          {"k_values", config.k_values},
          {"cost",
           {{"verify_pass_cost", config.cost.verify_pass_cost},
            {"ar_step_cost", config.cost.ar_step_cost},
            {"draft_step_cost", config.cost.draft_step_cost}}},
          {"histogram_bin_width_percent", config.histogram_bin_width_percent}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path.string() + ": " +
                             e.what());
  }
  return config_from_json(doc);
}

// ============================================================================
// Corpus generation
// ============================================================================

void generate_corpus(const ExperimentConfig& config,
                     const std::filesystem::path& corpus_path) {
  config.validate();
  const Vocab vocab(config.corpus.vocab_size);
  const std::size_t max_len =
      config.corpus.max_len == 0 ? config.l_cap : config.corpus.max_len;

  std::string out;
  for (std::size_t id = 0; id < config.corpus.n_utterances; ++id) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < kMaxCorpusAttempts; ++attempt) {
      const std::uint64_t seed = stable_hash(config.master_seed, id, attempt);
      const NGramModel model = build_ngram_model(
          vocab, config.corpus.ngram_order, config.corpus.eos_bias, seed);
      const GreedyResult greedy = greedy_decode(model, config.l_cap);
      if (!greedy.terminated || greedy.output.size() < config.corpus.min_len ||
          greedy.output.size() > max_len) {
        continue;
      }
      nlohmann::ordered_json line = {{"schema_version", kSchemaVersion},
                                     {"utterance_id", id},
                                     {"seed", seed},
                                     {"model", model.spec_json()}};
      out += line.dump();
      out += '\n';
      accepted = true;
      break;
    }
    if (!accepted) {
      throw std::runtime_error(
          "generate_corpus: utterance " + std::to_string(id) +
          " could not satisfy the greedy length band [" +
          std::to_string(config.corpus.min_len) + ", " +
          std::to_string(max_len) + "]; adjust eos_bias or the band");
    }
  }
  write_file(corpus_path, out);
}

// ============================================================================
// Experiment run
// ============================================================================

namespace {

struct CorpusEntry {
  std::uint64_t utterance_id = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json model_spec;
};

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus: " + path.string());
  }
  std::vector<CorpusEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::ordered_json doc = nlohmann::ordered_json::parse(line);
      entries.push_back({doc.at("utterance_id").get<std::uint64_t>(),
                         doc.at("seed").get<std::uint64_t>(),
                         doc.at("model")});
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus parse error at " + path.string() +
                               ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

UtteranceRecord process_utterance(const CorpusEntry& entry,
                                  const ExperimentConfig& config) {
  const std::unique_ptr<VerifierModel> model =
      model_from_spec_json(entry.model_spec);

  UtteranceRecord record;
  record.utterance_id = entry.utterance_id;
  record.seed = entry.seed;

  const GreedyResult greedy = greedy_decode(*model, config.l_cap);
  record.greedy_len = greedy.output.size();
  record.greedy_terminated = greedy.terminated;
  record.baseline_steps = greedy.steps;

  Rng rate_rng(stable_hash(entry.seed, kRateDrawTag));
  CorruptionSpec corruption;
  corruption.sub_rate = draw_rate(rate_rng, config.corruption.sub);
  corruption.ins_rate = draw_rate(rate_rng, config.corruption.ins);
  corruption.del_rate = draw_rate(rate_rng, config.corruption.del);
  corruption.seed = stable_hash(entry.seed, kCorruptionTag);

  const TokenSeq draft =
      corrupt_draft(greedy.output, corruption, model->vocab());
  record.draft_len = draft.size();
  record.draft_steps = draft.size();
  record.wer_draft = edit_distance(greedy.output, draft).wer;

  for (std::size_t k : config.k_values) {
    HybridConfig hybrid_config;
    hybrid_config.patch_budget = k;
    hybrid_config.l_cap = config.l_cap;
    HybridOutcome outcome;
    try {
      outcome = hybrid_decode(*model, draft, hybrid_config);
    } catch (const NonTerminationError& e) {
      throw std::runtime_error("utterance " +
                               std::to_string(entry.utterance_id) + " (k=" +
                               std::to_string(k) + "): " + e.what());
    }
    outcome.trace.draft_steps = record.draft_steps;
    outcome.trace.baseline_steps = record.baseline_steps;

    KOutcome k_outcome;
    k_outcome.k = k;
    k_outcome.ratio = step_ratio(outcome.trace, config.cost);
    k_outcome.wer_hybrid = edit_distance(greedy.output, outcome.output).wer;
    k_outcome.trace = std::move(outcome.trace);
    k_outcome.output = std::move(outcome.output);
    record.outcomes.push_back(std::move(k_outcome));
  }
  return record;
}

std::string results_csv(const std::vector<UtteranceRecord>& records,
                        const ExperimentConfig& config) {
  std::string out = std::string(kResultsHeader) + '\n';
  for (const UtteranceRecord& record : records) {
    for (const KOutcome& outcome : record.outcomes) {
      out += std::to_string(record.utterance_id) + ',' +
             std::to_string(outcome.k) + ',' +
             std::to_string(record.greedy_len) + ',' +
             (record.greedy_terminated ? "1" : "0") + ',' +
             std::to_string(record.baseline_steps) + ',' +
             std::to_string(record.draft_len) + ',' +
             std::to_string(record.draft_steps) + ',' +
             std::to_string(outcome.trace.verify_passes) + ',' +
             std::to_string(outcome.trace.ar_steps) + ',' +
             std::to_string(outcome.trace.iterations) + ',' +
             format_fixed(transformer_cost(outcome.trace, config.cost)) + ',' +
             format_fixed(outcome.ratio) + ',' +
             to_string(outcome.trace.exit_path) + ',' +
             format_fixed(record.wer_draft) + ',' +
             format_fixed(outcome.wer_hybrid) + '\n';
    }
  }
  return out;
}

std::string traces_jsonl(const std::vector<UtteranceRecord>& records) {
  std::string out;
  for (const UtteranceRecord& record : records) {
    for (const KOutcome& outcome : record.outcomes) {
      nlohmann::ordered_json line = {{"schema_version", kSchemaVersion},
                                     {"utterance_id", record.utterance_id},
                                     {"k", outcome.k}};
      line.update(trace_to_json(outcome.trace, outcome.output));
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<UtteranceRecord>& records,
                        const ExperimentConfig& config) {
  std::string out = std::string(kSummaryHeader) + '\n';
  for (std::size_t idx = 0; idx < config.k_values.size(); ++idx) {
    const std::size_t k = config.k_values[idx];
    std::vector<double> ratios;
    double sum_wer_draft = 0.0;
    double sum_wer_hybrid = 0.0;
    double sum_steps = 0.0;
    std::uint64_t exits[3] = {0, 0, 0};
    for (const UtteranceRecord& record : records) {
      const KOutcome& outcome = record.outcomes[idx];
      ratios.push_back(outcome.ratio);
      sum_wer_draft += record.wer_draft;
      sum_wer_hybrid += outcome.wer_hybrid;
      sum_steps += transformer_cost(outcome.trace, config.cost);
      ++exits[static_cast<int>(outcome.trace.exit_path)];
    }
    const auto n = static_cast<double>(records.size());
    double mean_ratio = 0.0;
    double median_ratio = 0.0;
    if (!ratios.empty()) {
      double sum_ratio = 0.0;
      for (double r : ratios) sum_ratio += r;
      mean_ratio = sum_ratio / n;
      std::sort(ratios.begin(), ratios.end());
      const std::size_t mid = ratios.size() / 2;
      median_ratio = ratios.size() % 2 == 1
                         ? ratios[mid]
                         : 0.5 * (ratios[mid - 1] + ratios[mid]);
    }
    out += std::to_string(k) + ',' + std::to_string(records.size()) + ',' +
           format_fixed(records.empty() ? 0.0 : sum_wer_draft / n) + ',' +
           format_fixed(records.empty() ? 0.0 : sum_wer_hybrid / n) + ',' +
           format_fixed(mean_ratio) + ',' + format_fixed(median_ratio) + ',' +
           format_fixed(records.empty() ? 0.0 : sum_steps / n) + ',' +
           std::to_string(exits[0]) + ',' + std::to_string(exits[1]) + ',' +
           std::to_string(exits[2]) + '\n';
  }
  return out;
}

}  // namespace

std::vector<UtteranceRecord> run_experiment(
    const std::filesystem::path& corpus_path, const ExperimentConfig& config,
    const std::filesystem::path& out_dir, const RunOptions& options) {
  config.validate();
  const std::vector<CorpusEntry> entries = read_corpus(corpus_path);

  std::vector<UtteranceRecord> records(entries.size());
  std::size_t thread_count =
      options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  thread_count = std::max<std::size_t>(1, std::min(thread_count,
                                                   std::max<std::size_t>(entries.size(), 1)));

  if (thread_count == 1) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      records[i] = process_utterance(entries[i], config);
    }
  } else {
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    const auto worker = [&] {
      while (true) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= entries.size()) return;
        try {
          records[i] = process_utterance(entries[i], config);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "results.csv", results_csv(records, config));
  write_file(out_dir / "traces.jsonl", traces_jsonl(records));
  write_file(out_dir / "summary.csv", summary_csv(records, config));
  write_file(out_dir / "config.json", config_to_json(config).dump(2) + "\n");
  return records;
}

// ============================================================================
// Report
// ============================================================================

namespace {

struct ResultRow {
  std::uint64_t utterance_id = 0;
  std::size_t k = 0;
  std::size_t greedy_len = 0;
  bool greedy_terminated = false;
  std::uint64_t baseline_steps = 0;
  std::size_t draft_len = 0;
  std::uint64_t draft_steps = 0;
  std::uint64_t verify_passes = 0;
  std::uint64_t ar_steps = 0;
  std::uint64_t iterations = 0;
  double transformer_steps = 0.0;
  double step_ratio = 0.0;
  std::string exit_path;
  double wer_draft = 0.0;
  double wer_hybrid = 0.0;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error("malformed results file (unexpected header): " +
                             path.string());
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 15) {
      throw std::runtime_error("malformed results row at line " +
                               std::to_string(line_no) + " of " + path.string());
    }
    try {
      ResultRow row;
      row.utterance_id = std::stoull(f[0]);
      row.k = std::stoull(f[1]);
      row.greedy_len = std::stoull(f[2]);
      row.greedy_terminated = f[3] == "1";
      row.baseline_steps = std::stoull(f[4]);
      row.draft_len = std::stoull(f[5]);
      row.draft_steps = std::stoull(f[6]);
      row.verify_passes = std::stoull(f[7]);
      row.ar_steps = std::stoull(f[8]);
      row.iterations = std::stoull(f[9]);
      row.transformer_steps = std::stod(f[10]);
      row.step_ratio = std::stod(f[11]);
      row.exit_path = f[12];
      row.wer_draft = std::stod(f[13]);
      row.wer_hybrid = std::stod(f[14]);
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed results row at line " +
                               std::to_string(line_no) + " of " +
                               path.string() + ": " + e.what());
    }
  }
  return rows;
}

std::vector<std::size_t> distinct_k(const std::vector<ResultRow>& rows) {
  std::vector<std::size_t> ks;
  for (const ResultRow& row : rows) {
    if (std::find(ks.begin(), ks.end(), row.k) == ks.end()) ks.push_back(row.k);
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

}  // namespace

void write_report(const std::filesystem::path& results_dir,
                  const std::filesystem::path& out_dir) {
  const std::vector<ResultRow> rows = read_results(results_dir / "results.csv");

  double bin_width = 5.0;
  const std::filesystem::path config_path = results_dir / "config.json";
  if (std::filesystem::exists(config_path)) {
    const auto doc = nlohmann::ordered_json::parse(read_file(config_path));
    bin_width = doc.value("histogram_bin_width_percent", bin_width);
  }

  const std::vector<std::size_t> ks = distinct_k(rows);

  // Per-K summary table (Table-style analog with step columns).
  std::string summary = std::string(kSummaryHeader) + '\n';
  for (std::size_t k : ks) {
    std::vector<double> ratios;
    double sum_wer_draft = 0.0;
    double sum_wer_hybrid = 0.0;
    double sum_steps = 0.0;
    std::uint64_t n = 0;
    std::uint64_t exits[3] = {0, 0, 0};
    for (const ResultRow& row : rows) {
      if (row.k != k) continue;
      ++n;
      ratios.push_back(row.step_ratio);
      sum_wer_draft += row.wer_draft;
      sum_wer_hybrid += row.wer_hybrid;
      sum_steps += row.transformer_steps;
      ++exits[static_cast<int>(exit_path_from_string(row.exit_path))];
    }
    std::sort(ratios.begin(), ratios.end());
    const std::size_t mid = ratios.size() / 2;
    const double median = ratios.empty() ? 0.0
                          : ratios.size() % 2 == 1
                              ? ratios[mid]
                              : 0.5 * (ratios[mid - 1] + ratios[mid]);
    double sum_ratio = 0.0;
    for (double r : ratios) sum_ratio += r;
    const auto dn = static_cast<double>(n);
    summary += std::to_string(k) + ',' + std::to_string(n) + ',' +
               format_fixed(n ? sum_wer_draft / dn : 0.0) + ',' +
               format_fixed(n ? sum_wer_hybrid / dn : 0.0) + ',' +
               format_fixed(n ? sum_ratio / dn : 0.0) + ',' +
               format_fixed(median) + ',' +
               format_fixed(n ? sum_steps / dn : 0.0) + ',' +
               std::to_string(exits[0]) + ',' + std::to_string(exits[1]) +
               ',' + std::to_string(exits[2]) + '\n';
  }

  // Step-ratio histogram per K.
  std::string histogram = "k,bin_lo_percent,bin_hi_percent,count\n";
  for (std::size_t k : ks) {
    std::vector<double> ratios;
    for (const ResultRow& row : rows) {
      if (row.k == k) ratios.push_back(row.step_ratio);
    }
    const RatioHistogram h = bin_ratios(ratios, bin_width);
    for (const auto& [bin, count] : h.bins) {
      const double lo = static_cast<double>(bin) * h.bin_width_percent;
      histogram += std::to_string(k) + ',' + format_fixed(lo, 2) + ',' +
                   format_fixed(lo + h.bin_width_percent, 2) + ',' +
                   std::to_string(count) + '\n';
    }
  }

  // Mean cost per output-length bin per K.
  std::string binned_costs =
      "k,length_bin_lo,length_bin_hi,n,mean_baseline_steps,mean_draft_steps,"
      "mean_hybrid_steps\n";
  for (std::size_t k : ks) {
    std::vector<LengthCostRow> cost_rows;
    for (const ResultRow& row : rows) {
      if (row.k != k) continue;
      cost_rows.push_back({row.greedy_len,
                           static_cast<double>(row.baseline_steps),
                           static_cast<double>(row.draft_steps),
                           row.transformer_steps});
    }
    const LengthBinnedCost binned = bin_costs_by_length(cost_rows);
    for (const auto& [bin, stats] : binned.bins) {
      binned_costs += std::to_string(k) + ',' +
                      std::to_string(bin * LengthBinnedCost::kBinSize) + ',' +
                      std::to_string((bin + 1) * LengthBinnedCost::kBinSize) +
                      ',' + std::to_string(stats.count) + ',' +
                      format_fixed(stats.mean_baseline) + ',' +
                      format_fixed(stats.mean_draft) + ',' +
                      format_fixed(stats.mean_hybrid) + '\n';
    }
  }

  // Output-length histogram of utterances that barely benefit
  // (ratio >= 0.95).
  std::string high_ratio = "k,length_bin_lo,length_bin_hi,count\n";
  for (std::size_t k : ks) {
    std::map<std::size_t, std::uint64_t> bins;
    for (const ResultRow& row : rows) {
      if (row.k == k && row.step_ratio >= 0.95) {
        ++bins[row.greedy_len / LengthBinnedCost::kBinSize];
      }
    }
    for (const auto& [bin, count] : bins) {
      high_ratio += std::to_string(k) + ',' +
                    std::to_string(bin * LengthBinnedCost::kBinSize) + ',' +
                    std::to_string((bin + 1) * LengthBinnedCost::kBinSize) +
                    ',' + std::to_string(count) + '\n';
    }
  }

  // Markdown digest.
  std::string md = "# Hybrid decoding report\n\n";
  md += "Rows: " + std::to_string(rows.size()) + "\n\n";
  md += "## Per-K summary\n\n";
  md += "| k | n | mean WER draft | mean WER hybrid | mean step ratio | "
        "median step ratio | mean transformer steps | eos_confirmed | "
        "appended_eos | appended_truncated |\n";
  md += "|---|---|---|---|---|---|---|---|---|---|\n";
  {
    std::istringstream in(summary);
    std::string line;
    std::getline(in, line);  // skip header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      md += "| ";
      for (char c : line) md += c == ',' ? std::string(" | ") : std::string(1, c);
      md += " |\n";
    }
  }
  md += "\nSee ratio_histogram.csv, length_binned_costs.csv, and "
        "high_ratio_lengths.csv for the distribution views.\n";

  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "summary_table.csv", summary);
  write_file(out_dir / "ratio_histogram.csv", histogram);
  write_file(out_dir / "length_binned_costs.csv", binned_costs);
  write_file(out_dir / "high_ratio_lengths.csv", high_ratio);
  write_file(out_dir / "report.md", md);
}

}  // namespace hydec

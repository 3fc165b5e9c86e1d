#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/citation_map.hpp"

namespace attncite {

struct SentenceScore {
  double text_f1 = 0.0;
  bool text_em = false;
  bool joint_em = false;
  // Set for multimodal samples only: IMG in pred iff IMG in ref.
  std::optional<bool> img_agree;
};

// Text P/R/F1 on IMG-stripped sets. Both empty scores 1; one empty, 0.
SentenceScore score_sentence(const CitationSet& pred, const CitationSet& ref, bool multimodal);

enum class Aggregation {
  kMacroSample,     // mean over sentences per sample, then over samples
  kPooledSentence,  // mean over all sentences
};

struct EvalReport {
  double text_macro_f1 = 0.0;
  double text_em = 0.0;
  std::optional<double> img_acc;
  double joint_em = 0.0;
  std::size_t n_sentences = 0;
  std::size_t n_samples = 0;
  std::optional<double> rouge1_f;
  std::optional<double> rougeL_f;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct ScoreOptions {
  Aggregation aggregation = Aggregation::kMacroSample;
  // Treat summary sentences missing from a prediction as empty instead of
  // failing on the index mismatch.
  bool fill_missing = false;
};

// Samples pair up by id. A sample is multimodal when either side says so
// explicitly, otherwise when either map cites IMG.
EvalReport score_citations(const std::vector<SampleCitations>& pred,
                           const std::vector<SampleCitations>& ref, const ScoreOptions& opts = {});

// Flat JSON record with raw [0, 1] scores.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
// Human-readable, scores x100 with two decimals.
std::string format_report(const EvalReport& report);

struct RougeScores {
  double rouge1_f = 0.0;
  double rougeL_f = 0.0;
};

// Lowercased runs of alphanumeric characters (bytes >= 0x80 count as
// alphanumeric so UTF-8 words stay whole).
std::vector<std::string> rouge_tokens(std::string_view text);

std::size_t lcs_length(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// ROUGE-1 F1 with clipped unigram counts and ROUGE-L F1 (beta = 1) over
// token id sequences. Both empty -> 1; exactly one empty -> 0.
RougeScores rouge_ids(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> ref);
RougeScores rouge(std::string_view pred, std::string_view ref);

}  // namespace attncite

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "attncite/chunker.hpp"
#include "attncite/citation_map.hpp"
#include "attncite/trace.hpp"
#include "attncite/types.hpp"

namespace attncite {

struct EngineConfig {
  std::size_t k = 3;
  Vote vote = Vote::kMajority;
  double tau = 0.16;
  Mode mode = Mode::kText;
  // Split source speaker turns (`Doctor: ...`) as separate units.
  bool dialogue = false;
};

void validate_config(const EngineConfig& cfg);

// ceil(tau * n), computed so that decimal thresholds such as 0.16 * 50
// yield 8 rather than 9.
std::size_t required_votes(double tau, std::size_t n);

// Top-k vote over candidate columns (token_sid not IMG/NONE).
//
// Columns rank by attention descending, lower index first on equal values.
// Majority returns the most frequent sentence among the top k; on a count
// tie the sentence of the highest-ranked token wins. Max returns the
// sentence of the top column. kNoneLabel only when there are no
// candidates. Holds scratch space, so one instance per thread.
class TokenLabeler {
 public:
  TokenLabeler(const ChunkedDocument& chunks, std::size_t k, Vote vote);

  SentenceId label(std::span<const float> row);
  std::size_t candidate_count() const { return columns_.size(); }

 private:
  struct Ranked {
    float value;
    SentenceId sid;
  };

  std::vector<std::size_t> columns_;
  std::vector<SentenceId> column_sid_;
  std::size_t k_;
  Vote vote_;
  std::vector<Ranked> top_;
  std::vector<std::pair<SentenceId, std::size_t>> tally_;
};

SentenceId token_label(std::span<const float> row, const ChunkedDocument& chunks,
                       const EngineConfig& cfg);

// { i : count(labels == i) >= ceil(tau * |T_j|) }, NONE labels excluded
// from both the counts and |T_j|.
std::set<SentenceId> aggregate_sentence(std::span<const SentenceId> labels, double tau);

// Mean image-block attention per summary sentence: mean over the
// sentence's tokens of the mean over image columns. Empty sentences have
// no score.
std::vector<std::optional<double>> image_scores(const AttentionMatrix& attention,
                                                const TraceMeta& meta,
                                                const ChunkedDocument& summary);

CitationMap attribute(const Trace& trace, const EngineConfig& cfg);

}  // namespace attncite

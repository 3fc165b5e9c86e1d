#include "attncite/engine.hpp"

#include <algorithm>
#include <cmath>

#include "attncite/error.hpp"

namespace attncite {

void validate_config(const EngineConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorKind::kUsage, "k must be >= 1", "k");
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) {
    throw Error(ErrorKind::kUsage, "tau must lie in [0, 1]", "tau");
  }
}

std::size_t required_votes(double tau, std::size_t n) {
  const double x = tau * static_cast<double>(n);
  const double nearest = std::nearbyint(x);
  if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

TokenLabeler::TokenLabeler(const ChunkedDocument& chunks, std::size_t k, Vote vote)
    : k_(vote == Vote::kMax ? 1 : k), vote_(vote) {
  for (std::size_t t = 0; t < chunks.token_sid.size(); ++t) {
    const SentenceId sid = chunks.token_sid[t];
    if (sid >= 0) {
      columns_.push_back(t);
      column_sid_.push_back(sid);
    }
  }
  top_.reserve(k_ + 1);
  tally_.reserve(k_);
}

SentenceId TokenLabeler::label(std::span<const float> row) {
  if (columns_.empty()) return kNoneLabel;

  // Columns arrive in ascending index order, so inserting after every
  // entry with value >= v keeps index order among equal values.
  top_.clear();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const float v = row[columns_[c]];
    if (top_.size() == k_ && !(v > top_.back().value)) continue;
    auto pos = std::upper_bound(top_.begin(), top_.end(), v,
                                [](float value, const Ranked& r) { return value > r.value; });
    top_.insert(pos, Ranked{v, column_sid_[c]});
    if (top_.size() > k_) top_.pop_back();
  }

  if (vote_ == Vote::kMax || top_.size() == 1) return top_.front().sid;

  tally_.clear();
  for (const auto& r : top_) {
    auto it = std::find_if(tally_.begin(), tally_.end(),
                           [&](const auto& e) { return e.first == r.sid; });
    if (it == tally_.end()) {
      tally_.emplace_back(r.sid, 1);
    } else {
      ++it->second;
    }
  }
  // tally_ is in first-seen (rank) order; strict > keeps the earliest.
  auto best = tally_.begin();
  for (auto it = tally_.begin(); it != tally_.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

SentenceId token_label(std::span<const float> row, const ChunkedDocument& chunks,
                       const EngineConfig& cfg) {
  validate_config(cfg);
  TokenLabeler labeler(chunks, cfg.k, cfg.vote);
  return labeler.label(row);
}

std::set<SentenceId> aggregate_sentence(std::span<const SentenceId> labels, double tau) {
  std::map<SentenceId, std::size_t> counts;
  std::size_t n = 0;
  for (SentenceId s : labels) {
    if (s < 0) continue;
    ++counts[s];
    ++n;
  }
  std::set<SentenceId> out;
  if (n == 0) return out;
  const std::size_t need = std::max<std::size_t>(1, required_votes(tau, n));
  for (const auto& [sid, count] : counts) {
    if (count >= need) out.insert(sid);
  }
  return out;
}

std::vector<std::optional<double>> image_scores(const AttentionMatrix& attention,
                                                const TraceMeta& meta,
                                                const ChunkedDocument& summary) {
  if (!meta.image_block) {
    throw Error(ErrorKind::kModeMismatch, "not an IMG_RAW trace", "image_block");
  }
  const auto block = *meta.image_block;
  const double width = static_cast<double>(block.size());
  std::vector<double> sum(summary.sentences.size(), 0.0);
  std::vector<std::size_t> count(summary.sentences.size(), 0);
  for (std::size_t t = 0; t < attention.rows(); ++t) {
    const SentenceId j = summary.token_sid[t];
    if (j < 0) continue;
    const auto row = attention.row(t);
    double acc = 0.0;
    for (std::size_t k = block.begin; k < block.end; ++k) acc += row[k];
    sum[static_cast<std::size_t>(j)] += acc / width;
    ++count[static_cast<std::size_t>(j)];
  }
  std::vector<std::optional<double>> out(summary.sentences.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (count[j] > 0) out[j] = sum[j] / static_cast<double>(count[j]);
  }
  return out;
}

CitationMap attribute(const Trace& trace, const EngineConfig& cfg) {
  validate_config(cfg);
  const auto& meta = trace.meta;
  if (cfg.mode == Mode::kImgRaw && !meta.image_block) {
    throw Error(ErrorKind::kModeMismatch, "not an IMG_RAW trace", "image_block");
  }
  if (cfg.mode == Mode::kImgCap && !meta.caption_span) {
    throw Error(ErrorKind::kModeMismatch, "not an IMG_CAP trace", "caption_span");
  }

  const ChunkedDocument source = chunk_source(meta, cfg.dialogue);
  const ChunkedDocument summary = chunk_summary(meta);
  if (summary.sentences.empty() || meta.gen_tokens.empty()) {
    throw Error(ErrorKind::kInvalidInput, "empty summary", "gen_text");
  }

  const std::size_t n_src = source.sentences.size();
  const std::size_t n_sum = summary.sentences.size();
  std::vector<std::size_t> votes(n_sum * n_src, 0);
  std::vector<std::size_t> voters(n_sum, 0);

  TokenLabeler labeler(source, cfg.k, cfg.vote);
  for (std::size_t t = 0; t < trace.attention.rows(); ++t) {
    const SentenceId j = summary.token_sid[t];
    const SentenceId s = labeler.label(trace.attention.row(t));
    if (j < 0 || s < 0) continue;
    ++votes[static_cast<std::size_t>(j) * n_src + static_cast<std::size_t>(s)];
    ++voters[static_cast<std::size_t>(j)];
  }

  CitationMap map;
  for (std::size_t j = 0; j < n_sum; ++j) {
    CitationSet& set = map[j];
    if (voters[j] == 0) continue;
    const std::size_t need = std::max<std::size_t>(1, required_votes(cfg.tau, voters[j]));
    for (std::size_t s = 0; s < n_src; ++s) {
      if (votes[j * n_src + s] >= need) set.sources.insert(static_cast<SentenceId>(s));
    }
  }

  if (cfg.mode == Mode::kImgRaw) {
    const auto scores = image_scores(trace.attention, meta, summary);
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] && (!best || *scores[j] > *scores[*best])) best = j;
    }
    if (best) map[*best].image = true;
  } else if (cfg.mode == Mode::kImgCap) {
    const SentenceId cap = *source.caption_sid;
    for (auto& [_, set] : map) {
      if (set.sources.erase(cap) > 0) set.image = true;
    }
  }
  return map;
}

}  // namespace attncite

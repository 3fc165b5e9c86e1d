#include "attncite/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "attncite/chunker.hpp"
#include "attncite/error.hpp"

namespace attncite {

std::size_t PortableRng::below(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

namespace {

[[noreturn]] void infeasible(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::kInvalidInput, why, field);
}

struct Layout {
  TraceMeta meta;
  std::vector<std::vector<std::size_t>> sentence_cols;  // source sentence -> columns
  std::vector<IndexRange> gen_sentence_tokens;           // summary sentence -> token range
};

void append_sentence(std::string& text, std::vector<CharSpan>& tokens, char upper, char lower,
                     std::size_t sid, std::size_t n_tokens) {
  for (std::size_t m = 0; m < n_tokens; ++m) {
    const std::size_t begin = text.size();
    if (!(m == 0 && sid == 0)) text.push_back(' ');
    text.push_back(m == 0 ? upper : lower);
    text += std::to_string(sid) + "w" + std::to_string(m);
    if (m + 1 == n_tokens) text.push_back('.');
    tokens.push_back({begin, text.size()});
  }
}

Layout build_layout(Mode mode, const std::vector<std::size_t>& src_sizes,
                    const std::vector<std::size_t>& gen_sizes, std::size_t image_tokens,
                    std::size_t caption_sid, std::size_t prompt_tokens) {
  Layout out;
  TraceMeta& meta = out.meta;
  meta.mode = mode;

  auto& text = meta.source_text;
  auto& tokens = meta.source_tokens;
  for (std::size_t p = 0; p < prompt_tokens; ++p) {
    const std::size_t begin = text.size();
    text += (p == 0 ? "<p" : " <p") + std::to_string(p) + ">";
    tokens.push_back({begin, text.size()});
  }
  text += "\n";
  const std::size_t region_begin = tokens.size();

  if (mode == Mode::kImgRaw) {
    const std::size_t at = text.size();
    meta.image_block = IndexRange{tokens.size(), tokens.size() + image_tokens};
    for (std::size_t i = 0; i < image_tokens; ++i) tokens.push_back({at, at});
  }

  const std::size_t doc_begin = text.size();
  out.sentence_cols.resize(src_sizes.size());
  for (std::size_t s = 0; s < src_sizes.size(); ++s) {
    const bool caption = mode == Mode::kImgCap && s == caption_sid;
    const std::size_t first_token = tokens.size();
    // Sentence text is relative to the document start.
    std::string doc = text.substr(doc_begin);
    std::vector<CharSpan> local;
    append_sentence(doc, local, caption ? 'C' : 'S', caption ? 'c' : 's', s, src_sizes[s]);
    text = text.substr(0, doc_begin) + doc;
    for (const auto& span : local) tokens.push_back({span.begin + doc_begin, span.end + doc_begin});
    for (std::size_t t = first_token; t < tokens.size(); ++t) out.sentence_cols[s].push_back(t);
    if (caption) {
      std::size_t b = tokens[first_token].begin;
      while (text[b] == ' ') ++b;
      meta.caption_span = CharSpan{b, tokens.back().end};
    }
  }
  meta.source_region = IndexRange{region_begin, tokens.size()};
  {
    const std::size_t begin = text.size();
    text += "\n<assistant>";
    tokens.push_back({begin, text.size()});
  }

  for (std::size_t j = 0; j < gen_sizes.size(); ++j) {
    const std::size_t first = meta.gen_tokens.size();
    append_sentence(meta.gen_text, meta.gen_tokens, 'G', 'g', j, gen_sizes[j]);
    out.gen_sentence_tokens.push_back({first, meta.gen_tokens.size()});
  }
  return out;
}

void fill_row(std::span<float> row, const Layout& layout, SentenceId label, double eps,
              double sink_mass, std::optional<std::size_t> sink_col, double image_share,
              PortableRng& rng) {
  const auto& own = layout.sentence_cols[static_cast<std::size_t>(label)];
  std::vector<double> values(row.size(), 0.0);

  const std::size_t focus = rng.below(own.size());
  std::vector<double> w(own.size());
  for (std::size_t i = 0; i < own.size(); ++i) w[i] = i == focus ? 2.0 : rng.uniform(0.5, 1.0);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const double own_mass = 1.0 - eps - sink_mass;
  for (std::size_t i = 0; i < own.size(); ++i) values[own[i]] = own_mass * w[i] / wsum;

  if (sink_col) values[*sink_col] += sink_mass;

  if (eps > 0.0) {
    std::vector<char> excluded(row.size(), 0);
    for (auto c : own) excluded[c] = 1;
    if (sink_col) excluded[*sink_col] = 1;
    std::vector<std::size_t> others;
    std::vector<double> u;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (excluded[c]) continue;
      others.push_back(c);
      u.push_back(rng.uniform(0.0, 1.0) + 1e-6);
    }
    const double usum = std::accumulate(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < others.size(); ++i) values[others[i]] += eps * u[i] / usum;
  }

  if (image_share > 0.0 && layout.meta.image_block) {
    const auto ib = *layout.meta.image_block;
    for (auto& v : values) v *= 1.0 - image_share;
    for (std::size_t c = ib.begin; c < ib.end; ++c) {
      values[c] += image_share / static_cast<double>(ib.size());
    }
  }
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = static_cast<float>(values[c]);
}

void check_spec(const PlantSpec& spec) {
  if (spec.n_src_sentences < 1) infeasible("n_src_sentences", "must be >= 1");
  if (spec.tokens_per_sentence < 1) infeasible("tokens_per_sentence", "must be >= 1");
  if (spec.n_gen_sentences < 1) infeasible("n_gen_sentences", "must be >= 1");
  if (spec.tokens_per_gen_sentence < 1) infeasible("tokens_per_gen_sentence", "must be >= 1");
  if (spec.support_map.size() != spec.n_gen_sentences) {
    infeasible("support_map", "needs one entry per summary sentence");
  }
  if (!(spec.noise_eps >= 0.0 && spec.noise_eps < 1.0)) infeasible("noise_eps", "must lie in [0, 1)");
  if (!(spec.margin > 0.0)) infeasible("margin", "must be > 0");
  if (!(spec.sink_mass >= 0.0 && spec.sink_mass + spec.noise_eps < 1.0)) {
    infeasible("sink_mass", "sink_mass + noise_eps must lie in [0, 1)");
  }
  if (spec.sink_sid >= spec.n_src_sentences) infeasible("sink_sid", "not a source sentence");
  if (spec.mode == Mode::kImgRaw && spec.image_tokens < 1) infeasible("image_tokens", "must be >= 1");
  if (spec.mode == Mode::kImgCap && spec.caption_sid >= spec.n_src_sentences) {
    infeasible("caption_sid", "not a source sentence");
  }

  std::size_t holders = 0;
  for (std::size_t j = 0; j < spec.support_map.size(); ++j) {
    const auto& set = spec.support_map[j];
    const std::string where = "support_map[" + std::to_string(j) + "]";
    for (SentenceId s : set.sources) {
      if (s < 0 || static_cast<std::size_t>(s) >= spec.n_src_sentences) {
        infeasible(where, "source id out of range");
      }
      if (spec.mode == Mode::kImgCap && static_cast<std::size_t>(s) == spec.caption_sid) {
        infeasible(where, "cite the caption sentence through image=true");
      }
    }
    if (set.image && spec.mode == Mode::kText) infeasible(where, "IMG in TEXT mode");
    if (spec.mode == Mode::kImgCap ? set.empty() : set.sources.empty()) {
      infeasible(where, "support set must be non-empty");
    }
    holders += set.image ? 1 : 0;
  }
  if (spec.mode == Mode::kImgRaw && holders != 1) {
    infeasible("support_map", "IMG_RAW needs exactly one image holder");
  }
}

}  // namespace

PlantedTrace plant_trace(const PlantSpec& spec, double tau) {
  check_spec(spec);
  const std::vector<std::size_t> src_sizes(spec.n_src_sentences, spec.tokens_per_sentence);
  const std::vector<std::size_t> gen_sizes(spec.n_gen_sentences, spec.tokens_per_gen_sentence);
  const Layout layout = build_layout(spec.mode, src_sizes, gen_sizes, spec.image_tokens,
                                     spec.caption_sid, spec.prompt_tokens);

  PlantedTrace out;
  const std::size_t n = spec.tokens_per_gen_sentence;
  const std::size_t need = required_votes(tau + spec.margin, n);
  PortableRng rng(spec.seed);

  std::vector<SentenceId> labels(layout.meta.gen_tokens.size());
  for (std::size_t j = 0; j < spec.n_gen_sentences; ++j) {
    const auto& support = spec.support_map[j];
    std::vector<SentenceId> targets(support.sources.begin(), support.sources.end());
    if (spec.mode == Mode::kImgCap && support.image) {
      targets.push_back(static_cast<SentenceId>(spec.caption_sid));
    }
    if (need * targets.size() > n) {
      infeasible("support_map[" + std::to_string(j) + "]",
                 "infeasible: ceil((tau + margin) * " + std::to_string(n) + ") * " +
                     std::to_string(targets.size()) + " supports = " +
                     std::to_string(need * targets.size()) + " > " + std::to_string(n) +
                     " tokens");
    }
    std::vector<SentenceId> local;
    for (std::size_t i = 0; i < n; ++i) local.push_back(targets[i % targets.size()]);
    rng.shuffle(local);
    const auto range = layout.gen_sentence_tokens[j];
    std::copy(local.begin(), local.end(), labels.begin() + static_cast<std::ptrdiff_t>(range.begin));

    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t count = n / targets.size() + (i < n % targets.size() ? 1 : 0);
      out.min_support_fraction =
          std::min(out.min_support_fraction, static_cast<double>(count) / static_cast<double>(n));
    }
    CitationSet planted;
    planted.sources = support.sources;
    planted.image = support.image;
    out.planted[j] = planted;
  }

  std::optional<std::size_t> sink_col;
  if (spec.sink_mass > 0.0) sink_col = layout.sentence_cols[spec.sink_sid].front();

  AttentionMatrix attn(layout.meta.gen_tokens.size(), layout.meta.source_tokens.size());
  for (std::size_t j = 0; j < spec.n_gen_sentences; ++j) {
    const bool holder = spec.mode == Mode::kImgRaw && spec.support_map[j].image;
    const double image_share = holder ? (1.0 + spec.noise_eps) / 2.0 : 0.0;
    const auto range = layout.gen_sentence_tokens[j];
    for (std::size_t t = range.begin; t < range.end; ++t) {
      fill_row(attn.row(t), layout, labels[t], spec.noise_eps, spec.sink_mass, sink_col,
               image_share, rng);
    }
  }
  out.trace = Trace{layout.meta, std::move(attn)};
  validate_trace(out.trace.meta, out.trace.attention);
  return out;
}

PlantSpec random_plant_spec(std::uint64_t seed, Mode mode, std::size_t max_support) {
  PortableRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  PlantSpec spec;
  spec.seed = seed;
  spec.mode = mode;
  spec.n_src_sentences = 4 + rng.below(5);
  spec.tokens_per_sentence = 5 + rng.below(3);
  spec.n_gen_sentences = 1 + rng.below(4);
  spec.tokens_per_gen_sentence = 10 + rng.below(11);
  spec.image_tokens = 2 + rng.below(5);
  spec.caption_sid = rng.below(spec.n_src_sentences);
  spec.prompt_tokens = 1 + rng.below(4);

  std::vector<SentenceId> pool;
  for (std::size_t s = 0; s < spec.n_src_sentences; ++s) {
    if (mode == Mode::kImgCap && s == spec.caption_sid) continue;
    pool.push_back(static_cast<SentenceId>(s));
  }
  const std::size_t holder = rng.below(spec.n_gen_sentences);
  for (std::size_t j = 0; j < spec.n_gen_sentences; ++j) {
    rng.shuffle(pool);
    const std::size_t size = 1 + rng.below(std::max<std::size_t>(1, max_support));
    CitationSet set;
    set.sources.insert(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(size, pool.size())));
    if (mode == Mode::kImgRaw) set.image = j == holder;
    if (mode == Mode::kImgCap) set.image = rng.below(2) == 1;
    spec.support_map.push_back(std::move(set));
  }
  return spec;
}

Trace random_trace(std::uint64_t seed) {
  PortableRng rng(seed);
  const Mode mode = static_cast<Mode>(rng.below(3));
  std::vector<std::size_t> src_sizes(1 + rng.below(7));
  for (auto& s : src_sizes) s = 1 + rng.below(6);
  std::vector<std::size_t> gen_sizes(1 + rng.below(5));
  for (auto& g : gen_sizes) g = 1 + rng.below(9);
  const std::size_t image_tokens = 1 + rng.below(5);
  const std::size_t caption_sid = rng.below(src_sizes.size());
  const std::size_t prompt_tokens = rng.below(4);
  Layout layout =
      build_layout(mode, src_sizes, gen_sizes, image_tokens, caption_sid, prompt_tokens);

  AttentionMatrix attn(layout.meta.gen_tokens.size(), layout.meta.source_tokens.size());
  const double tie_rate = rng.uniform(0.0, 0.8);
  for (std::size_t t = 0; t < attn.rows(); ++t) {
    auto row = attn.row(t);
    const bool flat = rng.below(20) == 0;
    for (auto& v : row) {
      if (flat) {
        v = 0.125f;
      } else if (rng.uniform() < tie_rate) {
        v = static_cast<float>(rng.below(5)) * 0.25f;
      } else {
        v = static_cast<float>(rng.uniform());
      }
    }
  }
  return Trace{std::move(layout.meta), std::move(attn)};
}

CitationMap naive_oracle(const Trace& trace, const EngineConfig& cfg) {
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

  // Label every generated token.
  std::vector<SentenceId> labels(meta.gen_tokens.size(), kNoneLabel);
  for (std::size_t t = 0; t < meta.gen_tokens.size(); ++t) {
    const auto row = trace.attention.row(t);
    std::vector<std::pair<float, std::size_t>> ranked;
    for (std::size_t p = 0; p < source.token_sid.size(); ++p) {
      if (source.token_sid[p] >= 0) ranked.emplace_back(row[p], p);
    }
    if (ranked.empty()) continue;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const std::size_t take = cfg.vote == Vote::kMax ? 1 : std::min(cfg.k, ranked.size());
    std::map<SentenceId, std::size_t> count;
    for (std::size_t i = 0; i < take; ++i) ++count[source.token_sid[ranked[i].second]];
    std::size_t best = 0;
    for (const auto& [_, c] : count) best = std::max(best, c);
    for (std::size_t i = 0; i < take; ++i) {
      const SentenceId sid = source.token_sid[ranked[i].second];
      if (count[sid] == best) {
        labels[t] = sid;
        break;
      }
    }
  }

  CitationMap map;
  for (std::size_t j = 0; j < summary.sentences.size(); ++j) {
    std::map<SentenceId, std::size_t> count;
    std::size_t members = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (summary.token_sid[t] == static_cast<SentenceId>(j) && labels[t] >= 0) {
        ++count[labels[t]];
        ++members;
      }
    }
    CitationSet& set = map[j];
    for (const auto& [sid, c] : count) {
      if (static_cast<double>(c) / static_cast<double>(members) >= cfg.tau) set.sources.insert(sid);
    }
  }

  if (cfg.mode == Mode::kImgRaw) {
    const auto ib = *meta.image_block;
    std::vector<double> score(summary.sentences.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < summary.sentences.size(); ++j) {
      double total = 0.0;
      std::size_t members = 0;
      for (std::size_t t = 0; t < labels.size(); ++t) {
        if (summary.token_sid[t] != static_cast<SentenceId>(j)) continue;
        const auto row = trace.attention.row(t);
        double img = 0.0;
        for (std::size_t c = ib.begin; c < ib.end; ++c) img += row[c];
        total += img / static_cast<double>(ib.size());
        ++members;
      }
      if (members > 0) score[j] = total / static_cast<double>(members);
    }
    const auto best = std::max_element(score.begin(), score.end());
    if (std::isfinite(*best)) map[static_cast<std::size_t>(best - score.begin())].image = true;
  } else if (cfg.mode == Mode::kImgCap) {
    const SentenceId cap = *source.caption_sid;
    for (auto& [_, set] : map) {
      if (set.sources.count(cap)) {
        set.sources.erase(cap);
        set.image = true;
      }
    }
  }
  return map;
}

}  // namespace attncite

#include "attncite/chunker.hpp"

#include <algorithm>
#include <array>

#include "attncite/error.hpp"

namespace attncite {

namespace {

constexpr std::array<std::string_view, 8> kAbbreviations = {"Dr",  "Mr",  "Mrs", "vs",
                                                            "e.g", "i.e", "Fig", "No"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_upper_or_digit(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }
bool is_word(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::size_t skip_space(std::string_view text, std::size_t i, std::size_t end) {
  while (i < end && is_space(text[i])) ++i;
  return i;
}

std::size_t trim_back(std::string_view text, std::size_t begin, std::size_t end) {
  while (end > begin && is_space(text[end - 1])) --end;
  return end;
}

// `\w+:` starting exactly at pos.
bool speaker_turn_at(std::string_view text, std::size_t pos, std::size_t end) {
  std::size_t i = pos;
  while (i < end && is_word(text[i])) ++i;
  return i > pos && i < end && text[i] == ':';
}

// Word that ends right before the '.' at dot (exclusive), inside [start, dot).
bool is_abbreviation(std::string_view text, std::size_t start, std::size_t dot) {
  std::size_t b = dot;
  while (b > start && !is_space(text[b - 1])) --b;
  while (b < dot && (text[b] == '(' || text[b] == '"' || text[b] == '\'')) ++b;
  const auto word = text.substr(b, dot - b);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

std::size_t first_non_space(std::string_view text, CharSpan span) {
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (!is_space(text[i])) return i;
  }
  return span.end;
}

// Index of the sentence whose span contains pos, or -1.
std::ptrdiff_t containing(const std::vector<SentenceSpan>& sentences, std::size_t pos) {
  auto it = std::upper_bound(sentences.begin(), sentences.end(), pos,
                             [](std::size_t p, const SentenceSpan& s) { return p < s.span.begin; });
  if (it == sentences.begin()) return -1;
  --it;
  return it->span.contains(pos) ? it - sentences.begin() : -1;
}

SentenceId sentence_for_token(std::string_view text, CharSpan token,
                              const std::vector<SentenceSpan>& sentences, std::size_t index,
                              const char* field) {
  if (sentences.empty()) {
    throw Error(ErrorKind::kInvalidInput, "no sentences to map token onto",
                std::string(field) + "[" + std::to_string(index) + "]");
  }
  const std::size_t p = first_non_space(text, token);
  if (p < token.end) {
    const auto s = containing(sentences, p);
    if (s < 0) {
      throw Error(ErrorKind::kInvalidInput, "token start_char not covered by any sentence",
                  std::string(field) + "[" + std::to_string(index) + "]");
    }
    return static_cast<SentenceId>(s);
  }
  if (const auto s = containing(sentences, token.begin); s >= 0) return static_cast<SentenceId>(s);
  auto next = std::lower_bound(
      sentences.begin(), sentences.end(), token.begin,
      [](const SentenceSpan& s, std::size_t pos) { return s.span.begin < pos; });
  if (next != sentences.end()) return static_cast<SentenceId>(next - sentences.begin());
  return static_cast<SentenceId>(sentences.size() - 1);
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view text, bool dialogue_mode) {
  return split_sentences(text, CharSpan{0, text.size()}, dialogue_mode);
}

std::vector<SentenceSpan> split_sentences(std::string_view text, CharSpan range,
                                          bool dialogue_mode) {
  std::vector<SentenceSpan> out;
  const std::size_t end = std::min(range.end, text.size());
  auto emit = [&](std::size_t b, std::size_t e) {
    e = trim_back(text, b, e);
    if (e <= b) return;
    out.push_back({static_cast<SentenceId>(out.size()), {b, e}, std::string(text.substr(b, e - b))});
  };

  std::size_t start = skip_space(text, range.begin, end);
  std::size_t i = start;
  while (i < end) {
    const char c = text[i];
    if (dialogue_mode && c == '\n' && speaker_turn_at(text, i + 1, end)) {
      emit(start, i);
      start = skip_space(text, i, end);
      i = start;
      continue;
    }
    if (!is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < end && is_terminal(text[j])) ++j;
    while (j < end && is_closer(text[j])) ++j;
    const bool single_dot = c == '.' && j == i + 1;

    bool boundary = false;
    const std::size_t next = skip_space(text, j, end);
    if (next == end) {
      boundary = true;
    } else if (next > j && is_upper_or_digit(text[next])) {
      boundary = !(single_dot && is_abbreviation(text, start, i));
    }
    if (boundary) {
      emit(start, j);
      start = next;
      i = start;
    } else {
      i = j;
    }
  }
  if (start < end) emit(start, end);
  return out;
}

CharSpan document_span(const TraceMeta& meta) {
  const auto& r = meta.source_region;
  if (r.empty() || r.end > meta.source_tokens.size()) return {0, 0};
  return {meta.source_tokens[r.begin].begin, meta.source_tokens[r.end - 1].end};
}

ChunkedDocument map_tokens_to_sentences(const TraceMeta& meta,
                                        const std::vector<SentenceSpan>& sentences) {
  ChunkedDocument doc;
  doc.sentences = sentences;
  doc.token_sid.assign(meta.source_tokens.size(), kNoneLabel);
  for (std::size_t t = 0; t < meta.source_tokens.size(); ++t) {
    if (meta.image_block && meta.image_block->contains(t)) {
      doc.token_sid[t] = kImgLabel;
    } else if (meta.source_region.contains(t)) {
      doc.token_sid[t] =
          sentence_for_token(meta.source_text, meta.source_tokens[t], sentences, t, "source_tokens");
    }
  }
  return doc;
}

SentenceId locate_caption_sid(const TraceMeta& meta, const std::vector<SentenceSpan>& sentences) {
  if (!meta.caption_span) {
    throw Error(ErrorKind::kModeMismatch, "not an IMG_CAP trace", "caption_span");
  }
  CharSpan cap = *meta.caption_span;
  cap.begin = first_non_space(meta.source_text, cap);
  cap.end = trim_back(meta.source_text, cap.begin, cap.end);
  if (cap.empty()) {
    throw Error(ErrorKind::kInvalidInput, "caption span is blank", "caption_span");
  }
  const auto s = containing(sentences, cap.begin);
  if (s < 0 || cap.end > sentences[static_cast<std::size_t>(s)].span.end) {
    throw Error(ErrorKind::kInvalidInput, "caption span not contained in a single sentence",
                "caption_span");
  }
  return static_cast<SentenceId>(s);
}

ChunkedDocument chunk_source(const TraceMeta& meta, bool dialogue_mode) {
  auto sentences = split_sentences(meta.source_text, document_span(meta), dialogue_mode);
  auto doc = map_tokens_to_sentences(meta, sentences);
  if (meta.caption_span) doc.caption_sid = locate_caption_sid(meta, doc.sentences);
  return doc;
}

ChunkedDocument chunk_summary(const TraceMeta& meta) {
  ChunkedDocument doc;
  doc.sentences = split_sentences(meta.gen_text, false);
  doc.token_sid.resize(meta.gen_tokens.size());
  for (std::size_t t = 0; t < meta.gen_tokens.size(); ++t) {
    doc.token_sid[t] =
        sentence_for_token(meta.gen_text, meta.gen_tokens[t], doc.sentences, t, "gen_tokens");
  }
  return doc;
}

}  // namespace attncite

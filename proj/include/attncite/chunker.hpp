#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/trace.hpp"
#include "attncite/types.hpp"

namespace attncite {

struct SentenceSpan {
  SentenceId sid = 0;
  CharSpan span;
  std::string text;
  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

// Sentence units plus a label for every token position: a sentence id,
// kImgLabel for image-block tokens, kNoneLabel for tokens outside the
// candidate region.
struct ChunkedDocument {
  std::vector<SentenceSpan> sentences;
  std::vector<SentenceId> token_sid;
  std::optional<SentenceId> caption_sid;
};

// Rule-based splitter. A sentence ends after a run of . ! ? when followed
// by whitespace and an uppercase letter or digit, or by end of text.
// A single '.' closing one of Dr Mr Mrs vs e.g i.e Fig No never ends a
// sentence. With dialogue_mode, a newline followed by `\w+:` also starts a
// new unit. Spans exclude surrounding whitespace and cover all other text.
std::vector<SentenceSpan> split_sentences(std::string_view text, bool dialogue_mode = false);

// Same rule restricted to text[range); offsets stay relative to text.
std::vector<SentenceSpan> split_sentences(std::string_view text, CharSpan range,
                                          bool dialogue_mode);

// Character extent of the document inside source_text, from the first to
// the last source_region token.
CharSpan document_span(const TraceMeta& meta);

// Labels every source token position. A token maps to the sentence that
// holds its first non-whitespace character; whitespace-only and zero-width
// tokens map to the sentence containing their start, else the next
// sentence, else the last one.
ChunkedDocument map_tokens_to_sentences(const TraceMeta& meta,
                                        const std::vector<SentenceSpan>& sentences);

SentenceId locate_caption_sid(const TraceMeta& meta, const std::vector<SentenceSpan>& sentences);

// Source side: split the document region and map tokens. Fills
// caption_sid when the trace carries a caption span.
ChunkedDocument chunk_source(const TraceMeta& meta, bool dialogue_mode = false);

// Summary side: split gen_text and map generated tokens to summary
// sentence ids. Every generated token receives a sentence id.
ChunkedDocument chunk_summary(const TraceMeta& meta);

}  // namespace attncite

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace attncite {

enum class Mode { kText, kImgRaw, kImgCap };
enum class Vote { kMajority, kMax };

// Canonical names used in meta.json ("TEXT", "IMG_RAW", "IMG_CAP").
std::string_view mode_name(Mode mode);
std::optional<Mode> parse_mode_name(std::string_view name);
// CLI spelling ("text", "img-raw", "img-cap").
std::string_view mode_flag(Mode mode);
std::optional<Mode> parse_mode_flag(std::string_view flag);

std::string_view vote_name(Vote vote);
std::optional<Vote> parse_vote_name(std::string_view name);

// Half-open [begin, end) byte range into a UTF-8 string.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

// Half-open [begin, end) range of token positions.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(std::size_t idx) const { return idx >= begin && idx < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Per-token label: a sentence id (>= 0) or one of the sentinels below.
using SentenceId = std::int32_t;
inline constexpr SentenceId kImgLabel = -1;
inline constexpr SentenceId kNoneLabel = -2;

}  // namespace attncite

#include "attncite/types.hpp"

namespace attncite {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kText: return "TEXT";
    case Mode::kImgRaw: return "IMG_RAW";
    case Mode::kImgCap: return "IMG_CAP";
  }
  return "TEXT";
}

std::optional<Mode> parse_mode_name(std::string_view name) {
  if (name == "TEXT") return Mode::kText;
  if (name == "IMG_RAW") return Mode::kImgRaw;
  if (name == "IMG_CAP") return Mode::kImgCap;
  return std::nullopt;
}

std::string_view mode_flag(Mode mode) {
  switch (mode) {
    case Mode::kText: return "text";
    case Mode::kImgRaw: return "img-raw";
    case Mode::kImgCap: return "img-cap";
  }
  return "text";
}

std::optional<Mode> parse_mode_flag(std::string_view flag) {
  if (flag == "text") return Mode::kText;
  if (flag == "img-raw") return Mode::kImgRaw;
  if (flag == "img-cap") return Mode::kImgCap;
  return std::nullopt;
}

std::string_view vote_name(Vote vote) {
  return vote == Vote::kMajority ? "majority" : "max";
}

std::optional<Vote> parse_vote_name(std::string_view name) {
  if (name == "majority") return Vote::kMajority;
  if (name == "max") return Vote::kMax;
  return std::nullopt;
}

}  // namespace attncite

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/types.hpp"

namespace attncite {

// Evidence for one summary sentence: source sentence ids and the image.
struct CitationSet {
  std::set<SentenceId> sources;
  bool image = false;

  bool empty() const { return sources.empty() && !image; }
  std::size_t size() const { return sources.size() + (image ? 1 : 0); }
  friend bool operator==(const CitationSet&, const CitationSet&) = default;
};

// Summary sentence index -> citations. Every summary sentence of a sample
// has an entry, possibly empty.
using CitationMap = std::map<std::size_t, CitationSet>;

bool cites_image(const CitationMap& map);
std::size_t image_count(const CitationMap& map);

// One sample in a prediction or reference file.
struct SampleCitations {
  std::string id;
  CitationMap map;
  // Unset means "infer from IMG presence".
  std::optional<bool> multimodal;
  // Source sentence count, used for range validation when known.
  std::optional<std::size_t> n_source_sentences;
  friend bool operator==(const SampleCitations&, const SampleCitations&) = default;
};

// {"sid_map": {"0": [1, 3, "IMG"], ...}} with keys in numeric order, ids
// ascending and "IMG" last. A non-empty id is written first as "id".
std::string citation_record_json(const CitationMap& map, std::string_view id = {});
std::string citation_record_json(const SampleCitations& sample);
SampleCitations parse_citation_record(std::string_view json_line);

// Newline-delimited records, one per sample, in the given order.
std::string citation_records_jsonl(const std::vector<SampleCitations>& samples);
std::vector<SampleCitations> read_citation_records(const std::filesystem::path& path);

}  // namespace attncite

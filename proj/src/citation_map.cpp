#include "attncite/citation_map.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

#include "attncite/error.hpp"
#include "attncite/io.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

bool cites_image(const CitationMap& map) { return image_count(map) > 0; }

std::size_t image_count(const CitationMap& map) {
  std::size_t n = 0;
  for (const auto& [_, set] : map) n += set.image ? 1 : 0;
  return n;
}

namespace {

ordered_json sid_map_json(const CitationMap& map) {
  ordered_json out = ordered_json::object();
  for (const auto& [j, set] : map) {
    ordered_json ids = ordered_json::array();
    for (SentenceId s : set.sources) ids.push_back(s);
    if (set.image) ids.push_back("IMG");
    out[std::to_string(j)] = std::move(ids);
  }
  return out;
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, what, "citation record");
}

}  // namespace

std::string citation_record_json(const CitationMap& map, std::string_view id) {
  ordered_json j;
  if (!id.empty()) j["id"] = std::string(id);
  j["sid_map"] = sid_map_json(map);
  return j.dump();
}

std::string citation_record_json(const SampleCitations& sample) {
  ordered_json j;
  if (!sample.id.empty()) j["id"] = sample.id;
  if (sample.multimodal) j["multimodal"] = *sample.multimodal;
  if (sample.n_source_sentences) j["n_src"] = *sample.n_source_sentences;
  j["sid_map"] = sid_map_json(sample.map);
  return j.dump();
}

SampleCitations parse_citation_record(std::string_view json_line) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_line);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("sid_map") || !j["sid_map"].is_object()) {
    bad("expected object with \"sid_map\"");
  }
  SampleCitations sample;
  if (auto it = j.find("id"); it != j.end()) {
    if (!it->is_string()) bad("\"id\" must be a string");
    sample.id = it->get<std::string>();
  }
  if (auto it = j.find("multimodal"); it != j.end() && it->is_boolean()) {
    sample.multimodal = it->get<bool>();
  }
  if (auto it = j.find("n_src"); it != j.end() && it->is_number_unsigned()) {
    sample.n_source_sentences = it->get<std::size_t>();
  }
  for (const auto& [key, ids] : j["sid_map"].items()) {
    std::size_t idx = 0;
    const auto* first = key.data();
    const auto* last = key.data() + key.size();
    if (auto [p, ec] = std::from_chars(first, last, idx); ec != std::errc() || p != last) {
      bad("sentence key \"" + key + "\" is not a non-negative integer");
    }
    if (!ids.is_array()) bad("citations for sentence " + key + " must be an array");
    CitationSet set;
    for (const auto& v : ids) {
      if (v.is_string() && v.get<std::string>() == "IMG") {
        set.image = true;
      } else if (v.is_number_integer() && v.get<long long>() >= 0) {
        set.sources.insert(static_cast<SentenceId>(v.get<long long>()));
      } else {
        bad("invalid citation id in sentence " + key);
      }
    }
    sample.map[idx] = std::move(set);
  }
  return sample;
}

std::string citation_records_jsonl(const std::vector<SampleCitations>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += citation_record_json(s);
    out += '\n';
  }
  return out;
}

std::vector<SampleCitations> read_citation_records(const std::filesystem::path& path) {
  std::vector<SampleCitations> out;
  for (const auto& line : io::read_lines(path)) out.push_back(parse_citation_record(line));
  return out;
}

}  // namespace attncite

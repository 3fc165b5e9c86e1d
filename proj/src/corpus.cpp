#include "attncite/corpus.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "attncite/baselines.hpp"
#include "attncite/chunker.hpp"
#include "attncite/error.hpp"
#include "attncite/io.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string_view ltrim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  return b == std::string_view::npos ? std::string_view{} : s.substr(b);
}

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) !=
        std::toupper(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// Position just after "header:" if the line opens with it, else npos.
std::size_t header_end(std::string_view line, std::string_view header) {
  line = ltrim(line);
  if (!iequals_prefix(line, header)) return std::string_view::npos;
  std::size_t i = header.size();
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != ':') return std::string_view::npos;
  return i + 1;
}

// "WORDS IN CAPS:" at the start of the line.
bool is_caps_header(std::string_view line) {
  line = ltrim(line);
  const auto colon = line.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  std::size_t letters = 0;
  for (char c : line.substr(0, colon)) {
    if (c >= 'A' && c <= 'Z') {
      ++letters;
    } else if (!(c == ' ' || c == '/' || c == '&' || c == '-' || c == '(' || c == ')' ||
                 c == '_' || (c >= '0' && c <= '9'))) {
      return false;
    }
  }
  return letters >= 2 && line[0] >= 'A' && line[0] <= 'Z';
}

std::string collapse_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string patient_for(const std::filesystem::path& file, const std::filesystem::path& root) {
  for (auto dir = file.parent_path(); !dir.empty() && dir != root.parent_path();
       dir = dir.parent_path()) {
    const auto name = dir.filename().string();
    if (name.size() > 1 && name[0] == 'p' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return name;
    }
    if (dir == root) break;
  }
  return file.parent_path().filename().string();
}

}  // namespace

std::optional<std::string> extract_section(std::string_view text, std::string_view header) {
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto after = header_end(lines[i], header);
    if (after == std::string_view::npos) continue;
    std::string body(ltrim(lines[i]).substr(after));
    for (std::size_t j = i + 1; j < lines.size() && !is_caps_header(lines[j]); ++j) {
      body.push_back('\n');
      body.append(lines[j]);
    }
    auto collapsed = collapse_space(body);
    if (collapsed.empty()) return std::nullopt;
    return collapsed;
  }
  return std::nullopt;
}

FilterResult filter_mimic(const std::vector<RawReport>& reports, const FilterOptions& opts) {
  FilterResult result;
  result.stats.input = reports.size();

  std::map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < reports.size(); ++i) by_patient[reports[i].patient_id].push_back(i);

  for (const auto& [patient, idxs] : by_patient) {
    if (idxs.size() != 1) {
      result.stats.multi_report += idxs.size();
      continue;
    }
    const RawReport& r = reports[idxs.front()];
    auto findings = extract_section(r.text, opts.findings_header);
    auto impression = extract_section(r.text, opts.impression_header);
    if (!findings || !impression) {
      ++result.stats.missing_section;
      continue;
    }
    if (split_sentences(*findings).size() < opts.min_findings ||
        split_sentences(*impression).size() < opts.min_impression) {
      ++result.stats.too_short;
      continue;
    }
    result.kept.push_back({patient, std::move(*findings), std::move(*impression), r.source_path});
  }
  result.stats.kept = result.kept.size();
  return result;
}

std::vector<RawReport> read_reports_jsonl(const std::filesystem::path& path) {
  std::vector<RawReport> out;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    try {
      const auto j = ordered_json::parse(line);
      RawReport r;
      r.patient_id = j.at("patient_id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      if (j.contains("path")) r.source_path = j["path"].get<std::string>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, e.what(),
                  path.string() + ":" + std::to_string(line_no));
    }
  }
  return out;
}

std::vector<RawReport> scan_report_dir(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw Error(ErrorKind::kMissingInput, "not a directory", root.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawReport> out;
  for (const auto& f : files) {
    out.push_back({patient_for(f, root), io::read_text(f),
                   std::filesystem::relative(f, root).generic_string()});
  }
  return out;
}

CorpusRecord to_corpus_record(const ReportRecord& report) {
  CorpusRecord c;
  c.id = report.patient_id;
  c.source = report.findings;
  c.summary = report.impression;
  c.patient_id = report.patient_id;
  if (!report.source_path.empty()) c.source_path = report.source_path;
  return c;
}

std::string corpus_record_json(const CorpusRecord& c) {
  ordered_json j;
  j["id"] = c.id;
  j["source"] = c.source;
  if (c.summary) j["summary"] = *c.summary;
  if (c.image) j["image"] = *c.image;
  if (c.references) j["references"] = ordered_json::parse(citation_record_json(*c.references))["sid_map"];
  if (c.patient_id) j["patient_id"] = *c.patient_id;
  if (c.source_path) j["source_path"] = *c.source_path;
  return j.dump();
}

CorpusRecord parse_corpus_record(std::string_view json_line) {
  CorpusRecord c;
  try {
    const auto j = ordered_json::parse(json_line);
    c.id = j.at("id").get<std::string>();
    c.source = j.at("source").get<std::string>();
    if (j.contains("summary")) c.summary = j["summary"].get<std::string>();
    if (j.contains("image")) c.image = j["image"].get<std::string>();
    if (j.contains("references")) {
      ordered_json wrapper;
      wrapper["sid_map"] = j["references"];
      c.references = parse_citation_record(wrapper.dump()).map;
    }
    if (j.contains("patient_id")) c.patient_id = j["patient_id"].get<std::string>();
    if (j.contains("source_path")) c.source_path = j["source_path"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, e.what(), "corpus record");
  }
  return c;
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
  std::vector<CorpusRecord> out;
  for (const auto& line : io::read_lines(path)) out.push_back(parse_corpus_record(line));
  return out;
}

void validate_reference(const SampleCitations& sample, const SampleInfo& info) {
  const auto n_src = sample.n_source_sentences ? sample.n_source_sentences : info.n_source_sentences;
  const auto mm = sample.multimodal ? sample.multimodal : info.multimodal;
  for (const auto& [j, set] : sample.map) {
    const std::string where = "sample " + sample.id + ", sentence " + std::to_string(j);
    if (n_src) {
      for (SentenceId s : set.sources) {
        if (static_cast<std::size_t>(s) >= *n_src) {
          throw Error(ErrorKind::kInvalidInput,
                      "source id " + std::to_string(s) + " out of range (" +
                          std::to_string(*n_src) + " source sentences)",
                      where);
        }
      }
    }
    if (set.image && mm && !*mm) {
      throw Error(ErrorKind::kInvalidInput, "IMG cited on a text-only sample", where);
    }
  }
}

std::vector<SampleCitations> parse_reference_annotations(
    const std::filesystem::path& path, const std::map<std::string, SampleInfo>& info) {
  const std::string text = io::read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<SampleCitations> samples;
  if (first != std::string::npos && text[first] == '{') {
    samples = read_citation_records(path);
  } else {
    samples = parse_citation_blocks(text, path.stem().string());
  }
  for (const auto& s : samples) {
    auto it = info.find(s.id);
    validate_reference(s, it == info.end() ? SampleInfo{} : it->second);
  }
  return samples;
}

}  // namespace attncite

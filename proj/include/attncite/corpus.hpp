#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/citation_map.hpp"

namespace attncite {

struct RawReport {
  std::string patient_id;
  std::string text;
  std::string source_path;
};

struct ReportRecord {
  std::string patient_id;
  std::string findings;
  std::string impression;
  std::string source_path;
  friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

struct FilterOptions {
  std::size_t min_findings = 9;
  std::size_t min_impression = 5;
  std::string findings_header = "FINDINGS";
  std::string impression_header = "IMPRESSION";
};

struct FilterStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t multi_report = 0;
  std::size_t missing_section = 0;
  std::size_t too_short = 0;
  friend bool operator==(const FilterStats&, const FilterStats&) = default;
};

struct FilterResult {
  std::vector<ReportRecord> kept;  // sorted by patient_id
  FilterStats stats;
};

// Body of the section introduced by `header:` at the start of a line
// (case-insensitive), up to the next all-caps `HEADER:` line or end of text.
// Whitespace runs collapse to one space. nullopt when absent or empty.
std::optional<std::string> extract_section(std::string_view text, std::string_view header);

// Keeps single-report patients whose report has both sections with at
// least the configured sentence counts.
FilterResult filter_mimic(const std::vector<RawReport>& reports, const FilterOptions& opts = {});

// {"patient_id": ..., "text": ..., "path": ...} per line.
std::vector<RawReport> read_reports_jsonl(const std::filesystem::path& path);
// Every *.txt below root; the patient id is the nearest ancestor
// directory named p<digits>, else the parent directory name.
std::vector<RawReport> scan_report_dir(const std::filesystem::path& root);

// Corpus line: {"id", "source", "summary"?, "image"?, "references"?}.
struct CorpusRecord {
  std::string id;
  std::string source;
  std::optional<std::string> summary;
  std::optional<std::string> image;
  std::optional<CitationMap> references;
  // Extra provenance kept for filtered MIMIC reports.
  std::optional<std::string> patient_id;
  std::optional<std::string> source_path;
  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

CorpusRecord to_corpus_record(const ReportRecord& report);
std::string corpus_record_json(const CorpusRecord& record);
CorpusRecord parse_corpus_record(std::string_view json_line);
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);

struct SampleInfo {
  std::optional<std::size_t> n_source_sentences;
  std::optional<bool> multimodal;
};

// Checks ids against the source sentence count and rejects IMG on a
// text-only sample. Both facts come from the sample itself when present,
// else from `info`.
void validate_reference(const SampleCitations& sample, const SampleInfo& info = {});

// Reference file in either citation-record JSONL or "### id" block form.
// Samples are validated with any metadata found in the file or `info`.
std::vector<SampleCitations> parse_reference_annotations(
    const std::filesystem::path& path, const std::map<std::string, SampleInfo>& info = {});

}  // namespace attncite

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/citation_map.hpp"
#include "attncite/metrics.hpp"
#include "attncite/trace.hpp"
#include "attncite/types.hpp"

namespace attncite {

struct SweepGrid {
  std::vector<std::size_t> k_values;
  std::vector<Vote> vote_modes;
  std::vector<double> tau_values;
};

struct SweepCell {
  std::size_t k = 0;
  Vote vote = Vote::kMajority;
  double tau = 0.0;
  EvalReport report;
};

struct SweepResult {
  SweepGrid grid;
  Mode mode = Mode::kText;
  std::vector<SweepCell> cells;  // sorted by (k, vote name, tau)
};

struct NamedTrace {
  std::string id;
  Trace trace;
};

// "0.10:0.30:0.02" (inclusive, values rounded to 1e-6) or "0.1,0.16".
std::vector<double> parse_tau_values(std::string_view spec);
std::vector<std::size_t> parse_k_values(std::string_view spec);
std::vector<Vote> parse_vote_values(std::string_view spec);

void validate_grid(const SweepGrid& grid);

// `dir` itself when it holds meta.json, else its subdirectories that do,
// sorted by name. Ids are directory names.
std::vector<std::filesystem::path> trace_dirs(const std::filesystem::path& dir);
std::vector<NamedTrace> load_traces(const std::filesystem::path& dir, std::size_t threads = 1);

// Every grid cell scores the attribution of all traces against `refs`.
SweepResult run_sweep(const std::vector<NamedTrace>& traces, const std::vector<SampleCitations>& refs,
                      const SweepGrid& grid, Mode mode, bool dialogue = false,
                      const ScoreOptions& score = {}, std::size_t threads = 1);

std::string sweep_to_json(const SweepResult& result);
SweepResult sweep_from_json(std::string_view text);
// Top-k | Attr mode | Agg. tau | Macro-F1 | Exact Match, scores x100.
std::string format_sweep_table(const SweepResult& result);

}  // namespace attncite

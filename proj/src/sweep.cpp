#include "attncite/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attncite/engine.hpp"
#include "attncite/error.hpp"
#include "attncite/parallel.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto at = s.find(sep, pos);
    out.push_back(s.substr(pos, at == std::string_view::npos ? std::string_view::npos : at - pos));
    if (at == std::string_view::npos) break;
    pos = at + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view s, std::string_view field) {
  s = trim(s);
  // from_chars for double is not available everywhere; strtod on a copy.
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kUsage, "not a number: '" + copy + "'", std::string(field));
  }
  return v;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string vote_label(Vote v) { return v == Vote::kMajority ? "Majority" : "Max"; }

}  // namespace

std::vector<double> parse_tau_values(std::string_view spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw Error(ErrorKind::kUsage, "expected start:stop:step", "tau");
    const double start = parse_double(parts[0], "tau");
    const double stop = parse_double(parts[1], "tau");
    const double step = parse_double(parts[2], "tau");
    if (!(step > 0.0)) throw Error(ErrorKind::kUsage, "step must be > 0", "tau");
    if (stop < start) throw Error(ErrorKind::kUsage, "stop below start", "tau");
    for (std::size_t i = 0;; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v > stop + step * 1e-6) break;
      out.push_back(round6(v));
    }
  } else {
    for (auto part : split(spec, ',')) out.push_back(parse_double(part, "tau"));
  }
  return out;
}

std::vector<std::size_t> parse_k_values(std::string_view spec) {
  std::vector<std::size_t> out;
  for (auto part : split(spec, ',')) {
    part = trim(part);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw Error(ErrorKind::kUsage, "not a count: '" + std::string(part) + "'", "k");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<Vote> parse_vote_values(std::string_view spec) {
  std::vector<Vote> out;
  for (auto part : split(spec, ',')) {
    auto v = parse_vote_name(trim(part));
    if (!v) throw Error(ErrorKind::kUsage, "unknown vote mode '" + std::string(part) + "'", "vote");
    out.push_back(*v);
  }
  return out;
}

void validate_grid(const SweepGrid& grid) {
  if (grid.k_values.empty()) throw Error(ErrorKind::kUsage, "empty axis", "k");
  if (grid.vote_modes.empty()) throw Error(ErrorKind::kUsage, "empty axis", "vote");
  if (grid.tau_values.empty()) throw Error(ErrorKind::kUsage, "empty axis", "tau");
  if (std::set(grid.k_values.begin(), grid.k_values.end()).size() != grid.k_values.size()) {
    throw Error(ErrorKind::kUsage, "duplicate value", "k");
  }
  if (std::set(grid.vote_modes.begin(), grid.vote_modes.end()).size() != grid.vote_modes.size()) {
    throw Error(ErrorKind::kUsage, "duplicate value", "vote");
  }
  if (std::set(grid.tau_values.begin(), grid.tau_values.end()).size() != grid.tau_values.size()) {
    throw Error(ErrorKind::kUsage, "duplicate value", "tau");
  }
  for (auto k : grid.k_values) validate_config(EngineConfig{k, Vote::kMajority, 0.16});
  for (auto t : grid.tau_values) validate_config(EngineConfig{3, Vote::kMajority, t});
}

std::vector<std::filesystem::path> trace_dirs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kMissingInput, "not a directory", dir.string());
  if (fs::exists(dir / "meta.json")) return {dir};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) out.push_back(entry.path());
  }
  if (out.empty()) throw Error(ErrorKind::kMissingInput, "no traces found", dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NamedTrace> load_traces(const std::filesystem::path& dir, std::size_t threads) {
  const auto dirs = trace_dirs(dir);
  std::vector<NamedTrace> out(dirs.size());
  parallel_for(dirs.size(), threads, [&](std::size_t i) {
    out[i] = NamedTrace{dirs[i].filename().string(), load_trace(dirs[i])};
  });
  return out;
}

SweepResult run_sweep(const std::vector<NamedTrace>& traces, const std::vector<SampleCitations>& refs,
                      const SweepGrid& grid, Mode mode, bool dialogue, const ScoreOptions& score,
                      std::size_t threads) {
  validate_grid(grid);
  SweepResult result;
  result.grid = grid;
  result.mode = mode;

  auto ks = grid.k_values;
  std::sort(ks.begin(), ks.end());
  auto votes = grid.vote_modes;
  std::sort(votes.begin(), votes.end(),
            [](Vote a, Vote b) { return vote_name(a) < vote_name(b); });
  auto taus = grid.tau_values;
  std::sort(taus.begin(), taus.end());

  for (auto k : ks) {
    for (auto v : votes) {
      for (auto t : taus) {
        SweepCell cell;
        cell.k = k;
        cell.vote = v;
        cell.tau = t;
        result.cells.push_back(cell);
      }
    }
  }

  const std::size_t n_traces = traces.size();
  std::vector<SampleCitations> preds(result.cells.size() * n_traces);
  parallel_for(preds.size(), threads, [&](std::size_t idx) {
    const auto& cell = result.cells[idx / n_traces];
    const auto& named = traces[idx % n_traces];
    EngineConfig cfg{cell.k, cell.vote, cell.tau, mode, dialogue};
    preds[idx] = SampleCitations{named.id, attribute(named.trace, cfg), std::nullopt, std::nullopt};
  });
  parallel_for(result.cells.size(), threads, [&](std::size_t c) {
    std::vector<SampleCitations> cell_preds(preds.begin() + static_cast<std::ptrdiff_t>(c * n_traces),
                                            preds.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_traces));
    result.cells[c].report = score_citations(cell_preds, refs, score);
  });
  return result;
}

std::string sweep_to_json(const SweepResult& r) {
  ordered_json j;
  j["mode"] = std::string(mode_name(r.mode));
  ordered_json grid;
  grid["k"] = r.grid.k_values;
  grid["vote"] = ordered_json::array();
  for (auto v : r.grid.vote_modes) grid["vote"].push_back(std::string(vote_name(v)));
  grid["tau"] = r.grid.tau_values;
  j["grid"] = grid;
  j["cells"] = ordered_json::array();
  for (const auto& c : r.cells) {
    ordered_json cell;
    cell["k"] = c.k;
    cell["vote"] = std::string(vote_name(c.vote));
    cell["tau"] = c.tau;
    cell["report"] = ordered_json::parse(report_to_json(c.report));
    j["cells"].push_back(cell);
  }
  return j.dump(2) + "\n";
}

SweepResult sweep_from_json(std::string_view text) {
  SweepResult r;
  try {
    const auto j = ordered_json::parse(text);
    auto mode = parse_mode_name(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorKind::kInvalidInput, "unknown mode", "mode");
    r.mode = *mode;
    r.grid.k_values = j.at("grid").at("k").get<std::vector<std::size_t>>();
    for (const auto& v : j.at("grid").at("vote")) {
      auto vote = parse_vote_name(v.get<std::string>());
      if (!vote) throw Error(ErrorKind::kInvalidInput, "unknown vote mode", "grid.vote");
      r.grid.vote_modes.push_back(*vote);
    }
    r.grid.tau_values = j.at("grid").at("tau").get<std::vector<double>>();
    for (const auto& c : j.at("cells")) {
      SweepCell cell;
      cell.k = c.at("k").get<std::size_t>();
      auto vote = parse_vote_name(c.at("vote").get<std::string>());
      if (!vote) throw Error(ErrorKind::kInvalidInput, "unknown vote mode", "cells.vote");
      cell.vote = *vote;
      cell.tau = c.at("tau").get<double>();
      cell.report = report_from_json(c.at("report").dump());
      r.cells.push_back(cell);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, e.what(), "sweep");
  }
  return r;
}

std::string format_sweep_table(const SweepResult& r) {
  std::string out;
  out += fmt::format("{:<6} | {:<9} | {:<8} | {:>8} | {:>11}\n", "Top-k", "Attr mode", "Agg. tau",
                     "Macro-F1", "Exact Match");
  out += fmt::format("{:-<6}-+-{:-<9}-+-{:-<8}-+-{:->8}-+-{:->11}\n", "", "", "", "", "");
  for (const auto& c : r.cells) {
    out += fmt::format("{:<6} | {:<9} | {:<8} | {:>8.2f} | {:>11.2f}\n", c.k, vote_label(c.vote),
                       fmt::format("{}", c.tau), 100.0 * c.report.text_macro_f1,
                       100.0 * c.report.joint_em);
  }
  return out;
}

}  // namespace attncite

#include "attncite/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attncite/baselines.hpp"
#include "attncite/chunker.hpp"
#include "attncite/corpus.hpp"
#include "attncite/engine.hpp"
#include "attncite/io.hpp"
#include "attncite/metrics.hpp"
#include "attncite/parallel.hpp"
#include "attncite/sweep.hpp"
#include "attncite/synth.hpp"
#include "attncite/trace.hpp"

namespace attncite::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kMissingInput: return kExitMissingInput;
    case ErrorKind::kModeMismatch: return kExitModeMismatch;
    case ErrorKind::kInvalidInput: break;
  }
  return kExitFailure;
}

namespace {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kMissingInput: return "missing_input";
    case ErrorKind::kModeMismatch: return "mode_mismatch";
    case ErrorKind::kInvalidInput: break;
  }
  return "invalid_input";
}

void write_error(std::ostream& err, int code, std::string_view kind, const std::string& message,
                 const std::string& field = {}) {
  ordered_json e;
  e["code"] = code;
  e["kind"] = std::string(kind);
  if (!field.empty()) e["field"] = field;
  e["message"] = message;
  ordered_json j;
  j["error"] = e;
  err << j.dump() << "\n";
}

const std::vector<std::string> kModeFlags = {"text", "img-raw", "img-cap"};

Mode mode_of(const std::string& flag) {
  auto m = parse_mode_flag(flag);
  if (!m) throw Error(ErrorKind::kUsage, "unknown mode '" + flag + "'", "mode");
  return *m;
}

Vote vote_of(const std::string& name) {
  auto v = parse_vote_name(name);
  if (!v) throw Error(ErrorKind::kUsage, "unknown vote mode '" + name + "'", "vote");
  return *v;
}

Aggregation aggregation_of(const std::string& name) {
  return name == "pooled" ? Aggregation::kPooledSentence : Aggregation::kMacroSample;
}

// Writes to `path` when given, else to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

std::string json_line(const ordered_json& j) { return j.dump() + "\n"; }

struct Context {
  std::size_t threads_flag = 0;
  std::size_t threads() const {
    return resolve_threads(threads_flag == 0 ? std::nullopt : std::optional(threads_flag));
  }
};

// ---- attribute ----

struct AttributeArgs {
  std::string trace, mode = "text", vote = "majority", out, format = "jsonl";
  std::size_t k = 3;
  double tau = 0.16;
  bool dialogue = false;
};

void do_attribute(const AttributeArgs& a, const Context& ctx, std::ostream& out) {
  EngineConfig cfg{a.k, vote_of(a.vote), a.tau, mode_of(a.mode), a.dialogue};
  validate_config(cfg);
  const auto dirs = trace_dirs(a.trace);
  std::vector<SampleCitations> samples(dirs.size());
  parallel_for(dirs.size(), ctx.threads(), [&](std::size_t i) {
    const Trace trace = load_trace(dirs[i]);
    SampleCitations s;
    s.id = dirs[i].filename().string();
    s.map = attribute(trace, cfg);
    s.multimodal = cfg.mode != Mode::kText;
    s.n_source_sentences = chunk_source(trace.meta, cfg.dialogue).sentences.size();
    samples[i] = std::move(s);
  });
  emit(a.out, a.format == "blocks" ? format_citation_blocks(samples) : citation_records_jsonl(samples),
       out);
}

// ---- baseline-embed ----

struct BaselineArgs {
  std::string emb, out, ref, sweep, aggregation = "macro";
  double threshold = 0.5;
  std::size_t max_sources = 10;
};

std::vector<std::pair<std::string, EmbeddingSet>> load_embedding_inputs(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::kMissingInput, "no *.json embedding files", path.string());
  } else {
    files.push_back(path);
  }
  std::vector<std::pair<std::string, EmbeddingSet>> out;
  for (const auto& f : files) {
    const std::string text = io::read_text(f);
    std::string id = f.stem().string();
    try {
      const auto j = ordered_json::parse(text);
      if (j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, std::string("malformed JSON: ") + e.what(), f.string());
    }
    out.emplace_back(id, embeddings_from_json(text));
  }
  return out;
}

void do_baseline(const BaselineArgs& a, const Context& ctx, std::ostream& out) {
  const auto inputs = load_embedding_inputs(a.emb);
  auto attribute_all = [&](double threshold) {
    BaselineConfig cfg{threshold, a.max_sources};
    std::vector<SampleCitations> samples(inputs.size());
    parallel_for(inputs.size(), ctx.threads(), [&](std::size_t i) {
      const auto& [id, emb] = inputs[i];
      samples[i] = SampleCitations{id, embed_attribute(emb, cfg), emb.img_vec.has_value(),
                                   emb.src_text_vecs.size()};
    });
    return samples;
  };
  if (a.max_sources < 1) throw Error(ErrorKind::kUsage, "must be >= 1", "max-sources");

  if (a.sweep.empty()) {
    emit(a.out, citation_records_jsonl(attribute_all(a.threshold)), out);
    return;
  }
  if (a.ref.empty()) throw Error(ErrorKind::kUsage, "--sweep-threshold needs --ref", "ref");
  const auto refs = parse_reference_annotations(a.ref);
  ScoreOptions opts{aggregation_of(a.aggregation), false};
  ordered_json rows = ordered_json::array();
  std::string table = fmt::format("{:<9} | {:>13} | {:>7} | {:>7} | {:>8}\n", "Threshold",
                                  "Text Macro-F1", "Text EM", "Img Acc", "Joint EM");
  table += fmt::format("{:-<9}-+-{:->13}-+-{:->7}-+-{:->7}-+-{:->8}\n", "", "", "", "", "");
  for (double t : parse_tau_values(a.sweep)) {
    const auto report = score_citations(attribute_all(t), refs, opts);
    ordered_json row;
    row["threshold"] = t;
    row["report"] = ordered_json::parse(report_to_json(report));
    rows.push_back(row);
    table += fmt::format("{:<9} | {:>13.2f} | {:>7.2f} | {:>7} | {:>8.2f}\n", fmt::format("{}", t),
                         100.0 * report.text_macro_f1, 100.0 * report.text_em,
                         report.img_acc ? fmt::format("{:.2f}", 100.0 * *report.img_acc) : "-",
                         100.0 * report.joint_em);
  }
  if (!a.out.empty()) io::write_text(a.out, rows.dump(2) + "\n");
  out << table;
}

// ---- parse-self ----

struct ParseSelfArgs {
  std::string input, id, out;
  std::size_t n_src = 0;
  bool skip_bad = false;
};

void do_parse_self(const ParseSelfArgs& a, std::ostream& out, std::ostream& err) {
  const std::string text = io::read_text(a.input);
  std::vector<std::string> skipped;
  const std::string id = a.id.empty() ? fs::path(a.input).stem().string() : a.id;
  auto samples = parse_citation_blocks(text, id, a.skip_bad ? &skipped : nullptr);
  for (auto& s : samples) {
    if (a.n_src > 0 && !s.n_source_sentences) s.n_source_sentences = a.n_src;
    validate_reference(s);
  }
  for (const auto& line : skipped) {
    ordered_json w;
    w["warning"] = "skipped unparseable line";
    w["line"] = line;
    err << w.dump() << "\n";
  }
  emit(a.out, citation_records_jsonl(samples), out);
}

// ---- eval ----

struct EvalArgs {
  std::string pred, ref, out, aggregation = "macro", pred_summary, ref_summary;
  bool fill_missing = false, json = false;
};

void do_eval(const EvalArgs& a, std::ostream& out) {
  const auto pred = parse_reference_annotations(a.pred);
  const auto ref = parse_reference_annotations(a.ref);
  EvalReport report = score_citations(pred, ref, {aggregation_of(a.aggregation), a.fill_missing});
  if (a.pred_summary.empty() != a.ref_summary.empty()) {
    throw Error(ErrorKind::kUsage, "give both --pred-summary and --ref-summary", "pred-summary");
  }
  if (!a.pred_summary.empty()) {
    const auto r = rouge(io::read_text(a.pred_summary), io::read_text(a.ref_summary));
    report.rouge1_f = r.rouge1_f;
    report.rougeL_f = r.rougeL_f;
  }
  if (!a.out.empty()) io::write_text(a.out, report_to_json(report) + "\n");
  out << (a.json ? report_to_json(report) + "\n" : format_report(report));
}

// ---- sweep ----

struct SweepArgs {
  std::string traces, refs, k = "3", vote = "majority", tau = "0.16", mode = "text", out, table,
                                aggregation = "macro";
  bool dialogue = false;
};

void do_sweep(const SweepArgs& a, const Context& ctx, std::ostream& out) {
  SweepGrid grid{parse_k_values(a.k), parse_vote_values(a.vote), parse_tau_values(a.tau)};
  validate_grid(grid);
  const Mode mode = mode_of(a.mode);
  const auto traces = load_traces(a.traces, ctx.threads());
  const auto refs = parse_reference_annotations(a.refs);
  const auto result = run_sweep(traces, refs, grid, mode, a.dialogue,
                                {aggregation_of(a.aggregation), false}, ctx.threads());
  if (!a.out.empty()) io::write_text(a.out, sweep_to_json(result));
  const std::string table = format_sweep_table(result);
  if (!a.table.empty()) io::write_text(a.table, table);
  out << table;
}

// ---- filter-mimic ----

struct FilterArgs {
  std::string input, out;
  FilterOptions opts;
};

void do_filter(const FilterArgs& a, std::ostream& out) {
  const fs::path in(a.input);
  if (!fs::exists(in)) throw Error(ErrorKind::kMissingInput, "no such file or directory", a.input);
  const auto reports = fs::is_directory(in) ? scan_report_dir(in) : read_reports_jsonl(in);
  const auto result = filter_mimic(reports, a.opts);
  std::string lines;
  for (const auto& r : result.kept) lines += corpus_record_json(to_corpus_record(r)) + "\n";
  ordered_json stats;
  stats["input"] = result.stats.input;
  stats["kept"] = result.stats.kept;
  stats["multi_report"] = result.stats.multi_report;
  stats["missing_section"] = result.stats.missing_section;
  stats["too_short"] = result.stats.too_short;
  if (a.out.empty()) {
    out << lines;
  } else {
    io::write_text(a.out, lines);
    out << json_line(stats);
  }
}

// ---- synth ----

struct SynthArgs {
  std::string out, mode = "text", support;
  std::uint64_t seed = 0;
  std::size_t count = 0, max_support = 2;
  double tau = 0.16;
  PlantSpec spec;
};

std::vector<CitationSet> parse_support(const std::string& text) {
  std::vector<CitationSet> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    CitationSet set;
    std::stringstream items(part);
    std::string item;
    while (std::getline(items, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (item.empty()) continue;
      if (item == "IMG") {
        set.image = true;
        continue;
      }
      try {
        std::size_t used = 0;
        const long v = std::stol(item, &used);
        if (used != item.size() || v < 0) throw std::invalid_argument(item);
        set.sources.insert(static_cast<SentenceId>(v));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kUsage, "bad support id '" + item + "'", "support");
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

void do_synth(SynthArgs a, std::ostream& out) {
  const Mode mode = mode_of(a.mode);
  const fs::path dir(a.out);
  auto write_one = [&](const fs::path& where, const PlantSpec& spec, const std::string& id) {
    const PlantedTrace planted = plant_trace(spec, a.tau);
    save_trace(where, planted.trace);
    SampleCitations s{id, planted.planted, mode != Mode::kText, spec.n_src_sentences};
    return s;
  };

  std::vector<SampleCitations> refs;
  if (a.count == 0) {
    PlantSpec spec = a.spec;
    spec.mode = mode;
    spec.seed = a.seed;
    if (!a.support.empty()) {
      spec.support_map = parse_support(a.support);
      spec.n_gen_sentences = spec.support_map.size();
    }
    if (spec.support_map.empty()) {
      for (std::size_t j = 0; j < spec.n_gen_sentences; ++j) {
        CitationSet set;
        set.sources.insert(static_cast<SentenceId>(j % spec.n_src_sentences));
        if (mode == Mode::kImgRaw && j == 0) set.image = true;
        spec.support_map.push_back(set);
      }
    }
    refs.push_back(write_one(dir, spec, dir.filename().string()));
    io::write_text(dir / "planted.jsonl", citation_records_jsonl(refs));
  } else {
    for (std::size_t i = 0; i < a.count; ++i) {
      PlantSpec spec = random_plant_spec(a.seed + i, mode, a.max_support);
      spec.noise_eps = a.spec.noise_eps;
      spec.margin = a.spec.margin;
      spec.sink_mass = a.spec.sink_mass;
      spec.sink_sid = std::min(a.spec.sink_sid, spec.n_src_sentences - 1);
      const std::string id = fmt::format("sample_{:04d}", i);
      refs.push_back(write_one(dir / id, spec, id));
    }
    io::write_text(dir / "refs.jsonl", citation_records_jsonl(refs));
  }
  ordered_json summary;
  summary["out"] = dir.generic_string();
  summary["samples"] = refs.size();
  out << json_line(summary);
}

// ---- rouge ----

struct RougeArgs {
  std::string pred, ref, out;
};

void do_rouge(const RougeArgs& a, std::ostream& out) {
  const auto r = rouge(io::read_text(a.pred), io::read_text(a.ref));
  ordered_json j;
  j["rouge1_f"] = r.rouge1_f;
  j["rougeL_f"] = r.rougeL_f;
  if (!a.out.empty()) io::write_text(a.out, json_line(j));
  out << fmt::format("{:<14} {:.2f}\n{:<14} {:.2f}\n", "ROUGE-1", 100.0 * r.rouge1_f, "ROUGE-L",
                     100.0 * r.rougeL_f);
}

// ---- report ----

struct ReportArgs {
  std::string input, out;
};

void do_report(const ReportArgs& a, std::ostream& out) {
  const std::string text = io::read_text(a.input);
  bool is_sweep = false;
  try {
    const auto j = ordered_json::parse(text);
    is_sweep = j.is_object() && j.contains("cells");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("malformed JSON: ") + e.what(), a.input);
  }
  emit(a.out, is_sweep ? format_sweep_table(sweep_from_json(text)) : format_report(report_from_json(text)),
       out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-based source attribution toolkit", "attncite"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with [subcommand] sections; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Context ctx;
  app.add_option("--threads", ctx.threads_flag, "Worker threads (default: all cores, capped by ATTN_CITE_THREADS)")
      ->check(CLI::PositiveNumber);

  auto* attribute_cmd = app.add_subcommand("attribute", "Attribute summary sentences of one trace or a directory of traces");
  AttributeArgs attr;
  attribute_cmd->add_option("--trace", attr.trace, "Trace directory")->required();
  attribute_cmd->add_option("--mode", attr.mode)->check(CLI::IsMember(kModeFlags))->capture_default_str();
  attribute_cmd->add_option("--k", attr.k)->capture_default_str();
  attribute_cmd->add_option("--vote", attr.vote)->check(CLI::IsMember({"majority", "max"}))->capture_default_str();
  attribute_cmd->add_option("--tau", attr.tau)->capture_default_str();
  attribute_cmd->add_flag("--dialogue", attr.dialogue, "Treat speaker turns as sentence units");
  attribute_cmd->add_option("--format", attr.format)->check(CLI::IsMember({"jsonl", "blocks"}))->capture_default_str();
  attribute_cmd->add_option("--out", attr.out, "Output file (default: stdout)");

  auto* baseline_cmd = app.add_subcommand("baseline-embed", "Embedding-similarity baseline");
  BaselineArgs base;
  baseline_cmd->add_option("--emb", base.emb, "emb.json file or directory of them")->required();
  baseline_cmd->add_option("--threshold", base.threshold)->capture_default_str();
  baseline_cmd->add_option("--max-sources", base.max_sources)->capture_default_str();
  baseline_cmd->add_option("--sweep-threshold", base.sweep, "start:stop:step or list; needs --ref");
  baseline_cmd->add_option("--ref", base.ref, "Reference annotations for the sweep");
  baseline_cmd->add_option("--aggregation", base.aggregation)->check(CLI::IsMember({"macro", "pooled"}))->capture_default_str();
  baseline_cmd->add_option("--out", base.out);

  auto* parse_cmd = app.add_subcommand("parse-self", "Parse self-attribution output into citation records");
  ParseSelfArgs parse;
  parse_cmd->add_option("--input", parse.input)->required();
  parse_cmd->add_option("--id", parse.id, "Sample id for text outside ### blocks (default: file stem)");
  parse_cmd->add_option("--n-src", parse.n_src, "Source sentence count for range checks");
  parse_cmd->add_flag("--skip-bad", parse.skip_bad, "Warn on unparseable lines instead of failing");
  parse_cmd->add_option("--out", parse.out);

  auto* eval_cmd = app.add_subcommand("eval", "Score predicted citations against references");
  EvalArgs ev;
  eval_cmd->add_option("--pred", ev.pred)->required();
  eval_cmd->add_option("--ref", ev.ref)->required();
  eval_cmd->add_option("--aggregation", ev.aggregation)->check(CLI::IsMember({"macro", "pooled"}))->capture_default_str();
  eval_cmd->add_flag("--fill-missing", ev.fill_missing, "Score absent predicted sentences as empty");
  eval_cmd->add_option("--pred-summary", ev.pred_summary, "Generated summary text, for ROUGE");
  eval_cmd->add_option("--ref-summary", ev.ref_summary, "Reference summary text, for ROUGE");
  eval_cmd->add_flag("--json", ev.json, "Print the JSON record instead of the table");
  eval_cmd->add_option("--out", ev.out, "Write the JSON record here");

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over k, vote mode and tau");
  SweepArgs sw;
  sweep_cmd->add_option("--traces", sw.traces)->required();
  sweep_cmd->add_option("--refs", sw.refs)->required();
  sweep_cmd->add_option("--k", sw.k, "Comma list")->capture_default_str();
  sweep_cmd->add_option("--vote", sw.vote, "Comma list")->capture_default_str();
  sweep_cmd->add_option("--tau", sw.tau, "start:stop:step or comma list")->capture_default_str();
  sweep_cmd->add_option("--mode", sw.mode)->check(CLI::IsMember(kModeFlags))->capture_default_str();
  sweep_cmd->add_flag("--dialogue", sw.dialogue);
  sweep_cmd->add_option("--aggregation", sw.aggregation)->check(CLI::IsMember({"macro", "pooled"}))->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "JSON grid output");
  sweep_cmd->add_option("--table", sw.table, "Also write the text table here");

  auto* filter_cmd = app.add_subcommand("filter-mimic", "Filter radiology reports into a corpus");
  FilterArgs fl;
  filter_cmd->add_option("--input", fl.input, "JSONL of {patient_id, text, path} or a report directory")->required();
  filter_cmd->add_option("--min-findings", fl.opts.min_findings)->capture_default_str();
  filter_cmd->add_option("--min-impression", fl.opts.min_impression)->capture_default_str();
  filter_cmd->add_option("--findings-header", fl.opts.findings_header)->capture_default_str();
  filter_cmd->add_option("--impression-header", fl.opts.impression_header)->capture_default_str();
  filter_cmd->add_option("--out", fl.out, "Corpus JSONL (stats then go to stdout)");

  auto* synth_cmd = app.add_subcommand("synth", "Write planted synthetic traces");
  SynthArgs sy;
  synth_cmd->add_option("--out", sy.out, "Output directory")->required();
  synth_cmd->add_option("--mode", sy.mode)->check(CLI::IsMember(kModeFlags))->capture_default_str();
  synth_cmd->add_option("--seed", sy.seed)->capture_default_str();
  synth_cmd->add_option("--tau", sy.tau, "Threshold the margin is measured from")->capture_default_str();
  synth_cmd->add_option("--count", sy.count, "Write this many random specs as sample_NNNN plus refs.jsonl");
  synth_cmd->add_option("--max-support", sy.max_support, "Random specs: sources per sentence")->capture_default_str();
  synth_cmd->add_option("--support", sy.support, "Per summary sentence, ';'-separated: e.g. \"0,1;2;3,IMG\"");
  synth_cmd->add_option("--n-src", sy.spec.n_src_sentences)->capture_default_str();
  synth_cmd->add_option("--tokens-per-sentence", sy.spec.tokens_per_sentence)->capture_default_str();
  synth_cmd->add_option("--n-gen", sy.spec.n_gen_sentences)->capture_default_str();
  synth_cmd->add_option("--tokens-per-gen", sy.spec.tokens_per_gen_sentence)->capture_default_str();
  synth_cmd->add_option("--noise", sy.spec.noise_eps)->capture_default_str();
  synth_cmd->add_option("--margin", sy.spec.margin)->capture_default_str();
  synth_cmd->add_option("--image-tokens", sy.spec.image_tokens)->capture_default_str();
  synth_cmd->add_option("--caption-sid", sy.spec.caption_sid)->capture_default_str();
  synth_cmd->add_option("--prompt-tokens", sy.spec.prompt_tokens)->capture_default_str();
  synth_cmd->add_option("--sink-mass", sy.spec.sink_mass)->capture_default_str();
  synth_cmd->add_option("--sink-sid", sy.spec.sink_sid)->capture_default_str();

  auto* rouge_cmd = app.add_subcommand("rouge", "ROUGE-1 / ROUGE-L between two text files");
  RougeArgs rg;
  rouge_cmd->add_option("--pred", rg.pred)->required();
  rouge_cmd->add_option("--ref", rg.ref)->required();
  rouge_cmd->add_option("--out", rg.out, "Write the JSON record here");

  auto* report_cmd = app.add_subcommand("report", "Render an eval or sweep JSON file as a table");
  ReportArgs rp;
  report_cmd->add_option("--input", rp.input)->required();
  report_cmd->add_option("--out", rp.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    write_error(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (attribute_cmd->parsed()) do_attribute(attr, ctx, out);
    else if (baseline_cmd->parsed()) do_baseline(base, ctx, out);
    else if (parse_cmd->parsed()) do_parse_self(parse, out, err);
    else if (eval_cmd->parsed()) do_eval(ev, out);
    else if (sweep_cmd->parsed()) do_sweep(sw, ctx, out);
    else if (filter_cmd->parsed()) do_filter(fl, out);
    else if (synth_cmd->parsed()) do_synth(sy, out);
    else if (rouge_cmd->parsed()) do_rouge(rg, out);
    else if (report_cmd->parsed()) do_report(rp, out);
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    write_error(err, code, kind_name(e.kind()), e.what(), e.field());
    return code;
  } catch (const std::exception& e) {
    write_error(err, kExitFailure, "internal", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace attncite::cli

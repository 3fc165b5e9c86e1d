#pragma once

// A workspace exercising every CLI subcommand, and helpers to run the
// commands in-process and capture everything they produce.

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "attncite/baselines.hpp"
#include "attncite/cli.hpp"
#include "attncite/corpus.hpp"
#include "attncite/io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <nlohmann/json.hpp>

namespace clirun {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out, err;
  std::vector<std::pair<std::string, std::string>> files;  // relative name, bytes
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Case {
  std::string name;
  std::vector<std::string> args;
  std::vector<fs::path> outputs;  // files or directories written by the command
  int expect_code = 0;
};

inline Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = attncite::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

inline void collect(const fs::path& p, const fs::path& root, Outcome& o) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> entries;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file()) entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) o.files.emplace_back(fs::relative(e, root).string(), testutil::slurp(e));
  } else {
    o.files.emplace_back(fs::relative(p, root).string(), fs::exists(p) ? testutil::slurp(p) : "<absent>");
  }
}

inline Outcome run_case(const Case& c, const fs::path& root, std::size_t threads) {
  for (const auto& p : c.outputs) fs::remove_all(p);
  std::vector<std::string> args = {"--threads", std::to_string(threads)};
  args.insert(args.end(), c.args.begin(), c.args.end());
  Outcome o = invoke(args);
  for (const auto& p : c.outputs) collect(p, root, o);
  return o;
}

// Builds inputs under `root` and returns one or more cases per subcommand,
// in an order where later cases may read earlier outputs.
inline std::vector<Case> prepare(const fs::path& root) {
  const auto r = [&](const std::string& name) { return (root / name).string(); };

  // Traces and references through the CLI itself.
  invoke({"synth", "--out", r("traces"), "--count", "8", "--mode", "img-raw", "--seed", "40", "--noise",
          "0.1", "--max-support", "2"});

  // Embedding sets and references following the baseline at 0.5.
  fs::create_directories(root / "emb");
  std::mt19937_64 rng(77);
  std::vector<attncite::SampleCitations> emb_refs;
  for (int i = 0; i < 6; ++i) {
    const auto c = oracle::random_embedding_case(rng);
    const std::string id = "e" + std::to_string(i);
    testutil::spit(root / "emb" / (id + ".json"), attncite::embeddings_to_json(c.emb, id));
    emb_refs.push_back({id, oracle::reference_baseline(c.emb, 0.5, 10), c.emb.img_vec.has_value(),
                        c.emb.src_text_vecs.size()});
  }
  // Perturb one reference so the sweep is not trivially perfect.
  emb_refs[0].map[0].sources.insert(0);
  testutil::spit(root / "emb_ref.jsonl", attncite::citation_records_jsonl(emb_refs));

  testutil::spit(root / "self.txt",
                 "Citations:\n[0] [0, 1]\n[1] [2, IMG]\n[2] [oops]\n[3] []\n### s2 n_src=4\n[0] [3]\n");

  std::string reports;
  for (const auto& lab : oracle::labeled_corpus()) {
    nlohmann::ordered_json j;
    j["patient_id"] = lab.report.patient_id;
    j["text"] = lab.report.text;
    j["path"] = lab.report.source_path;
    reports += j.dump() + "\n";
  }
  testutil::spit(root / "reports.jsonl", reports);
  testutil::spit(root / "pred_summary.txt", "No acute cardiopulmonary process. Mild cardiomegaly.");
  testutil::spit(root / "ref_summary.txt", "Mild cardiomegaly without acute cardiopulmonary process.");
  testutil::spit(root / "app.conf", "[attribute]\nk=1\nvote=max\n");

  std::vector<Case> cases = {
      {"synth-single",
       {"synth", "--out", r("one"), "--support", "0;1,2;3", "--n-gen", "3", "--seed", "4", "--noise", "0.1"},
       {root / "one"}},
      {"synth-count", {"synth", "--out", r("many"), "--count", "5", "--mode", "img-cap", "--seed", "9"}, {root / "many"}},
      {"attribute-batch", {"attribute", "--trace", r("traces"), "--mode", "img-raw", "--out", r("pred.jsonl")},
       {root / "pred.jsonl"}},
      {"attribute-blocks", {"attribute", "--trace", r("traces/sample_0001"), "--mode", "img-raw", "--format", "blocks"}, {}},
      {"attribute-config", {"--config", r("app.conf"), "attribute", "--trace", r("traces"), "--mode", "img-raw"}, {}},
      {"attribute-missing", {"attribute", "--trace", r("missing")}, {}, 3},
      {"baseline-embed", {"baseline-embed", "--emb", r("emb")}, {}},
      {"baseline-sweep",
       {"baseline-embed", "--emb", r("emb"), "--sweep-threshold", "0:1:0.25", "--ref", r("emb_ref.jsonl"), "--out",
        r("bsweep.json")},
       {root / "bsweep.json"}},
      {"parse-self", {"parse-self", "--input", r("self.txt"), "--id", "s1", "--skip-bad"}, {}},
      {"eval",
       {"eval", "--pred", r("pred.jsonl"), "--ref", r("traces/refs.jsonl"), "--pred-summary", r("pred_summary.txt"),
        "--ref-summary", r("ref_summary.txt"), "--out", r("eval.json")},
       {root / "eval.json"}},
      {"sweep",
       {"sweep", "--traces", r("traces"), "--refs", r("traces/refs.jsonl"), "--k", "1,3,5", "--vote", "majority,max",
        "--tau", "0.1:0.3:0.1", "--mode", "img-raw", "--out", r("sweep.json"), "--table", r("sweep.txt")},
       {root / "sweep.json", root / "sweep.txt"}},
      {"filter-mimic", {"filter-mimic", "--input", r("reports.jsonl"), "--out", r("corpus.jsonl")}, {root / "corpus.jsonl"}},
      {"rouge", {"rouge", "--pred", r("pred_summary.txt"), "--ref", r("ref_summary.txt"), "--out", r("rouge.json")},
       {root / "rouge.json"}},
      {"report-sweep", {"report", "--input", r("sweep.json")}, {}},
      {"report-eval", {"report", "--input", r("eval.json")}, {}},
  };
  return cases;
}

}  // namespace clirun

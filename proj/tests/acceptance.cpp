// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "attncite/baselines.hpp"
#include "attncite/corpus.hpp"
#include "attncite/engine.hpp"
#include "attncite/metrics.hpp"
#include "attncite/sweep.hpp"
#include "attncite/synth.hpp"
#include "cli_runs.hpp"
#include "oracles.hpp"

using namespace attncite;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<double> kTauGrid = {0.1, 0.16, 0.2, 0.3};

std::vector<EngineConfig> engine_grid(Mode mode) {
  std::vector<EngineConfig> out;
  for (std::size_t k = 1; k <= 5; ++k) {
    for (Vote v : {Vote::kMajority, Vote::kMax}) {
      for (double tau : kTauGrid) out.push_back(EngineConfig{k, v, tau, mode, false});
    }
  }
  return out;
}

Verdict differential_oracle() {
  const auto t0 = Clock::now();
  std::size_t checks = 0, mismatches = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Trace t = random_trace(seed);
    for (const auto& cfg : engine_grid(t.meta.mode)) {
      ++checks;
      if (attribute(t, cfg) != naive_oracle(t, cfg)) {
        if (mismatches++ == 0) first = fmt::format(", first at seed {} k={} tau={}", seed, cfg.k, cfg.tau);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          fmt::format("{} traces x 40 configs, {} mismatches, {:.1f} s{}", 1000, mismatches, secs, first)};
}

bool exact(const CitationMap& got, const CitationMap& want) {
  const auto r = score_citations({{"s", got, {}, {}}}, {{"s", want, {}, {}}});
  return r.text_macro_f1 == 1.0 && r.joint_em == 1.0 && got == want;
}

Verdict planted_recovery() {
  const auto t0 = Clock::now();
  std::size_t noiseless_checked = 0, noiseless_fail = 0;
  std::size_t noisy_ok = 0, noisy_total = 0;
  for (Mode mode : {Mode::kText, Mode::kImgRaw, Mode::kImgCap}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto spec = random_plant_spec(seed, mode, 2);
      spec.noise_eps = 0.0;
      const auto clean = plant_trace(spec, 0.16);
      for (const auto& cfg : engine_grid(mode)) {
        if (cfg.tau > clean.min_support_fraction) continue;
        ++noiseless_checked;
        if (!exact(attribute(clean.trace, cfg), clean.planted)) ++noiseless_fail;
      }
      spec.noise_eps = 0.1;
      spec.margin = 0.1;
      const auto noisy = plant_trace(spec, 0.16);
      ++noisy_total;
      if (exact(attribute(noisy.trace, EngineConfig{3, Vote::kMajority, 0.16, mode, false}), noisy.planted)) {
        ++noisy_ok;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {noiseless_fail == 0 && noiseless_checked > 0 && noisy_ok == noisy_total && secs < 60.0,
          fmt::format("noiseless {}/{} grid points exact; eps=0.1 exact on {}/{} seeds (100 per mode); {:.1f} s",
                      noiseless_checked - noiseless_fail, noiseless_checked, noisy_ok, noisy_total, secs)};
}

Verdict max_collapse() {
  std::vector<NamedTrace> traces;
  std::vector<SampleCitations> refs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto spec = random_plant_spec(seed, Mode::kText, 2);
    spec.noise_eps = 0.1;
    spec.sink_mass = 0.3;
    const auto p = plant_trace(spec, 0.3);
    const std::string id = fmt::format("s{:02}", seed);
    traces.push_back({id, p.trace});
    refs.push_back({id, p.planted, false, spec.n_src_sentences});
  }
  SweepGrid grid{{3, 4, 5}, {Vote::kMajority, Vote::kMax}, parse_tau_values("0.1:0.3:0.02")};
  const auto result = run_sweep(traces, refs, grid, Mode::kText);
  std::size_t cells = 0, wins = 0;
  double min_gap = 1e9;
  for (const auto& maj : result.cells) {
    if (maj.vote != Vote::kMajority) continue;
    for (const auto& mx : result.cells) {
      if (mx.vote != Vote::kMax || mx.k != maj.k || mx.tau != maj.tau) continue;
      ++cells;
      const double gap = maj.report.text_macro_f1 - mx.report.text_macro_f1;
      min_gap = std::min(min_gap, gap);
      if (gap > 0.0) ++wins;
    }
  }
  return {cells > 0 && wins == cells,
          fmt::format("majority > max at {}/{} (k, tau) cells, smallest F1 gap {:.2f} points", wins, cells,
                      100.0 * min_gap)};
}

Verdict threshold_equivalence() {
  std::size_t violations = 0, checks = 0;
  for (std::size_t n = 1; n <= 50; ++n) {
    for (std::size_t p = 0; p <= 100; ++p) {
      const double tau = static_cast<double>(p) / 100.0;
      const std::size_t need = required_votes(tau, n);
      for (std::size_t count = 0; count <= n; ++count) {
        ++checks;
        const bool by_ceil = count >= need;
        const bool by_fraction = 100 * count >= p * n;  // count / n >= p / 100, exactly
        if (by_ceil != by_fraction) ++violations;
        if (count >= 1) {
          // Same decision through sentence aggregation.
          std::vector<SentenceId> labels(n, 1);
          std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(count), 0);
          if (aggregate_sentence(labels, tau).count(0) != (by_fraction ? 1u : 0u)) ++violations;
        }
      }
    }
  }
  return {violations == 0, fmt::format("{} (n, tau, count) triples, {} violations", checks, violations)};
}

Trace scaled(const Trace& t, double c) {
  AttentionMatrix a(t.attention.rows(), t.attention.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto src = t.attention.row(r);
    auto dst = a.row(r);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<float>(static_cast<double>(src[k]) * c);
  }
  return Trace{t.meta, std::move(a)};
}

Verdict scale_invariance() {
  std::size_t checks = 0, mismatches = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Trace t = random_trace(10000 + seed);
    for (double c : {0.1, 3.0, 1000.0}) {
      const Trace s = scaled(t, c);
      for (const auto& cfg : engine_grid(t.meta.mode)) {
        ++checks;
        if (attribute(s, cfg) != attribute(t, cfg)) {
          if (mismatches++ == 0) first = fmt::format(", first at seed {} c={} k={}", 10000 + seed, c, cfg.k);
        }
      }
    }
  }
  return {mismatches == 0, fmt::format("100 traces x 3 scales x 40 configs, {} mismatches{}", mismatches, first)};
}

Verdict metrics_suite() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  const CitationSet s1{{1}, false}, s01{{0, 1}, false}, s12{{1, 2}, false}, s1i{{1}, true};
  const auto id = score_sentence(s1, s1, false);
  expect(id.text_f1 == 1.0 && id.text_em && id.joint_em, "identity");
  const auto half = score_sentence(s01, s12, false);
  expect(half.text_f1 == 0.5 && !half.text_em, "F1 0.5");
  const auto img = score_citations({{"a", {{0, s1i}}, {}, {}}}, {{"a", {{0, s1}}, {}, {}}});
  expect(img.text_macro_f1 == 1.0 && img.text_em == 1.0 && img.img_acc == 0.0 && img.joint_em == 0.0, "IMG rules");
  const auto same = rouge("The cat sat", "the cat sat");
  expect(same.rouge1_f == 1.0 && same.rougeL_f == 1.0, "ROUGE identity");
  const auto r08 = rouge("the cat", "the cat sat");
  expect(std::abs(r08.rouge1_f - 0.8) < 1e-15 && std::abs(r08.rougeL_f - 0.8) < 1e-15, "ROUGE 0.8");
  const auto empty = rouge("", "x");
  expect(empty.rouge1_f == 0.0 && empty.rougeL_f == 0.0, "ROUGE empty");

  const auto seqs = oracle::all_sequences(8, 3);
  std::vector<std::vector<std::uint32_t>> subs;
  std::vector<std::uint8_t> length_of;
  subs.reserve(seqs.size());
  for (const auto& s : seqs) {
    subs.push_back(oracle::subsequence_set(s, 3));
    length_of.push_back(static_cast<std::uint8_t>(s.size()));
  }
  std::size_t pairs = 0, lcs_bad = 0;
  for (std::size_t a = 0; a < seqs.size(); ++a) {
    for (std::size_t b = 0; b < seqs.size(); ++b) {
      ++pairs;
      const std::size_t want = oracle::brute_lcs(subs[a], subs[b], length_of);
      const double n = static_cast<double>(seqs[a].size() + seqs[b].size());
      const double want_f = n == 0 ? 1.0 : 2.0 * static_cast<double>(want) / n;
      const auto got = rouge_ids(seqs[a], seqs[b]);
      if (lcs_length(seqs[a], seqs[b]) != want || std::abs(got.rougeL_f - want_f) > 1e-12) ++lcs_bad;
    }
  }
  if (lcs_bad) failed.push_back(fmt::format("{} LCS mismatches", lcs_bad));
  std::string detail = fmt::format("worked examples + ROUGE-L on all {} ordered pairs of sequences (len <= 8, 3 symbols)",
                                   pairs);
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

Verdict embedding_conformance() {
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0, truncations = 0, with_image = 0, capped = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = oracle::random_embedding_case(rng);
    const auto got = embed_attribute(c.emb, {c.threshold, c.max_sources});
    const auto want = oracle::reference_baseline(c.emb, c.threshold, c.max_sources);
    if (got != want) ++mismatches;
    if (c.emb.img_vec) ++with_image;
    const auto text_only = oracle::reference_baseline(EmbeddingSet{c.emb.src_text_vecs, c.emb.gen_text_vecs, {}, {}},
                                              c.threshold, c.max_sources);
    for (const auto& [j, s] : want) {
      if (text_only.at(j).sources.size() == c.max_sources) ++capped;
      if (s.image && s.sources.size() + 1 == c.max_sources && text_only.at(j).sources.size() == c.max_sources) {
        ++truncations;
      }
    }
  }
  return {mismatches == 0 && truncations > 0,
          fmt::format("200 sets ({} with image), {} mismatches; {} capped sentences, {} max_sources-1 truncations",
                      with_image, mismatches, capped, truncations)};
}

Verdict corpus_filter() {
  const auto corpus = oracle::labeled_corpus();
  std::vector<RawReport> reports;
  std::set<std::string> want;
  FilterStats expect;
  expect.input = corpus.size();
  for (const auto& c : corpus) {
    reports.push_back(c.report);
    using E = oracle::LabeledReport::Expect;
    switch (c.expect) {
      case E::kKept: want.insert(c.report.source_path); ++expect.kept; break;
      case E::kMultiReport: ++expect.multi_report; break;
      case E::kMissingSection: ++expect.missing_section; break;
      case E::kTooShort: ++expect.too_short; break;
    }
  }
  const auto result = filter_mimic(reports);
  std::set<std::string> got;
  for (const auto& r : result.kept) got.insert(r.source_path);
  const auto& s = result.stats;
  const bool balanced = s.kept + s.multi_report + s.missing_section + s.too_short == s.input;
  return {got == want && s == expect && balanced,
          fmt::format("{} reports: kept {}/{} expected, multi {}, missing {}, short {}, balance {}", s.input, s.kept,
                      want.size(), s.multi_report, s.missing_section, s.too_short, balanced ? "ok" : "broken")};
}

Verdict cli_determinism() {
  testutil::TempDir dir;
  const auto cases = clirun::prepare(dir.path());
  std::size_t ok = 0;
  std::string bad;
  for (const auto& c : cases) {
    const auto a = clirun::run_case(c, dir.path(), 1);
    const auto b = clirun::run_case(c, dir.path(), 1);
    const auto p = clirun::run_case(c, dir.path(), 8);
    const auto q = clirun::run_case(c, dir.path(), 8);
    if (a.code == c.expect_code && a == b && a == p && p == q) {
      ++ok;
    } else {
      bad += " " + c.name;
    }
  }
  return {ok == cases.size(),
          fmt::format("{}/{} command cases byte-identical over 2 runs x threads {{1, 8}}{}", ok, cases.size(),
                      bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"differential oracle", differential_oracle},
      {"planted recovery", planted_recovery},
      {"majority beats max", max_collapse},
      {"threshold equivalence", threshold_equivalence},
      {"scale invariance", scale_invariance},
      {"metrics suite", metrics_suite},
      {"embedding baseline conformance", embedding_conformance},
      {"corpus filter", corpus_filter},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    fmt::print("{} {}. {}: {}\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

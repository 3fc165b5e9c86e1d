#include "attncite/metrics.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attncite/error.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

namespace {

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct Totals {
  double f1 = 0.0, em = 0.0, joint = 0.0, img = 0.0;
  std::size_t n = 0, n_img = 0;

  void add(const SentenceScore& s) {
    f1 += s.text_f1;
    em += s.text_em ? 1.0 : 0.0;
    joint += s.joint_em ? 1.0 : 0.0;
    if (s.img_agree) {
      img += *s.img_agree ? 1.0 : 0.0;
      ++n_img;
    }
    ++n;
  }
};

bool is_multimodal(const SampleCitations& pred, const SampleCitations& ref) {
  if (ref.multimodal) return *ref.multimodal;
  if (pred.multimodal) return *pred.multimodal;
  return cites_image(ref.map) || cites_image(pred.map);
}

}  // namespace

SentenceScore score_sentence(const CitationSet& pred, const CitationSet& ref, bool multimodal) {
  SentenceScore s;
  const auto& p = pred.sources;
  const auto& r = ref.sources;
  if (p.empty() && r.empty()) {
    s.text_f1 = 1.0;
  } else if (!p.empty() && !r.empty()) {
    std::size_t common = 0;
    for (SentenceId id : p) common += r.count(id);
    s.text_f1 = f1_of(static_cast<double>(common) / p.size(), static_cast<double>(common) / r.size());
  }
  s.text_em = p == r;
  s.joint_em = pred == ref;
  if (multimodal) s.img_agree = pred.image == ref.image;
  return s;
}

EvalReport score_citations(const std::vector<SampleCitations>& pred,
                           const std::vector<SampleCitations>& ref, const ScoreOptions& opts) {
  std::map<std::string, const SampleCitations*> by_id;
  for (const auto& p : pred) {
    if (!by_id.emplace(p.id, &p).second) {
      throw Error(ErrorKind::kInvalidInput, "duplicate prediction sample", p.id);
    }
  }
  if (pred.size() != ref.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "prediction has " + std::to_string(pred.size()) + " samples, reference " +
                    std::to_string(ref.size()),
                "samples");
  }

  Totals pooled;
  Totals macro;  // sums of per-sample means
  std::size_t macro_img_samples = 0;
  const CitationSet empty;
  for (const auto& r : ref) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw Error(ErrorKind::kInvalidInput, "no prediction for sample", r.id);
    const SampleCitations& p = *it->second;
    for (const auto& [j, _] : p.map) {
      if (!r.map.count(j)) {
        throw Error(ErrorKind::kInvalidInput,
                    "predicted sentence " + std::to_string(j) + " absent from reference",
                    "sample " + r.id);
      }
    }
    const bool mm = is_multimodal(p, r);
    Totals local;
    for (const auto& [j, ref_set] : r.map) {
      auto pj = p.map.find(j);
      if (pj == p.map.end() && !opts.fill_missing) {
        throw Error(ErrorKind::kInvalidInput,
                    "sentence " + std::to_string(j) + " missing from prediction", "sample " + r.id);
      }
      const auto s = score_sentence(pj == p.map.end() ? empty : pj->second, ref_set, mm);
      local.add(s);
      pooled.add(s);
    }
    if (local.n == 0) continue;
    const double n = static_cast<double>(local.n);
    macro.f1 += local.f1 / n;
    macro.em += local.em / n;
    macro.joint += local.joint / n;
    if (local.n_img > 0) {
      macro.img += local.img / static_cast<double>(local.n_img);
      ++macro_img_samples;
    }
    ++macro.n;
  }

  EvalReport report;
  report.n_samples = macro.n;
  report.n_sentences = pooled.n;
  if (opts.aggregation == Aggregation::kMacroSample) {
    if (macro.n > 0) {
      const double n = static_cast<double>(macro.n);
      report.text_macro_f1 = macro.f1 / n;
      report.text_em = macro.em / n;
      report.joint_em = macro.joint / n;
    }
    if (macro_img_samples > 0) report.img_acc = macro.img / static_cast<double>(macro_img_samples);
  } else {
    if (pooled.n > 0) {
      const double n = static_cast<double>(pooled.n);
      report.text_macro_f1 = pooled.f1 / n;
      report.text_em = pooled.em / n;
      report.joint_em = pooled.joint / n;
    }
    if (pooled.n_img > 0) report.img_acc = pooled.img / static_cast<double>(pooled.n_img);
  }
  return report;
}

std::string report_to_json(const EvalReport& r) {
  ordered_json j;
  j["n_samples"] = r.n_samples;
  j["n_sentences"] = r.n_sentences;
  j["text_macro_f1"] = r.text_macro_f1;
  j["text_em"] = r.text_em;
  if (r.img_acc) j["img_acc"] = *r.img_acc;
  j["joint_em"] = r.joint_em;
  if (r.rouge1_f) j["rouge1_f"] = *r.rouge1_f;
  if (r.rougeL_f) j["rougeL_f"] = *r.rougeL_f;
  return j.dump();
}

EvalReport report_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("malformed JSON: ") + e.what(), "report");
  }
  EvalReport r;
  try {
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.n_sentences = j.at("n_sentences").get<std::size_t>();
    r.text_macro_f1 = j.at("text_macro_f1").get<double>();
    r.text_em = j.at("text_em").get<double>();
    r.joint_em = j.at("joint_em").get<double>();
    if (j.contains("img_acc")) r.img_acc = j["img_acc"].get<double>();
    if (j.contains("rouge1_f")) r.rouge1_f = j["rouge1_f"].get<double>();
    if (j.contains("rougeL_f")) r.rougeL_f = j["rougeL_f"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, e.what(), "report");
  }
  return r;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  out += fmt::format("{:<14} {}\n", "Samples", r.n_samples);
  out += fmt::format("{:<14} {}\n", "Sentences", r.n_sentences);
  out += fmt::format("{:<14} {:.2f}\n", "Text Macro-F1", 100.0 * r.text_macro_f1);
  out += fmt::format("{:<14} {:.2f}\n", "Text EM", 100.0 * r.text_em);
  if (r.img_acc) out += fmt::format("{:<14} {:.2f}\n", "Img Acc", 100.0 * *r.img_acc);
  out += fmt::format("{:<14} {:.2f}\n", "Joint EM", 100.0 * r.joint_em);
  if (r.rouge1_f) out += fmt::format("{:<14} {:.2f}\n", "ROUGE-1", 100.0 * *r.rouge1_f);
  if (r.rougeL_f) out += fmt::format("{:<14} {:.2f}\n", "ROUGE-L", 100.0 * *r.rougeL_f);
  return out;
}

std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                       (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (alnum) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t lcs_length(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScores rouge_ids(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> ref) {
  if (pred.empty() && ref.empty()) return {1.0, 1.0};
  if (pred.empty() || ref.empty()) return {0.0, 0.0};

  std::unordered_map<std::uint32_t, std::size_t> ref_counts;
  for (auto t : ref) ++ref_counts[t];
  std::size_t overlap = 0;
  for (auto t : pred) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  const double np = static_cast<double>(pred.size());
  const double nr = static_cast<double>(ref.size());
  RougeScores s;
  s.rouge1_f = f1_of(overlap / np, overlap / nr);
  const double lcs = static_cast<double>(lcs_length(pred, ref));
  s.rougeL_f = f1_of(lcs / np, lcs / nr);
  return s;
}

RougeScores rouge(std::string_view pred, std::string_view ref) {
  std::unordered_map<std::string, std::uint32_t> vocab;
  auto encode = [&](std::string_view text) {
    std::vector<std::uint32_t> ids;
    for (auto& tok : rouge_tokens(text)) {
      auto [it, _] = vocab.emplace(std::move(tok), static_cast<std::uint32_t>(vocab.size()));
      ids.push_back(it->second);
    }
    return ids;
  };
  const auto p = encode(pred);
  const auto r = encode(ref);
  return rouge_ids(p, r);
}

}  // namespace attncite

#include "attncite/baselines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>
#include <sodium.h>

#include "attncite/error.hpp"
#include "attncite/io.hpp"
#include "attncite/trace.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

namespace {

double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

void check_space(const std::vector<Vector>& vecs, std::size_t dim, const std::string& field) {
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const std::string where = field + "[" + std::to_string(i) + "]";
    if (vecs[i].size() != dim) {
      throw Error(ErrorKind::kInvalidInput, "dimensionality mismatch", where);
    }
    const double norm = std::sqrt(dot(vecs[i], vecs[i]));
    if (std::fabs(norm - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorKind::kInvalidInput, "vector is not unit-norm", where);
    }
  }
}

std::string to_base64(const Vector& v) {
  const auto bytes = encode_f32le(v);
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(std::strlen(out.c_str()));
  return out;
}

Vector from_base64(const std::string& b64, std::size_t dim, const std::string& field) {
  std::vector<unsigned char> bytes(b64.size());
  std::size_t len = 0;
  if (sodium_base642bin(bytes.data(), bytes.size(), b64.data(), b64.size(), " \n\r\t", &len,
                        nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw Error(ErrorKind::kInvalidInput, "invalid base64 payload", field);
  }
  if (len != dim * 4) {
    throw Error(ErrorKind::kInvalidInput,
                "payload holds " + std::to_string(len / 4) + " floats, declared " +
                    std::to_string(dim),
                field);
  }
  bytes.resize(len);
  return decode_f32le(bytes);
}

std::vector<Vector> read_vecs(const ordered_json& j, const char* key, std::size_t dim) {
  std::vector<Vector> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(ErrorKind::kInvalidInput, "expected array", key);
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    if (!(*it)[i].is_string()) throw Error(ErrorKind::kInvalidInput, "expected base64 string", where);
    out.push_back(from_base64((*it)[i].get<std::string>(), dim, where));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_index(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && p == last && out >= 0;
}

// "[j] [ids]" -> (j, set). Returns false on malformed input.
bool parse_line(std::string_view line, std::size_t& index, CitationSet& set) {
  line = trim(line);
  if (line.empty() || line.front() != '[') return false;
  const auto close = line.find(']');
  if (close == std::string_view::npos) return false;
  long long j = 0;
  if (!parse_index(line.substr(1, close - 1), j)) return false;
  auto rest = trim(line.substr(close + 1));
  if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') return false;
  rest = trim(rest.substr(1, rest.size() - 2));
  index = static_cast<std::size_t>(j);
  set = {};
  if (rest.empty()) return true;
  while (true) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    long long id = 0;
    if (item == "IMG") {
      set.image = true;
    } else if (parse_index(item, id)) {
      set.sources.insert(static_cast<SentenceId>(id));
    } else {
      return false;
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return true;
}

}  // namespace

void validate_embeddings(const EmbeddingSet& emb) {
  const std::size_t dim = emb.src_text_vecs.empty()
                              ? (emb.gen_text_vecs.empty() ? 0 : emb.gen_text_vecs[0].size())
                              : emb.src_text_vecs[0].size();
  check_space(emb.src_text_vecs, dim, "src_text_vecs");
  check_space(emb.gen_text_vecs, dim, "gen_text_vecs");
  if (emb.img_vec.has_value() != !emb.gen_clip_vecs.empty()) {
    throw Error(ErrorKind::kInvalidInput, "img_vec and gen_clip_vecs must be given together",
                "img_vec");
  }
  if (emb.img_vec) {
    if (emb.gen_clip_vecs.size() != emb.gen_text_vecs.size()) {
      throw Error(ErrorKind::kInvalidInput, "one clip vector per summary sentence required",
                  "gen_clip_vecs");
    }
    const std::size_t clip_dim = emb.img_vec->size();
    check_space(emb.gen_clip_vecs, clip_dim, "gen_clip_vecs");
    check_space({*emb.img_vec}, clip_dim, "img_vec");
  }
}

CitationMap embed_attribute(const EmbeddingSet& emb, const BaselineConfig& cfg) {
  if (cfg.max_sources < 1) throw Error(ErrorKind::kUsage, "must be >= 1", "max_sources");
  validate_embeddings(emb);

  std::optional<std::size_t> img_best;
  if (emb.img_vec) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < emb.gen_clip_vecs.size(); ++i) {
      const double s = dot(emb.gen_clip_vecs[i], *emb.img_vec);
      if (s > best) {
        best = s;
        img_best = i;
      }
    }
  }

  const std::size_t n_src = emb.src_text_vecs.size();
  std::vector<double> sims(n_src);
  std::vector<std::size_t> order(n_src);
  CitationMap map;
  for (std::size_t i = 0; i < emb.gen_text_vecs.size(); ++i) {
    for (std::size_t s = 0; s < n_src; ++s) sims[s] = dot(emb.gen_text_vecs[i], emb.src_text_vecs[s]);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });

    std::vector<SentenceId> chosen;
    for (std::size_t s : order) {
      if (sims[s] >= cfg.threshold_text) chosen.push_back(static_cast<SentenceId>(s));
      if (chosen.size() >= cfg.max_sources) break;
    }
    CitationSet& set = map[i];
    if (img_best && *img_best == i) {
      if (chosen.size() >= cfg.max_sources) chosen.resize(cfg.max_sources - 1);
      set.image = true;
    }
    set.sources.insert(chosen.begin(), chosen.end());
  }
  return map;
}

EmbeddingSet embeddings_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("malformed JSON: ") + e.what(), "emb.json");
  }
  auto dim_of = [&](const char* key) -> std::size_t {
    auto it = j.find(key);
    if (it == j.end()) return 0;
    if (!it->is_number_unsigned()) throw Error(ErrorKind::kInvalidInput, "expected count", key);
    return it->get<std::size_t>();
  };
  const std::size_t dim_text = dim_of("dim_text");
  const std::size_t dim_clip = dim_of("dim_clip");
  if (dim_text == 0) throw Error(ErrorKind::kInvalidInput, "missing or zero", "dim_text");

  EmbeddingSet emb;
  emb.src_text_vecs = read_vecs(j, "src_text_vecs", dim_text);
  emb.gen_text_vecs = read_vecs(j, "gen_text_vecs", dim_text);
  emb.gen_clip_vecs = read_vecs(j, "gen_clip_vecs", dim_clip);
  if (auto it = j.find("img_vec"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorKind::kInvalidInput, "expected base64 string", "img_vec");
    emb.img_vec = from_base64(it->get<std::string>(), dim_clip, "img_vec");
  }
  validate_embeddings(emb);
  return emb;
}

std::string embeddings_to_json(const EmbeddingSet& emb, std::string_view id) {
  ordered_json j;
  if (!id.empty()) j["id"] = std::string(id);
  j["dim_text"] = emb.src_text_vecs.empty()
                      ? (emb.gen_text_vecs.empty() ? 0 : emb.gen_text_vecs[0].size())
                      : emb.src_text_vecs[0].size();
  if (emb.img_vec) j["dim_clip"] = emb.img_vec->size();
  auto encode_all = [](const std::vector<Vector>& vecs) {
    ordered_json arr = ordered_json::array();
    for (const auto& v : vecs) arr.push_back(to_base64(v));
    return arr;
  };
  j["src_text_vecs"] = encode_all(emb.src_text_vecs);
  j["gen_text_vecs"] = encode_all(emb.gen_text_vecs);
  if (emb.img_vec) {
    j["gen_clip_vecs"] = encode_all(emb.gen_clip_vecs);
    j["img_vec"] = to_base64(*emb.img_vec);
  }
  return j.dump(2) + "\n";
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return embeddings_from_json(io::read_text(path));
}

CitationMap parse_self_attribution(std::string_view text, std::vector<std::string>* skipped) {
  CitationMap map;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() != '[') continue;

    std::size_t index = 0;
    CitationSet set;
    if (!parse_line(line, index, set)) {
      const std::string where = "line " + std::to_string(line_no) + ": " + std::string(raw);
      if (skipped) {
        skipped->push_back(where);
        continue;
      }
      throw Error(ErrorKind::kInvalidInput, "unparseable citation line", where);
    }
    CitationSet& dst = map[index];
    dst.sources.insert(set.sources.begin(), set.sources.end());
    dst.image = dst.image || set.image;
  }
  return map;
}

std::string format_self_attribution(const CitationMap& map) {
  std::string out;
  for (const auto& [j, set] : map) {
    out += "[" + std::to_string(j) + "] [";
    bool first = true;
    for (SentenceId s : set.sources) {
      if (!first) out += ", ";
      out += std::to_string(s);
      first = false;
    }
    if (set.image) out += first ? "IMG" : ", IMG";
    out += "]\n";
  }
  return out;
}

std::vector<SampleCitations> parse_citation_blocks(std::string_view text,
                                                   std::string_view default_id,
                                                   std::vector<std::string>* skipped) {
  struct Block {
    SampleCitations sample;
    std::size_t first_line = 1;
    std::string body;
  };
  std::vector<Block> blocks;
  Block current;
  current.sample.id = std::string(default_id);
  bool have_header = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.rfind("###", 0) != 0) {
      current.body.append(raw);
      current.body.push_back('\n');
      continue;
    }
    if (have_header || trim(current.body).size() > 0) blocks.push_back(std::move(current));
    current = Block{};
    current.first_line = line_no + 1;
    have_header = true;

    auto rest = trim(line.substr(3));
    bool first_word = true;
    while (!rest.empty()) {
      const auto sp = rest.find_first_of(" \t");
      const auto word = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : trim(rest.substr(sp));
      if (first_word) {
        current.sample.id = std::string(word);
        first_word = false;
      } else if (word.rfind("n_src=", 0) == 0) {
        long long n = 0;
        if (!parse_index(word.substr(6), n)) {
          throw Error(ErrorKind::kInvalidInput, "bad n_src value",
                      "line " + std::to_string(line_no) + ": " + std::string(raw));
        }
        current.sample.n_source_sentences = static_cast<std::size_t>(n);
      } else if (word == "image=yes" || word == "image=no") {
        current.sample.multimodal = word == "image=yes";
      } else {
        throw Error(ErrorKind::kInvalidInput, "unknown header attribute",
                    "line " + std::to_string(line_no) + ": " + std::string(raw));
      }
    }
    if (first_word) {
      throw Error(ErrorKind::kInvalidInput, "header without sample id",
                  "line " + std::to_string(line_no));
    }
  }
  if (have_header || trim(current.body).size() > 0) blocks.push_back(std::move(current));

  std::vector<SampleCitations> out;
  for (auto& b : blocks) {
    try {
      b.sample.map = parse_self_attribution(b.body, skipped);
    } catch (const Error& e) {
      // Re-anchor line numbers to the whole file.
      const auto& f = e.field();
      std::size_t local = 0;
      std::from_chars(f.data() + 5, f.data() + f.size(), local);
      const auto colon = f.find(':');
      throw Error(ErrorKind::kInvalidInput, "unparseable citation line",
                  "sample " + b.sample.id + ", line " + std::to_string(b.first_line + local - 1) +
                      f.substr(colon));
    }
    out.push_back(std::move(b.sample));
  }
  return out;
}

std::string format_citation_blocks(const std::vector<SampleCitations>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += "### " + s.id;
    if (s.n_source_sentences) out += " n_src=" + std::to_string(*s.n_source_sentences);
    if (s.multimodal) out += *s.multimodal ? " image=yes" : " image=no";
    out += "\n";
    out += format_self_attribution(s.map);
  }
  return out;
}

}  // namespace attncite

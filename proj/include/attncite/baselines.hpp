#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attncite/citation_map.hpp"

namespace attncite {

using Vector = std::vector<float>;

// Precomputed unit-norm sentence and image embeddings for one sample.
struct EmbeddingSet {
  std::vector<Vector> src_text_vecs;
  std::vector<Vector> gen_text_vecs;
  // Shared text-image space; both set or both unset.
  std::vector<Vector> gen_clip_vecs;
  std::optional<Vector> img_vec;
};

struct BaselineConfig {
  double threshold_text = 0.5;
  std::size_t max_sources = 10;
};

inline constexpr double kUnitNormTolerance = 1e-4;

// Dimensions agree within each space and every norm is within 1e-4 of 1.
void validate_embeddings(const EmbeddingSet& emb);

// Similarity-threshold attribution. Per summary sentence the sources are
// ranked by cosine (lower index first on ties) and taken while they pass
// threshold_text, up to max_sources. The sentence closest to the image
// gets IMG, trimming its list to max_sources - 1 when full.
CitationMap embed_attribute(const EmbeddingSet& emb, const BaselineConfig& cfg);

// emb.json: base64 float32 LE vectors, dimensions declared in
// "dim_text" / "dim_clip".
EmbeddingSet embeddings_from_json(std::string_view text);
std::string embeddings_to_json(const EmbeddingSet& emb, std::string_view id = {});
EmbeddingSet load_embeddings(const std::filesystem::path& path);

// Parses "[j] [i1, i2, IMG]" lines. Lines that do not start with '[' are
// ignored; repeated ids collapse. A malformed line throws, naming the line
// number and raw text, unless `skipped` is given, in which case the line is
// recorded there and parsing continues.
CitationMap parse_self_attribution(std::string_view text,
                                   std::vector<std::string>* skipped = nullptr);
std::string format_self_attribution(const CitationMap& map);

// Multi-sample variant: blocks introduced by a header line
//   ### <id> [n_src=<count>] [image=yes|no]
// Text before any header forms a sample named `default_id`.
std::vector<SampleCitations> parse_citation_blocks(std::string_view text,
                                                   std::string_view default_id = "0",
                                                   std::vector<std::string>* skipped = nullptr);
std::string format_citation_blocks(const std::vector<SampleCitations>& samples);

}  // namespace attncite

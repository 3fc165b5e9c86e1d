#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "attncite/citation_map.hpp"
#include "attncite/engine.hpp"
#include "attncite/trace.hpp"

namespace attncite {

// mt19937_64 (sequence fixed by the C++ standard) plus distribution code
// of our own, so a seed yields the same stream on every platform.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n), rejection-sampled.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Synthetic trace layout with known answer.
//
// support_map[j] lists the source sentences summary sentence j draws
// from. image=true marks the image holder (IMG_RAW) or a vote for the
// caption sentence (IMG_CAP).
struct PlantSpec {
  std::size_t n_src_sentences = 6;
  std::size_t tokens_per_sentence = 6;
  std::size_t n_gen_sentences = 3;
  std::size_t tokens_per_gen_sentence = 12;
  std::vector<CitationSet> support_map;
  double noise_eps = 0.0;
  std::uint64_t seed = 0;
  double margin = 0.1;

  Mode mode = Mode::kText;
  std::size_t image_tokens = 4;   // IMG_RAW block width
  std::size_t caption_sid = 0;    // IMG_CAP caption sentence
  std::size_t prompt_tokens = 3;  // template tokens ahead of the document

  // Mass of a single attention spike on the first token of sink_sid,
  // present in every row. Zero disables it.
  double sink_mass = 0.0;
  std::size_t sink_sid = 0;
};

struct PlantedTrace {
  Trace trace;
  CitationMap planted;
  // Smallest planted vote fraction over all (sentence, support) pairs.
  double min_support_fraction = 1.0;
};

// Every planted support gets at least ceil((tau + margin) * n) of the
// sentence's n tokens. A token labeled s puts mass 1 - eps - sink on the
// tokens of sentence s (one random focus token weighted highest), the spike
// on the sink token and eps at random over all other columns. IMG_RAW
// holder tokens additionally move (1 + eps) / 2 of their mass onto the
// image block, which is more than any other sentence's image share.
PlantedTrace plant_trace(const PlantSpec& spec, double tau);

// Random support map: each summary sentence draws 1..max_support distinct
// sources; IMG placement follows the mode.
PlantSpec random_plant_spec(std::uint64_t seed, Mode mode, std::size_t max_support = 2);

// Arbitrary valid trace with random layout and attention, including
// deliberate value ties. Mode is chosen from the seed.
Trace random_trace(std::uint64_t seed);

// Direct reimplementation of attribute(): full sort per token, map-based
// counting, fraction-form threshold. Shares only chunking with the engine.
CitationMap naive_oracle(const Trace& trace, const EngineConfig& cfg);

}  // namespace attncite

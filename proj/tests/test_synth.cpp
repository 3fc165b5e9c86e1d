#include <gtest/gtest.h>

#include "attncite/chunker.hpp"
#include "attncite/engine.hpp"
#include "attncite/error.hpp"
#include "attncite/synth.hpp"

using namespace attncite;

TEST(Rng, StandardEngineSequence) {
  // 10000th output of a default-seeded mt19937_64, fixed by the standard.
  PortableRng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next();
  EXPECT_EQ(rng.next(), 9981545732273789042ULL);
}

TEST(Rng, DistributionsInRange) {
  PortableRng rng(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++hist[rng.below(7)];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  std::vector<int> v{0, 1, 2, 3, 4, 5};
  PortableRng a(3), b(3);
  auto w = v;
  a.shuffle(v);
  b.shuffle(w);
  EXPECT_EQ(v, w);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{0, 1, 2, 3, 4, 5}));
}

TEST(Plant, TextRecoveredAtDefaults) {
  PlantSpec spec;
  spec.support_map = {CitationSet{{0}, false}, CitationSet{{1, 3}, false}, CitationSet{{5}, false}};
  spec.noise_eps = 0.1;
  spec.seed = 7;
  const auto p = plant_trace(spec, 0.16);
  EXPECT_EQ(attribute(p.trace, EngineConfig{}), p.planted);
  EXPECT_GE(p.min_support_fraction, 0.26);
  EXPECT_EQ(p.trace.meta.gen_tokens.size(), 36u);
  EXPECT_EQ(chunk_source(p.trace.meta).sentences.size(), 6u);
  EXPECT_EQ(chunk_summary(p.trace.meta).sentences.size(), 3u);
}

TEST(Plant, ImageModes) {
  PlantSpec raw;
  raw.mode = Mode::kImgRaw;
  raw.support_map = {CitationSet{{0}, false}, CitationSet{{2}, true}};
  raw.n_gen_sentences = 2;
  raw.noise_eps = 0.1;
  const auto pr = plant_trace(raw, 0.16);
  EngineConfig cfg;
  cfg.mode = Mode::kImgRaw;
  EXPECT_EQ(attribute(pr.trace, cfg), pr.planted);

  PlantSpec cap = raw;
  cap.mode = Mode::kImgCap;
  cap.caption_sid = 4;
  cap.support_map = {CitationSet{{0}, true}, CitationSet{{}, true}};
  const auto pc = plant_trace(cap, 0.16);
  cfg.mode = Mode::kImgCap;
  EXPECT_EQ(attribute(pc.trace, cfg), pc.planted);
  EXPECT_EQ(chunk_source(pc.trace.meta).caption_sid, 4);
}

TEST(Plant, Deterministic) {
  const auto a = plant_trace(random_plant_spec(11, Mode::kImgRaw, 2), 0.16);
  const auto b = plant_trace(random_plant_spec(11, Mode::kImgRaw, 2), 0.16);
  EXPECT_EQ(encode_f32le(a.trace.attention.values()), encode_f32le(b.trace.attention.values()));
  EXPECT_EQ(meta_to_json(a.trace.meta), meta_to_json(b.trace.meta));
  EXPECT_NE(encode_f32le(a.trace.attention.values()),
            encode_f32le(plant_trace(random_plant_spec(12, Mode::kImgRaw, 2), 0.16).trace.attention.values()));
}

TEST(Plant, InfeasibleSpecNamesBound) {
  PlantSpec spec;
  spec.n_gen_sentences = 1;
  spec.tokens_per_gen_sentence = 10;
  spec.support_map = {CitationSet{{0, 1, 2, 3}, false}};
  try {
    plant_trace(spec, 0.3);
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ceil((tau + margin) * 10)"), std::string::npos);
    EXPECT_EQ(e.field(), "support_map[0]");
  }
  spec.support_map = {CitationSet{{9}, false}};
  EXPECT_THROW(plant_trace(spec, 0.1), Error);
  spec.support_map = {CitationSet{{0}, true}};
  EXPECT_THROW(plant_trace(spec, 0.1), Error);  // IMG in TEXT mode
  spec.support_map = {};
  EXPECT_THROW(plant_trace(spec, 0.1), Error);
}

TEST(Plant, RandomSpecsRecoveredWithNoise) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    for (Mode mode : {Mode::kText, Mode::kImgRaw, Mode::kImgCap}) {
      auto spec = random_plant_spec(seed, mode, 2);
      spec.noise_eps = 0.1;
      const auto p = plant_trace(spec, 0.16);
      EngineConfig cfg;
      cfg.mode = mode;
      ASSERT_EQ(attribute(p.trace, cfg), p.planted) << "seed " << seed << " mode " << static_cast<int>(mode);
    }
  }
}

TEST(Oracle, AgreesWithEngineOnSample) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const Trace t = random_trace(seed);
    for (int k : {1, 3}) {
      for (Vote v : {Vote::kMajority, Vote::kMax}) {
        EngineConfig cfg;
        cfg.k = k;
        cfg.vote = v;
        cfg.mode = t.meta.mode;
        ASSERT_EQ(attribute(t, cfg), naive_oracle(t, cfg)) << "seed " << seed;
      }
    }
  }
}

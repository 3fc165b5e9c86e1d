#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "attncite/error.hpp"
#include "attncite/io.hpp"
#include "attncite/trace.hpp"
#include "test_util.hpp"

using namespace attncite;
using testutil::TempDir;

namespace {

Trace minimal_trace() {
  Trace t;
  t.meta = testutil::text_meta({"Ab", " cd."}, {"x"});
  t.attention = AttentionMatrix(1, 2, {0.6f, 0.4f});
  return t;
}

template <typename F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected attncite::Error";
  return Error(ErrorKind::kInvalidInput, "none");
}

}  // namespace

TEST(Trace, MinimalTraceLoads) {
  TempDir dir;
  save_trace(dir.path(), minimal_trace());
  const Trace loaded = load_trace(dir.path());
  EXPECT_EQ(loaded.attention.rows(), 1u);
  EXPECT_EQ(loaded.attention.cols(), 2u);
  EXPECT_FLOAT_EQ(loaded.attention.at(0, 0), 0.6f);
  EXPECT_FLOAT_EQ(loaded.attention.at(0, 1), 0.4f);
  EXPECT_EQ(loaded.meta, minimal_trace().meta);
}

TEST(Trace, BinaryLengthMismatch) {
  TempDir dir;
  save_trace(dir.path(), minimal_trace());
  const std::vector<float> three = {0.1f, 0.2f, 0.3f};
  io::write_bytes(dir / "attn.bin", encode_f32le(three));
  const Error e = capture([&] { load_trace(dir.path()); });
  EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  EXPECT_NE(std::string(e.what()).find("binary length mismatch"), std::string::npos);
  EXPECT_EQ(e.field(), "attn.bin");
}

TEST(Trace, MissingFilesAreMissingInput) {
  TempDir dir;
  EXPECT_EQ(capture([&] { load_trace(dir.path()); }).kind(), ErrorKind::kMissingInput);
  save_trace(dir.path(), minimal_trace());
  std::filesystem::remove(dir / "attn.bin");
  EXPECT_EQ(capture([&] { load_trace(dir.path()); }).kind(), ErrorKind::kMissingInput);
}

TEST(Trace, RejectsNaNAndNegative) {
  TempDir dir;
  save_trace(dir.path(), minimal_trace());
  const std::vector<float> nan_row = {0.5f, std::numeric_limits<float>::quiet_NaN()};
  io::write_bytes(dir / "attn.bin", encode_f32le(nan_row));
  Error e = capture([&] { load_trace(dir.path()); });
  EXPECT_NE(std::string(e.what()).find("NaN"), std::string::npos);
  EXPECT_EQ(e.field(), "attn.bin[row 0, col 1]");

  const std::vector<float> neg_row = {-0.5f, 0.1f};
  io::write_bytes(dir / "attn.bin", encode_f32le(neg_row));
  e = capture([&] { load_trace(dir.path()); });
  EXPECT_EQ(e.field(), "attn.bin[row 0, col 0]");

  const std::vector<float> inf_row = {0.5f, std::numeric_limits<float>::infinity()};
  io::write_bytes(dir / "attn.bin", encode_f32le(inf_row));
  EXPECT_THROW(load_trace(dir.path()), Error);
}

TEST(Trace, MalformedSpansNameTheField) {
  TraceMeta m = minimal_trace().meta;
  m.source_tokens = {{0, 3}, {2, 4}};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field().rfind("source_tokens", 0), 0u);

  m = minimal_trace().meta;
  m.gen_tokens = {{0, 5}};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field().rfind("gen_tokens", 0), 0u);

  m = minimal_trace().meta;
  m.source_region = {1, 1};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field(), "source_region");

  m = minimal_trace().meta;
  m.source_region = {0, 3};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field(), "source_region");
}

TEST(Trace, MalformedJsonSpansRejected) {
  TempDir dir;
  save_trace(dir.path(), minimal_trace());
  std::string meta = testutil::slurp(dir / "meta.json");
  const auto at = meta.find("\"source_tokens\"");
  ASSERT_NE(at, std::string::npos);
  meta.insert(meta.find('[', at) + 1, "[5, \"x\"],");
  testutil::spit(dir / "meta.json", meta);
  EXPECT_EQ(capture([&] { load_trace(dir.path()); }).field().rfind("source_tokens", 0), 0u);

  testutil::spit(dir / "meta.json", "{not json");
  EXPECT_EQ(capture([&] { load_trace(dir.path()); }).field(), "meta.json");
}

TEST(Trace, ImageBlockRules) {
  TraceMeta m;
  m.mode = Mode::kImgRaw;
  m.source_text = "Ab cd.";
  m.source_tokens = {{0, 0}, {0, 0}, {0, 2}, {2, 6}};
  m.image_block = IndexRange{0, 2};
  m.gen_text = "x";
  m.gen_tokens = {{0, 1}};
  m.source_region = {0, 4};
  EXPECT_NO_THROW(validate_meta(m));

  auto bad = m;
  bad.image_block = IndexRange{1, 3};  // token 2 has width
  EXPECT_EQ(capture([&] { validate_meta(bad); }).field(), "image_block");

  bad = m;
  bad.image_block.reset();
  EXPECT_EQ(capture([&] { validate_meta(bad); }).field(), "image_block");

  bad = m;
  bad.image_block = IndexRange{3, 9};
  EXPECT_EQ(capture([&] { validate_meta(bad); }).field(), "image_block");
}

TEST(Trace, CaptionSpanPresentIffImgCap) {
  TraceMeta m = minimal_trace().meta;
  m.caption_span = CharSpan{0, 2};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field(), "caption_span");
  m.mode = Mode::kImgCap;
  EXPECT_NO_THROW(validate_meta(m));
  m.caption_span = CharSpan{3, 40};
  EXPECT_EQ(capture([&] { validate_meta(m); }).field(), "caption_span");
  m.caption_span.reset();
  EXPECT_EQ(capture([&] { validate_meta(m); }).field(), "caption_span");
}

TEST(Trace, ShapeMismatchAgainstMeta) {
  Trace t = minimal_trace();
  t.attention = AttentionMatrix(2, 2);
  EXPECT_EQ(capture([&] { validate_trace(t.meta, t.attention); }).field(), "attn.bin");
  t.attention = AttentionMatrix(1, 3);
  EXPECT_EQ(capture([&] { validate_trace(t.meta, t.attention); }).field(), "attn.bin");
}

TEST(Trace, FixtureRoundTripsByteIdentically) {
  for (const char* name : {"mini_text", "mini_img_raw", "mini_img_cap"}) {
    SCOPED_TRACE(name);
    const auto src = testutil::fixture(name);
    const Trace t = load_trace(src);
    TempDir dir;
    save_trace(dir.path(), t);
    EXPECT_EQ(testutil::slurp(dir / "meta.json"), testutil::slurp(src / "meta.json"));
    EXPECT_EQ(testutil::slurp(dir / "attn.bin"), testutil::slurp(src / "attn.bin"));
    const Trace again = load_trace(dir.path());
    EXPECT_EQ(again.meta, t.meta);
    EXPECT_EQ(again.attention, t.attention);
  }
}

TEST(Trace, MiniTextFixtureShape) {
  const Trace t = load_trace(testutil::fixture("mini_text"));
  EXPECT_EQ(t.meta.mode, Mode::kText);
  EXPECT_EQ(t.attention.rows(), t.meta.gen_tokens.size());
  EXPECT_EQ(t.attention.cols(), t.meta.source_tokens.size());
}

TEST(Trace, MetaJsonRoundTrip) {
  TraceMeta m;
  m.mode = Mode::kImgCap;
  m.source_text = "Note: Cough. Image shows a smile.";
  m.source_tokens = {{0, 5}, {5, 12}, {12, 18}, {18, 33}};
  m.caption_span = CharSpan{13, 33};
  m.gen_text = "Smile.";
  m.gen_tokens = {{0, 6}};
  m.source_region = {1, 4};
  m.raw_dims = RawDims{2, 3};
  EXPECT_EQ(meta_from_json(meta_to_json(m)), m);
  EXPECT_EQ(meta_to_json(meta_from_json(meta_to_json(m))), meta_to_json(m));
}

TEST(Trace, RejectsUnknownSchemaVersion) {
  std::string json = meta_to_json(minimal_trace().meta);
  const auto at = json.find("\"schema_version\": 1");
  ASSERT_NE(at, std::string::npos);
  json.replace(at, 19, "\"schema_version\": 7");
  EXPECT_EQ(capture([&] { meta_from_json(json); }).field(), "schema_version");
}

TEST(Trace, Float32LittleEndian) {
  const std::vector<float> v = {1.0f, -2.5f};
  const auto bytes = encode_f32le(v);
  const std::vector<unsigned char> expected = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0};
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(decode_f32le(bytes), v);
}

TEST(Pool, SingleSliceIsIdentity) {
  const RawAttentionTensor raw(2, {1, 1}, 3, {0.1f, 0.2f, 0.7f, 0.3f, 0.3f, 0.4f});
  const AttentionMatrix m = pool_raw(raw);
  EXPECT_EQ(m.values(), raw.values());
}

TEST(Pool, MeanOverLayers) {
  const RawAttentionTensor raw(1, {2, 1}, 2, {1.0f, 0.0f, 0.0f, 1.0f});
  const AttentionMatrix m = pool_raw(raw);
  EXPECT_EQ(m.values(), (std::vector<float>{0.5f, 0.5f}));
}

TEST(Pool, MatchesBruteForceMean) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const std::size_t T = 3, L = 4, H = 5, K = 6;
  std::vector<float> values(T * L * H * K);
  for (auto& v : values) v = u(rng);
  const RawAttentionTensor raw(T, {L, H}, K, values);
  const AttentionMatrix m = pool_raw(raw);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < L * H; ++i) s += values[(t * L * H + i) * K + k];
      EXPECT_NEAR(m.at(t, k), s / (L * H), 1e-6);
    }
  }
}

TEST(Pool, PermutingSlicesIsExact) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const std::size_t T = 4, L = 3, H = 4, K = 7;
  std::vector<float> values(T * L * H * K);
  for (auto& v : values) v = u(rng);
  const AttentionMatrix base = pool_raw(RawAttentionTensor(T, {L, H}, K, values));

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> perm(L * H);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    // Same slices reinterpreted under swapped axis lengths as well.
    const RawDims dims = trial % 2 ? RawDims{H, L} : RawDims{L, H};
    std::vector<float> permuted(values.size());
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < L * H; ++i) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>((t * L * H + perm[i]) * K), K,
                    permuted.begin() + static_cast<std::ptrdiff_t>((t * L * H + i) * K));
      }
    }
    EXPECT_EQ(pool_raw(RawAttentionTensor(T, dims, K, permuted)), base);
  }
}

TEST(Pool, ScalesLinearly) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> values(2 * 2 * 3 * 5);
  for (auto& v : values) v = u(rng);
  const AttentionMatrix base = pool_raw(RawAttentionTensor(2, {2, 3}, 5, values));
  for (float c : {0.5f, 3.0f, 1000.0f}) {
    auto scaled = values;
    for (auto& v : scaled) v *= c;
    const AttentionMatrix m = pool_raw(RawAttentionTensor(2, {2, 3}, 5, scaled));
    for (std::size_t i = 0; i < base.values().size(); ++i) {
      EXPECT_NEAR(m.values()[i], c * base.values()[i], 1e-6 * c);
    }
  }
}

TEST(Pool, RawRoundTripThroughDirectory) {
  TempDir dir;
  Trace t = minimal_trace();
  t.meta.raw_dims = RawDims{2, 2};
  const RawAttentionTensor raw(1, {2, 2}, 2, {0.1f, 0.9f, 0.5f, 0.5f, 0.2f, 0.8f, 0.3f, 0.7f});
  t.attention = pool_raw(raw);
  save_trace(dir.path(), t);
  save_raw(dir.path(), raw);
  const Trace loaded = load_trace(dir.path());
  const RawAttentionTensor back = load_raw(dir.path(), loaded.meta);
  EXPECT_EQ(back.values(), raw.values());
  EXPECT_EQ(pool_raw(back), loaded.attention);
}

TEST(Pool, RejectsZeroLayers) {
  EXPECT_THROW(RawAttentionTensor(1, {0, 1}, 2, {}), Error);
  EXPECT_THROW(RawAttentionTensor(1, {1, 1}, 2, {0.1f}), Error);
}

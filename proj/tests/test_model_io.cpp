#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "lop/model_io.hpp"
#include "lop/projection.hpp"
#include "oracles.hpp"

using namespace lop;
using namespace lop::ebm;

namespace {

Model random_fg_model() {
  Model m;
  m.params = zeros(ModelKind::fgcrbm, Dims{4, 3, 8, 88, 2, 3, 4});
  std::mt19937_64 rng(1);
  oracle::randomize(m.params, 1.0, rng);
  m.layout = score::OrchestraLayout({{"violin", {60, 62, 64}, {60, 62}}, {"flute", {72, 74}, {72, 74}}});
  m.quantization = 8;
  m.horizon = 2;
  m.training_config = {{"model_kind", "fgcrbm"}, {"seed", 3}};
  return m;
}

}  // namespace

TEST(ModelIo, RoundTripIsBitwise) {
  auto m = random_fg_model();
  const auto bytes = serialize_model(m);
  ASSERT_EQ(std::memcmp(bytes.data(), "LOPMODEL", 8), 0);
  auto back = deserialize_model(bytes);
  EXPECT_EQ(back.kind(), ModelKind::fgcrbm);
  EXPECT_EQ(back.layout, m.layout);
  EXPECT_EQ(back.quantization, 8);
  EXPECT_EQ(back.horizon, 2);
  EXPECT_EQ(back.training_config, m.training_config);
  auto a = tensors(m.params), b = tensors(back.params);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    ASSERT_EQ(a[i].size(), b[i].size());
    EXPECT_EQ(std::memcmp(a[i].data, b[i].data, sizeof(double) * static_cast<std::size_t>(a[i].size())), 0);
  }
  EXPECT_EQ(serialize_model(back), bytes);
}

TEST(ModelIo, TruncationNamesMissingSection) {
  const auto bytes = serialize_model(random_fg_model());
  for (std::size_t cut : {std::size_t{10}, std::size_t{30}, bytes.size() / 2, bytes.size() - 3}) {
    try {
      deserialize_model(std::span(bytes.data(), cut));
      FAIL() << "expected failure at " << cut;
    } catch (const ModelFormatError& e) {
      EXPECT_NE(std::string(e.what()).find("truncated model file: missing"), std::string::npos) << e.what();
    }
  }
}

TEST(ModelIo, RejectsWrongMagicAndVersion) {
  auto bytes = serialize_model(random_fg_model());
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_model(bad), ModelFormatError);
  bad = bytes;
  bad[8] = 9;
  try {
    deserialize_model(bad);
    FAIL();
  } catch (const ModelFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(ModelIo, ReloadedModelGeneratesIdentically) {
  const auto m = random_fg_model();
  const auto path = (std::filesystem::temp_directory_path() / "lop_model_io_test.lopm").string();
  save_model(m, path);
  const auto back = load_model(path);
  SamplingConfig cfg;
  cfg.seed = 4;
  std::mt19937_64 rng(2);
  const Context ctx{oracle::random_bits(8, rng), oracle::random_bits(88, rng)};
  EXPECT_EQ(generate_clamped(m.params, ctx, cfg), generate_clamped(back.params, ctx, cfg));
}

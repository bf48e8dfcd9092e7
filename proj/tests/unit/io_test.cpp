#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "confuse/io/delta_io.hpp"
#include "confuse/io/png_io.hpp"
#include "confuse/io/run_config.hpp"
#include "confuse/run/runner.hpp"
#include "support/oracles.hpp"

using namespace confuse;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "confuse_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(DeltaIo, RoundTripIsBitExact) {
  Perturbation delta = uniform_noise(0.75f, 13, 9, 21);
  delta.px.at(0, 0, 0) = -0.0f;
  delta.px.at(1, 2, 3) = 1e-30f;  // subnormal range survives too
  auto path = (temp_dir() / "roundtrip.delta").string();
  save_delta(path, delta.px);
  PixelGrid loaded = load_delta(path);
  ASSERT_TRUE(loaded.same_shape(delta.px));
  EXPECT_EQ(std::memcmp(loaded.data.data(), delta.px.data.data(),
                        loaded.data.size() * sizeof(float)),
            0);
}

TEST(DeltaIo, HeaderIsSixteenBytesLittleEndian) {
  Perturbation delta = Perturbation::zeros(2, 3, 1.0f);
  auto path = (temp_dir() / "header.delta").string();
  save_delta(path, delta.px);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 16u + 3u * 2u * 3u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "DLTA");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);   // version lo
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 3);   // channels lo
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);   // height lo
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 3);  // width lo
}

TEST(DeltaIo, RejectsCorruptFiles) {
  auto dir = temp_dir();
  auto bad_magic = (dir / "bad_magic.delta").string();
  std::ofstream(bad_magic, std::ios::binary) << "NOPE0123456789ab";
  EXPECT_THROW(load_delta(bad_magic), IoError);

  auto truncated = (dir / "truncated.delta").string();
  Perturbation delta = Perturbation::zeros(4, 4, 1.0f);
  save_delta(truncated, delta.px);
  std::filesystem::resize_file(truncated, 20);
  EXPECT_THROW(load_delta(truncated), IoError);
  EXPECT_THROW(load_delta((dir / "missing.delta").string()), IoError);
}

TEST(PngIo, QuantizedImagesRoundTripExactly) {
  Image q = quantize_roundtrip(oracles::random_image(31, 21, 17));
  auto path = (temp_dir() / "exact.png").string();
  write_png(path, q);
  Image back = read_png(path);
  ASSERT_TRUE(back.px.same_shape(q.px));
  EXPECT_EQ(std::memcmp(back.px.data.data(), q.px.data.data(),
                        q.px.size() * sizeof(float)),
            0);
}

TEST(PngIo, FloatImagesRoundTripWithinOneLevel) {
  Image x = oracles::random_image(32, 19, 23);
  auto path = (temp_dir() / "close.png").string();
  write_png(path, x);
  Image back = read_png(path);
  for (std::size_t i = 0; i < x.px.data.size(); ++i) {
    EXPECT_LE(std::fabs(back.px.data[i] - x.px.data[i]), 1.0f / 255.0f);
  }
}

TEST(PngIo, MissingFileAndGarbageAreErrors) {
  EXPECT_THROW(read_png((temp_dir() / "missing.png").string()), IoError);
  auto garbage = (temp_dir() / "garbage.png").string();
  std::ofstream(garbage, std::ios::binary) << "this is not a png";
  EXPECT_THROW(read_png(garbage), IoError);
}

TEST(RunConfig, ParsesTypedKeysAndDefaults) {
  RunConfig cfg = RunConfig::parse_string(
      "# comment\n"
      "image=clean.png\n"
      "models = toy-a, toy-b\n"
      "epsilon=0.01\n"
      "lr=0.05\n"
      "iters=25\n"
      "k=40\n"
      "temperature=0.5\n"
      "seed=9\n"
      "mask=rect:1,2,3,4\n"
      "prompt=Describe this image.\n"
      "init=uniform\n"
      "step=sign\n"
      "quantize=false\n");
  EXPECT_EQ(cfg.image_path, "clean.png");
  EXPECT_EQ(cfg.model_ids, (std::vector<std::string>{"toy-a", "toy-b"}));
  EXPECT_FLOAT_EQ(cfg.attack.epsilon, 0.01f);
  EXPECT_DOUBLE_EQ(cfg.attack.eta, 0.05);
  EXPECT_EQ(cfg.attack.iterations, 25);
  EXPECT_EQ(cfg.attack.objective.k, 40);
  EXPECT_DOUBLE_EQ(cfg.attack.objective.temperature, 0.5);
  EXPECT_EQ(cfg.attack.seed, 9u);
  EXPECT_EQ(cfg.noise_seed(), 9u);  // eval_seed defaults to seed
  EXPECT_EQ(cfg.attack.mask.to_string(), "rect:1,2,3,4");
  EXPECT_EQ(cfg.attack.init, InitRule::Uniform);
  EXPECT_EQ(cfg.attack.step_rule, StepRule::SignGradient);
  EXPECT_FALSE(cfg.quantize);

  RunConfig defaults = RunConfig::parse_string("models=toy-a\n");
  EXPECT_EQ(defaults.attack.prompt, "Describe this image.");
  EXPECT_EQ(defaults.attack.iterations, 50);
  EXPECT_EQ(defaults.attack.objective.k, 50);
  EXPECT_TRUE(defaults.quantize);
}

TEST(RunConfig, RejectsBadInput) {
  EXPECT_THROW(RunConfig::parse_string("unknown_key=1\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse_string("epsilon=abc\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse_string("quantize=maybe\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse_string("just a line\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse_string("init=sometimes\n"), ConfigError);

  ModelRegistry registry;
  register_toy_models(registry);
  RunConfig bad_eps = RunConfig::parse_string("models=toy-a\nepsilon=-1\n");
  EXPECT_THROW(bad_eps.validate(registry), ConfigError);
  RunConfig unknown_model = RunConfig::parse_string("models=toy-zz\n");
  EXPECT_THROW(unknown_model.validate(registry), ConfigError);
  RunConfig half_split = RunConfig::parse_string("models=toy-a\ntrain_models=toy-a,toy-b\n");
  EXPECT_THROW(half_split.validate(registry), ConfigError);
}

TEST(RunConfig, EchoReparsesToTheSameConfiguration) {
  RunConfig cfg = RunConfig::parse_string(
      "image=/tmp/x.png\nmodels=toy-a,toy-b\nepsilon=1\nlr=0.5\nseed=7\n"
      "train_models=toy-a,toy-b\nheldout_model=toy-c\n");
  RunConfig back = RunConfig::parse_string(cfg.echo());
  EXPECT_EQ(back.echo(), cfg.echo());
  EXPECT_EQ(back.model_ids, cfg.model_ids);
  EXPECT_EQ(*back.heldout_model, "toy-c");
}

TEST(LoadCanvas, GeneratorSpecsAndErrors) {
  Image ramp = load_canvas("ramp:32x32");
  EXPECT_NO_THROW(ramp.validate());
  EXPECT_EQ(ramp.height(), 32);
  Image gray = load_canvas("gray:8x16");
  EXPECT_EQ(gray.width(), 16);
  EXPECT_FLOAT_EQ(gray.at(0, 0, 0), 0.5f);
  EXPECT_THROW(load_canvas("ramp:0x4"), ConfigError);
  EXPECT_THROW(load_canvas("ramp:32"), ConfigError);
}

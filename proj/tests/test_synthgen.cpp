#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "trajrl/dataset.hpp"
#include "trajrl/synthgen.hpp"

using namespace trajrl;
namespace fs = std::filesystem;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("generator produces the requested counts with 9 keyframes each") {
  synthgen::SynthConfig cfg;
  cfg.seed = 7;
  cfg.count = 10;
  const auto out = synthgen::generate_corpus(cfg);
  CHECK(out.train.size() == 7);
  CHECK(out.val.size() == 2);
  CHECK(out.test.size() == 1);
  for (const auto* split : {&out.train, &out.val, &out.test})
    for (const auto& t : *split) {
      CHECK(t.keyframes.size() == 9);
      CHECK(!t.dense.empty());
      CHECK(out.crops.contains(t.id));
    }
}

TEST_CASE("explicit per-split counts override the ratio split") {
  synthgen::SynthConfig cfg;
  cfg.seed = 8;
  cfg.n_train = 5;
  cfg.n_val = 3;
  cfg.n_test = 2;
  const auto out = synthgen::generate_corpus(cfg);
  CHECK(out.train.size() == 5);
  CHECK(out.val.size() == 3);
  CHECK(out.test.size() == 2);
}

TEST_CASE("zero curvature and zero noise give near-collinear keyframes") {
  synthgen::SynthConfig cfg;
  cfg.seed = 9;
  cfg.count = 4;
  cfg.curvature = 0.0;
  cfg.noise_px = 0.0;
  const auto out = synthgen::generate_corpus(cfg);
  for (const auto& t : out.train) {
    // Pixel rounding perturbs points by at most half a pixel; check the
    // largest deviation from the chord in pixel units.
    const auto& a = t.keyframes.front().point;
    const auto& b = t.keyframes.back().point;
    const double ax = a.x * (t.width_px - 1), ay = a.y * (t.height_px - 1);
    const double bx = b.x * (t.width_px - 1), by = b.y * (t.height_px - 1);
    const double len = std::hypot(bx - ax, by - ay);
    for (const auto& kf : t.keyframes) {
      const double px = kf.point.x * (t.width_px - 1);
      const double py = kf.point.y * (t.height_px - 1);
      const double cross =
          std::abs((bx - ax) * (py - ay) - (by - ay) * (px - ax));
      CHECK(cross / std::max(1.0, len) <= 1.5);
    }
  }
}

TEST_CASE("same seed regenerates byte-identical corpus files") {
  synthgen::SynthConfig cfg;
  cfg.seed = 10;
  cfg.count = 6;
  const auto a = synthgen::generate_corpus(cfg);
  const auto b = synthgen::generate_corpus(cfg);

  const std::string dir_a = "/tmp/trajrl_synth_a", dir_b = "/tmp/trajrl_synth_b";
  fs::create_directories(dir_a);
  fs::create_directories(dir_b);
  synthgen::write_corpus_files(a, dir_a);
  synthgen::write_corpus_files(b, dir_b);
  for (const char* f :
       {"corpus_train.jsonl", "corpus_val.jsonl", "corpus_test.jsonl",
        "crops.bin"}) {
    CHECK(slurp(dir_a + "/" + f) == slurp(dir_b + "/" + f));
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("coordinates stay inside the frame, keyframe indices increase") {
  synthgen::SynthConfig cfg;
  cfg.seed = 11;
  cfg.count = 12;
  const auto out = synthgen::generate_corpus(cfg);
  for (const auto* split : {&out.train, &out.val, &out.test}) {
    for (const auto& t : *split) {
      for (std::size_t i = 0; i < t.keyframes.size(); ++i) {
        const auto& kf = t.keyframes[i];
        CHECK(kf.point.x > 0.0);
        CHECK(kf.point.x < 1.0);
        CHECK(kf.point.y > 0.0);
        CHECK(kf.point.y < 1.0);
        if (i > 0) CHECK(kf.frame > t.keyframes[i - 1].frame);
      }
      const int span = t.last_frame() - t.first_frame();
      CHECK(span >= cfg.span_min);
    }
  }
}

TEST_CASE("expert step lengths stay within delta_max at default settings") {
  synthgen::SynthConfig cfg;
  cfg.seed = 12;
  cfg.count = 12;
  const auto out = synthgen::generate_corpus(cfg);
  dataset::DatasetConfig dcfg;  // keyframe mode, delta_max default 0.05
  for (const auto& t : out.train) {
    const auto spec = dataset::make_episode_spec(t, dcfg);
    const auto trs = dataset::extract_transitions(t, spec, dcfg);
    for (const auto& tr : trs) CHECK(tr.expert_len <= dcfg.action.delta_max);
  }
}

TEST_CASE("scene groups never straddle splits") {
  synthgen::SynthConfig cfg;
  cfg.seed = 13;
  cfg.count = 20;
  const auto out = synthgen::generate_corpus(cfg);
  std::set<std::string> train_scenes, other_scenes;
  for (const auto& t : out.train) train_scenes.insert(t.scene);
  for (const auto& t : out.val) other_scenes.insert(t.scene);
  for (const auto& t : out.test) other_scenes.insert(t.scene);
  for (const auto& s : train_scenes) CHECK(!other_scenes.count(s));
}

TEST_CASE("crops carry the tip marker (bright center pixel)") {
  synthgen::SynthConfig cfg;
  cfg.seed = 14;
  cfg.count = 4;
  cfg.crop = 32;
  const auto out = synthgen::generate_corpus(cfg);
  const auto& t = out.train.front();
  const auto rgb = out.crops.frame_rgb(t.id, t.first_frame() + 3);
  const int c = cfg.crop / 2;
  const int area = cfg.crop * cfg.crop;
  // The marker color is saturated toward yellow.
  CHECK(rgb[0 * area + c * cfg.crop + c] > 0.9);
  CHECK(rgb[1 * area + c * cfg.crop + c] > 0.8);
  CHECK(rgb[2 * area + c * cfg.crop + c] < 0.4);
}

TEST_CASE("invalid configs are rejected") {
  synthgen::SynthConfig cfg;
  cfg.count = 0;
  CHECK_THROWS_AS(synthgen::generate_corpus(cfg), synthgen::InvalidConfig);
  cfg.count = 2;
  cfg.noise_px = -1;
  CHECK_THROWS_AS(synthgen::generate_corpus(cfg), synthgen::InvalidConfig);
}

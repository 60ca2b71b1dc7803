#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "trajrl/config.hpp"
#include "trajrl/io.hpp"
#include "trajrl/synthgen.hpp"

using namespace trajrl;
namespace fs = std::filesystem;

namespace {
std::string write_tmp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/trajrl_cfg_" + name;
  std::ofstream os(path, std::ios::trunc);
  os << content;
  return path;
}
}  // namespace

TEST_CASE("config file parsing with comments and overrides") {
  const auto path = write_tmp("ok.cfg",
                              "# experiment settings\n"
                              "seed = 123\n"
                              "mode = dense   # per-frame steps\n"
                              "t_obs = 12\n"
                              "gamma = 0.9\n"
                              "bucket_boundaries = 3, 9, 27\n"
                              "clamp_prox_at = -1.0\n"
                              "\n");
  const auto cfg = config::Config::from_file(path);
  CHECK(cfg.seed == 123);
  CHECK(cfg.mode == "dense");
  CHECK(cfg.t_obs == 12);
  CHECK(cfg.gamma == doctest::Approx(0.9));
  CHECK(cfg.bucket_boundaries == std::vector<int>{3, 9, 27});
  REQUIRE(cfg.clamp_prox_at.has_value());
  CHECK(*cfg.clamp_prox_at == doctest::Approx(-1.0));
  std::remove(path.c_str());
}

TEST_CASE("config errors carry line numbers") {
  const auto path = write_tmp("bad_key.cfg", "seed = 1\nnot_a_key = 2\n");
  try {
    config::Config::from_file(path);
    FAIL("expected ConfigError");
  } catch (const config::ConfigError& e) {
    CHECK(e.line == 2);
  }
  std::remove(path.c_str());

  const auto path2 = write_tmp("bad_val.cfg", "gamma = weak\n");
  try {
    config::Config::from_file(path2);
    FAIL("expected ConfigError");
  } catch (const config::ConfigError& e) {
    CHECK(e.line == 1);
  }
  std::remove(path2.c_str());

  const auto path3 = write_tmp("bad_line.cfg", "seed\n");
  CHECK_THROWS_AS(config::Config::from_file(path3), config::ConfigError);
  std::remove(path3.c_str());
}

TEST_CASE("presets set the experiment protocol") {
  config::Config cfg;
  cfg.apply_preset("obs6pred3");
  CHECK(cfg.t_obs == 6);
  CHECK(cfg.t_pred == 3);
  CHECK(cfg.mode == "keyframe");
  cfg.apply_preset("obs3pred6");
  CHECK(cfg.t_obs == 3);
  CHECK(cfg.t_pred == 6);
  CHECK_THROWS_AS(cfg.apply_preset("nope"), config::ConfigError);
}

TEST_CASE("config snapshot re-parses to the same hash") {
  config::Config cfg;
  cfg.seed = 99;
  cfg.t_pred = 5;
  cfg.clamp_prox_at = 0.25;
  const auto path = write_tmp("snapshot.cfg", cfg.to_text());
  const auto reparsed = config::Config::from_file(path);
  CHECK(reparsed.hash() == cfg.hash());
  std::remove(path.c_str());
}

TEST_CASE("corpus files round-trip") {
  synthgen::SynthConfig scfg;
  scfg.seed = 41;
  scfg.count = 4;
  scfg.crop = 16;
  const auto out = synthgen::generate_corpus(scfg);

  const std::string path = "/tmp/trajrl_corpus_roundtrip.jsonl";
  io::write_corpus(path, out.train);
  const auto back = io::read_corpus(path);
  REQUIRE(back.size() == out.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == out.train[i].id);
    CHECK(back[i].scene == out.train[i].scene);
    CHECK(back[i].width_px == out.train[i].width_px);
    REQUIRE(back[i].keyframes.size() == out.train[i].keyframes.size());
    for (std::size_t k = 0; k < back[i].keyframes.size(); ++k) {
      CHECK(back[i].keyframes[k].frame == out.train[i].keyframes[k].frame);
      CHECK(back[i].keyframes[k].point.x ==
            doctest::Approx(out.train[i].keyframes[k].point.x).epsilon(1e-12));
    }
    // reader densifies; spot-check against the generator's dense samples
    REQUIRE(back[i].dense.size() == out.train[i].dense.size());
    CHECK(back[i].dense[3].point.x ==
          doctest::Approx(out.train[i].dense[3].point.x).epsilon(1e-12));
    CHECK(back[i].dense[3].confidence ==
          doctest::Approx(out.train[i].dense[3].confidence));
  }
  std::remove(path.c_str());
}

TEST_CASE("corpus with explicit dense block skips re-densify") {
  synthgen::SynthConfig scfg;
  scfg.seed = 42;
  scfg.count = 2;
  scfg.crop = 16;
  const auto out = synthgen::generate_corpus(scfg);
  const std::string path = "/tmp/trajrl_corpus_dense.jsonl";
  io::write_corpus(path, out.train, /*include_dense=*/true);
  const auto back = io::read_corpus(path);
  REQUIRE(!back.empty());
  CHECK(back[0].dense.size() == out.train[0].dense.size());
  std::remove(path.c_str());
}

TEST_CASE("crop store round-trips bytes") {
  io::CropStore store;
  io::CropStore::Sequence seq;
  seq.first_frame = 7;
  seq.crop = 8;
  seq.data.resize(3 * 8 * 8 * 2);
  for (std::size_t i = 0; i < seq.data.size(); ++i)
    seq.data[i] = static_cast<std::uint8_t>(i * 37 % 251);
  store.add("t0", seq);

  const std::string path = "/tmp/trajrl_crops_roundtrip.bin";
  store.save(path);
  const auto back = io::CropStore::load(path);
  CHECK(back.contains("t0"));
  const auto rgb = back.frame_rgb("t0", 8);
  REQUIRE(rgb.size() == 3 * 8 * 8);
  CHECK(rgb[0] == doctest::Approx(seq.data[3 * 8 * 8] / 255.0));
  CHECK_THROWS_AS(back.frame_rgb("t0", 100), std::out_of_range);
  CHECK_THROWS_AS(back.frame_rgb("missing", 7), std::out_of_range);
  std::remove(path.c_str());
}

TEST_CASE("transition cache round-trips exactly") {
  synthgen::SynthConfig scfg;
  scfg.seed = 43;
  scfg.count = 4;
  scfg.crop = 16;
  const auto out = synthgen::generate_corpus(scfg);
  dataset::DatasetConfig dcfg;
  const auto episodes = dataset::build_episodes(out.train, dcfg);

  const std::string path = "/tmp/trajrl_transitions_roundtrip.jsonl";
  io::write_transition_cache(path, episodes);
  const auto back = io::read_transition_cache(path);
  REQUIRE(back.size() == episodes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == episodes[i].id);
    CHECK(back[i].spec.obs_frames == episodes[i].spec.obs_frames);
    CHECK(back[i].spec.pred_frames == episodes[i].spec.pred_frames);
    REQUIRE(back[i].transitions.size() == episodes[i].transitions.size());
    for (std::size_t k = 0; k < back[i].transitions.size(); ++k) {
      const auto& a = back[i].transitions[k];
      const auto& b = episodes[i].transitions[k];
      CHECK(a.p.x == b.p.x);
      CHECK(a.p_next.y == b.p_next.y);
      CHECK(a.g.x == b.g.x);
      CHECK(a.a_exp == b.a_exp);
      CHECK(a.expert_len == b.expert_len);
      CHECK(a.reward.total == b.reward.total);
      CHECK(a.done == b.done);
      CHECK(a.next_is_keyframe == b.next_is_keyframe);
    }
  }
  std::remove(path.c_str());

  // version guard
  std::ofstream bad("/tmp/trajrl_bad_cache.jsonl", std::ios::trunc);
  bad << "{\"format\":\"trajrl-transitions\",\"version\":99}\n";
  bad.close();
  CHECK_THROWS_AS(io::read_transition_cache("/tmp/trajrl_bad_cache.jsonl"),
                  std::runtime_error);
  std::remove("/tmp/trajrl_bad_cache.jsonl");
}

TEST_CASE("metrics csv round-trips") {
  metrics::MetricsReport rep;
  rep.method = "cql";
  rep.resolution = {1264, 902};
  rep.per_trajectory = {{"a", 10.5, 20.25, 30.125}, {"b", 1, 2, 3}};
  rep.finalize();
  const std::string path = "/tmp/trajrl_metrics_roundtrip.csv";
  io::write_metrics_csv(path, rep);
  const auto back = io::read_metrics_csv(path);
  CHECK(back.method == "cql");
  CHECK(back.resolution.width == 1264);
  REQUIRE(back.per_trajectory.size() == 2);
  CHECK(back.per_trajectory[0].id == "a");
  CHECK(back.per_trajectory[0].fde == 20.25);
  CHECK(back.mean_ade == doctest::Approx(rep.mean_ade));
  std::remove(path.c_str());
}

TEST_CASE("manifest and file hashing") {
  const std::string dir = "/tmp/trajrl_manifest_test";
  fs::create_directories(dir);
  const auto input = write_tmp("hash_input.txt", "hello corpus\n");
  io::Manifest m;
  m.command = "train";
  m.seed = 42;
  m.config_text = "seed = 42\n";
  m.config_hash = 77;
  m.input_hashes[input] = io::hash_file(input);
  io::write_manifest(dir + "/manifest.json", m);
  CHECK(fs::exists(dir + "/manifest.json"));
  CHECK(io::hash_file(input) == io::hash_file(input));
  fs::remove_all(dir);
  std::remove(input.c_str());
}

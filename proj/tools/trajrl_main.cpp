// Command-line entry point: corpus generation, training, evaluation,
// inference, Q-curve diagnostics, and plot emission.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "trajrl/config.hpp"
#include "trajrl/io.hpp"
#include "trajrl/kernels.hpp"
#include "trajrl/pipeline.hpp"
#include "trajrl/svgplot.hpp"

namespace fs = std::filesystem;
using namespace trajrl;

namespace {

struct Opts {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string corpus_dir;
  std::string checkpoint;
  std::string bc_checkpoint;
  std::string split = "val";
  std::string model_kind = "cql";
  std::string in_dir;
  long long seed = -1;
  int epochs = -1;
  int threads = -1;
  int qcurve_count = 4;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("TRAJRL_OUT_DIR")) return env;
  return "out";
}

config::Config load_config(const Opts& o) {
  config::Config cfg;
  if (!o.config_path.empty()) cfg = config::Config::from_file(o.config_path);
  if (!o.preset.empty()) cfg.apply_preset(o.preset);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.epochs >= 0) cfg.epochs = o.epochs;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (cfg.threads > 0) kernels::set_threads(cfg.threads);
  return cfg;
}

void write_run_manifest(const Opts& o, const config::Config& cfg,
                        const std::string& command,
                        const std::vector<std::string>& inputs) {
  io::Manifest m;
  m.command = command;
  m.seed = cfg.seed;
  m.config_text = cfg.to_text();
  m.config_hash = cfg.hash();
  for (const auto& path : inputs)
    if (fs::exists(path)) m.input_hashes[path] = io::hash_file(path);
  io::write_manifest(o.out_dir + "/manifest_" + command + ".json", m);
}

struct CorpusData {
  std::vector<geom::Trajectory> trajs;
  io::CropStore crops;
};

CorpusData load_split(const std::string& corpus_dir, const std::string& split) {
  CorpusData data;
  data.trajs = io::read_corpus(corpus_dir + "/corpus_" + split + ".jsonl");
  data.crops = io::CropStore::load(corpus_dir + "/crops.bin");
  return data;
}

int cmd_gen_data(const Opts& o) {
  const auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  const auto out = synthgen::generate_corpus(cfg.synth_config());
  synthgen::write_corpus_files(out, o.out_dir);
  write_run_manifest(o, cfg, "gen-data", {});
  std::cout << "wrote " << out.train.size() << "/" << out.val.size() << "/"
            << out.test.size() << " train/val/test trajectories to "
            << o.out_dir << '\n';
  return 0;
}

int cmd_train(const Opts& o) {
  const auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  auto data = load_split(o.corpus_dir, "train");
  const auto episodes =
      dataset::build_episodes(data.trajs, cfg.dataset_config());
  io::write_transition_cache(o.out_dir + "/transitions.jsonl", episodes);
  auto clips = pipeline::build_clips(data.trajs, episodes, data.crops,
                                     cfg.encoder_config());

  if (o.model_kind == "bc") {
    baselines::BcConfig bcfg;
    bcfg.lr = cfg.bc_lr;
    bcfg.epochs = cfg.bc_epochs;
    bcfg.batch_size = cfg.batch_size;
    baselines::BcBaseline bc(cfg.encoder_config(), bcfg, cfg.seed);
    bc.train(episodes, clips);
    nn::Checkpoint ckpt;
    ckpt.config_hash = cfg.hash();
    ckpt.epochs_trained = bc.epochs_trained();
    nn::ParamList params;
    bc.collect_params(params);
    ckpt.put_params(params);
    ckpt.save(o.out_dir + "/bc.ckpt");
    std::cout << "bc baseline trained, final loss " << bc.last_train_loss()
              << '\n';
  } else {
    std::ofstream log(o.out_dir + "/train_log.txt", std::ios::trunc);
    cql::PolicyModel model = pipeline::train_model(
        episodes, clips, cfg.encoder_config(), cfg.action_config(),
        cfg.train_config(), cfg.seed, &log);
    const auto ckpt = cql::make_checkpoint(model, nullptr, cfg.hash());
    ckpt.save(o.out_dir + "/model.ckpt");
    std::cout << "trained " << model.epochs_trained << " epochs, checkpoint "
              << o.out_dir << "/model.ckpt\n";
  }
  write_run_manifest(o, cfg, "train",
                     {o.corpus_dir + "/corpus_train.jsonl",
                      o.corpus_dir + "/crops.bin"});
  return 0;
}

cql::PolicyModel load_model(const config::Config& cfg,
                            const std::string& path) {
  const auto ckpt = nn::Checkpoint::load(path);
  if (ckpt.config_hash != cfg.hash())
    std::cerr << "warning: checkpoint config hash mismatch for " << path
              << " (continuing)\n";
  auto model = cql::PolicyModel::create(cfg.encoder_config(),
                                        cfg.action_config(),
                                        cfg.train_config(), cfg.seed);
  cql::restore_model(model, ckpt);
  return model;
}

int cmd_eval(const Opts& o) {
  const auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  auto data = load_split(o.corpus_dir, o.split);
  const auto episodes =
      dataset::build_episodes(data.trajs, cfg.dataset_config());
  const auto clips = pipeline::build_clips(data.trajs, episodes, data.crops,
                                           cfg.encoder_config());
  const auto model = load_model(cfg, o.checkpoint);

  std::vector<metrics::MetricsReport> reports;
  reports.push_back(pipeline::evaluate_cql(data.trajs, episodes, clips, model,
                                           cfg.guidance_config(),
                                           cfg.lookahead_h));
  reports.push_back(pipeline::evaluate_straightline(data.trajs, episodes,
                                                    cfg.guidance_config()));
  if (!o.bc_checkpoint.empty()) {
    baselines::BcConfig bcfg;
    bcfg.lr = cfg.bc_lr;
    bcfg.epochs = cfg.bc_epochs;
    baselines::BcBaseline bc(cfg.encoder_config(), bcfg, cfg.seed);
    const auto ckpt = nn::Checkpoint::load(o.bc_checkpoint);
    nn::ParamList params;
    bc.collect_params(params);
    ckpt.load_params(params);
    bc.set_epochs_trained(ckpt.epochs_trained);
    reports.push_back(pipeline::evaluate_bc(data.trajs, episodes, clips, bc));
  }

  std::ostringstream extra;
  extra.precision(12);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    std::vector<double> a, b;
    for (const auto& r : reports[0].per_trajectory) a.push_back(r.ade);
    for (const auto& r : reports[i].per_trajectory) b.push_back(r.ade);
    try {
      const auto w = metrics::wilcoxon_signed_rank(a, b);
      extra << "wilcoxon cql_vs_" << reports[i].method << " W=" << w.statistic
            << " p=" << w.p_value << " n=" << w.n
            << (w.exact ? " exact" : " approx") << '\n';
    } catch (const std::exception& e) {
      extra << "wilcoxon cql_vs_" << reports[i].method
            << " unavailable: " << e.what() << '\n';
    }
  }

  for (const auto& r : reports)
    io::write_metrics_csv(o.out_dir + "/metrics_" + r.method + ".csv", r);
  io::write_metrics_summary(o.out_dir + "/metrics_summary.txt", reports,
                            extra.str());
  write_run_manifest(o, cfg, "eval",
                     {o.corpus_dir + "/corpus_" + o.split + ".jsonl",
                      o.checkpoint});
  for (const auto& r : reports)
    std::cout << r.method << ": ade " << r.mean_ade << " +- " << r.std_ade
              << " px (n=" << r.per_trajectory.size() << ")\n";
  return 0;
}

int cmd_infer(const Opts& o) {
  const auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  auto data = load_split(o.corpus_dir, o.split);
  const auto episodes =
      dataset::build_episodes(data.trajs, cfg.dataset_config());
  const auto clips = pipeline::build_clips(data.trajs, episodes, data.crops,
                                           cfg.encoder_config());
  const auto model = load_model(cfg, o.checkpoint);

  std::vector<io::PredictionRecord> records;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    const auto& traj = data.trajs[ep.traj_index];
    const auto obs = pipeline::observed_step_points(traj, ep.spec);
    const auto ro = rollout::predict(clips[i], obs, ep.spec.pred_frames,
                                     model, cfg.guidance_config(),
                                     cfg.lookahead_h);
    io::PredictionRecord rec;
    rec.id = ep.id;
    rec.resolution = {traj.width_px, traj.height_px};
    for (const auto& [f, p] : obs)
      rec.observed.emplace_back(static_cast<int>(f), p);
    for (std::size_t k = 0; k < ro.points.size(); ++k)
      rec.predicted.emplace_back(ep.spec.pred_frames[k], ro.points[k]);
    records.push_back(std::move(rec));
  }
  io::write_predictions(o.out_dir + "/predictions.jsonl", records);
  write_run_manifest(o, cfg, "infer",
                     {o.corpus_dir + "/corpus_" + o.split + ".jsonl",
                      o.checkpoint});
  std::cout << "wrote " << records.size() << " rollouts\n";
  return 0;
}

int cmd_qcurve(const Opts& o) {
  auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  auto data = load_split(o.corpus_dir, o.split.empty() ? "test" : o.split);
  const auto model = load_model(cfg, o.checkpoint);

  // Varying prediction horizons across the selected trajectories.
  const int horizons[] = {2, 3, 4, 5};
  const std::string path = o.out_dir + "/qcurves.csv";
  std::ostringstream summary;
  int written = 0;
  for (std::size_t i = 0; i < data.trajs.size() && written < o.qcurve_count;
       ++i) {
    const auto& traj = data.trajs[i];
    auto dcfg = cfg.dataset_config();
    dcfg.t_pred = horizons[written % 4];
    dcfg.t_obs = static_cast<int>(traj.keyframes.size()) - dcfg.t_pred;
    if (dcfg.t_obs < 2) continue;
    dataset::EpisodeSpec spec;
    try {
      spec = dataset::make_episode_spec(traj, dcfg);
    } catch (const dataset::SpecOutOfRange&) {
      continue;
    }
    dataset::Episode ep;
    ep.id = traj.id;
    ep.traj_index = static_cast<int>(i);
    ep.spec = spec;
    ep.transitions = dataset::extract_transitions(traj, spec, dcfg);
    const auto clip =
        pipeline::build_clip(traj, spec, data.crops, cfg.encoder_config());
    const auto qc = cql::compute_qcurve(ep, clip, model);
    io::write_qcurve_csv(path, ep.id, qc, written > 0);
    summary << ep.id << " horizon=" << dcfg.t_pred << " conservatism="
            << metrics::conservatism_fraction(qc) << '\n';
    ++written;
  }
  std::ofstream os(o.out_dir + "/qcurve_summary.txt", std::ios::trunc);
  os << summary.str();
  write_run_manifest(o, cfg, "qcurve", {o.checkpoint});
  std::cout << summary.str();
  return 0;
}

int cmd_plot(const Opts& o) {
  const auto cfg = load_config(o);
  fs::create_directories(o.out_dir);
  const std::string in_dir = o.in_dir.empty() ? o.out_dir : o.in_dir;

  // Summary rows annotate the legend when the summary file is present.
  std::map<std::string, std::string> summary_notes;
  if (fs::exists(in_dir + "/metrics_summary.txt")) {
    std::ifstream is(in_dir + "/metrics_summary.txt");
    std::string line;
    while (std::getline(is, line)) {
      if (line.rfind("method=", 0) != 0) continue;
      std::istringstream ss(line);
      std::string tok, method, mean;
      while (ss >> tok) {
        if (tok.rfind("method=", 0) == 0) method = tok.substr(7);
        if (tok.rfind("ade_mean=", 0) == 0) mean = tok.substr(9);
      }
      if (!method.empty() && !mean.empty()) {
        std::ostringstream note;
        note.precision(1);
        note << std::fixed << " (" << std::stod(mean) << " px)";
        summary_notes[method] = note.str();
      }
    }
  }

  std::vector<svgplot::Series> ade_groups;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("metrics_", 0) != 0 || entry.path().extension() != ".csv")
      continue;
    const auto report = io::read_metrics_csv(entry.path().string());
    std::vector<double> ades;
    for (const auto& r : report.per_trajectory) ades.push_back(r.ade);
    std::string label = report.method;
    if (const auto it = summary_notes.find(report.method);
        it != summary_notes.end())
      label += it->second;
    ade_groups.emplace_back(std::move(label), std::move(ades));
  }
  if (!ade_groups.empty()) {
    svgplot::write_violin(o.out_dir + "/ade_violin.svg",
                          "ADE distribution (px)", ade_groups);
    svgplot::write_cdf(o.out_dir + "/ade_cdf.svg", "ADE empirical CDF (px)",
                       ade_groups);
  }

  const std::string qpath = in_dir + "/qcurves.csv";
  if (fs::exists(qpath)) {
    std::ifstream is(qpath);
    std::string line;
    std::getline(is, line);  // header
    std::map<std::string, metrics::QCurve> curves;
    while (std::getline(is, line)) {
      std::istringstream ss(line);
      std::string id, step, qp, qe, kf;
      std::getline(ss, id, ',');
      std::getline(ss, step, ',');
      std::getline(ss, qp, ',');
      std::getline(ss, qe, ',');
      std::getline(ss, kf, ',');
      auto& qc = curves[id];
      qc.q_policy.push_back(std::stod(qp));
      qc.q_expert.push_back(std::stod(qe));
      qc.keyframe.push_back(kf == "1");
    }
    for (const auto& [id, qc] : curves) {
      std::vector<int> markers;
      for (std::size_t k = 0; k < qc.keyframe.size(); ++k)
        if (qc.keyframe[k]) markers.push_back(static_cast<int>(k));
      svgplot::write_line_chart(o.out_dir + "/qcurve_" + id + ".svg",
                                "Per-step Q values: " + id,
                                {{"q_policy", qc.q_policy},
                                 {"q_expert", qc.q_expert}},
                                markers);
    }
  }
  write_run_manifest(o, cfg, "plot", {});
  std::cout << "plots written to " << o.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-conditioned offline RL for pixel-space trajectory "
               "prediction"};
  app.require_subcommand(1);

  Opts o;
  o.out_dir = default_out_dir();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "flat key=value config file");
    cmd->add_option("--preset", o.preset, "obs6pred3 or obs3pred6");
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "root seed");
    cmd->add_option("--threads", o.threads, "worker threads (1 = serial)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  add_common(gen);

  auto* train = app.add_subcommand("train", "train the policy offline");
  add_common(train);
  train->add_option("--corpus", o.corpus_dir, "corpus directory")->required();
  train->add_option("--epochs", o.epochs, "override epoch count");
  train->add_option("--model", o.model_kind, "cql or bc");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint + baselines");
  add_common(eval);
  eval->add_option("--corpus", o.corpus_dir, "corpus directory")->required();
  eval->add_option("--checkpoint", o.checkpoint, "model checkpoint")
      ->required();
  eval->add_option("--bc-checkpoint", o.bc_checkpoint, "bc baseline ckpt");
  eval->add_option("--split", o.split, "val or test");

  auto* infer = app.add_subcommand("infer", "write autoregressive rollouts");
  add_common(infer);
  infer->add_option("--corpus", o.corpus_dir, "corpus directory")->required();
  infer->add_option("--checkpoint", o.checkpoint, "model checkpoint")
      ->required();
  infer->add_option("--split", o.split, "val or test");

  auto* qcurve = app.add_subcommand("qcurve", "per-step Q-value diagnostic");
  add_common(qcurve);
  qcurve->add_option("--corpus", o.corpus_dir, "corpus directory")->required();
  qcurve->add_option("--checkpoint", o.checkpoint, "model checkpoint")
      ->required();
  qcurve->add_option("--split", o.split, "val or test");
  qcurve->add_option("--count", o.qcurve_count, "trajectories to analyze");

  auto* plot = app.add_subcommand("plot", "emit SVG charts from reports");
  add_common(plot);
  plot->add_option("--in-dir", o.in_dir, "directory with report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (infer->parsed()) return cmd_infer(o);
    if (qcurve->parsed()) return cmd_qcurve(o);
    if (plot->parsed()) return cmd_plot(o);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

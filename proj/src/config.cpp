#include "trajrl/config.hpp"

#include <fstream>
#include <sstream>

#include "trajrl/common.hpp"

namespace trajrl::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + v, line);
  }
}

int to_int(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + v, line);
  }
}

std::vector<int> to_int_list(const std::string& v, const std::string& key,
                             int line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_int(item, key, line));
  }
  return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path, 0);
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got: " + line, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg.apply(key, value, line_no);
  }
  return cfg;
}

void Config::apply(const std::string& key, const std::string& value,
                   int line) {
  auto is = [&](const char* k) { return key == k; };
  if (is("seed")) {
    seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (is("threads")) {
    threads = to_int(value, key, line);
  } else if (is("mode")) {
    if (value != "keyframe" && value != "dense")
      throw ConfigError("mode must be keyframe or dense", line);
    mode = value;
  } else if (is("t_obs")) {
    t_obs = to_int(value, key, line);
  } else if (is("t_pred")) {
    t_pred = to_int(value, key, line);
  } else if (is("lookahead_h")) {
    lookahead_h = to_int(value, key, line);
  } else if (is("dense_clip_stride")) {
    dense_clip_stride = to_int(value, key, line);
  } else if (is("delta_max")) {
    delta_max = to_double(value, key, line);
  } else if (is("idle_eps")) {
    idle_eps = to_double(value, key, line);
  } else if (is("r_time")) {
    r_time = to_double(value, key, line);
  } else if (is("r_prox_max")) {
    r_prox_max = to_double(value, key, line);
  } else if (is("tau_dist")) {
    tau_dist = to_double(value, key, line);
  } else if (is("clamp_prox_at")) {
    if (value == "off")
      clamp_prox_at.reset();
    else
      clamp_prox_at = to_double(value, key, line);
  } else if (is("crop")) {
    crop = to_int(value, key, line);
  } else if (is("embed_dim")) {
    embed_dim = to_int(value, key, line);
  } else if (is("heads")) {
    heads = to_int(value, key, line);
  } else if (is("attn_layers")) {
    attn_layers = to_int(value, key, line);
  } else if (is("conv_c1")) {
    conv_c1 = to_int(value, key, line);
  } else if (is("conv_c2")) {
    conv_c2 = to_int(value, key, line);
  } else if (is("conv_c3")) {
    conv_c3 = to_int(value, key, line);
  } else if (is("ffn_hidden")) {
    ffn_hidden = to_int(value, key, line);
  } else if (is("freq_pairs")) {
    freq_pairs = to_int(value, key, line);
  } else if (is("coord_embed")) {
    coord_embed = to_int(value, key, line);
  } else if (is("phi_hidden")) {
    phi_hidden = to_int(value, key, line);
  } else if (is("state_dim")) {
    state_dim = to_int(value, key, line);
  } else if (is("guidance_radius_px")) {
    guidance_radius_px = to_double(value, key, line);
  } else if (is("alpha_cql")) {
    alpha_cql = to_double(value, key, line);
  } else if (is("gamma")) {
    gamma = to_double(value, key, line);
  } else if (is("tau_soft")) {
    tau_soft = to_double(value, key, line);
  } else if (is("alpha_entropy")) {
    alpha_entropy = to_double(value, key, line);
  } else if (is("lambda_mag")) {
    lambda_mag = to_double(value, key, line);
  } else if (is("bc_weight")) {
    bc_weight = to_double(value, key, line);
  } else if (is("lr_encoder")) {
    lr_encoder = to_double(value, key, line);
  } else if (is("lr_actor")) {
    lr_actor = to_double(value, key, line);
  } else if (is("lr_critic")) {
    lr_critic = to_double(value, key, line);
  } else if (is("lr_mag")) {
    lr_mag = to_double(value, key, line);
  } else if (is("epochs")) {
    epochs = to_int(value, key, line);
  } else if (is("batch_size")) {
    batch_size = to_int(value, key, line);
  } else if (is("max_transitions_per_update")) {
    max_transitions_per_update = to_int(value, key, line);
  } else if (is("head_hidden")) {
    head_hidden = to_int(value, key, line);
  } else if (is("bucket_boundaries")) {
    bucket_boundaries = to_int_list(value, key, line);
  } else if (is("guidance_window")) {
    guidance_window = to_int(value, key, line);
  } else if (is("quad_min_points")) {
    quad_min_points = to_int(value, key, line);
  } else if (is("synth_count")) {
    synth_count = to_int(value, key, line);
  } else if (is("synth_train")) {
    synth_train = to_int(value, key, line);
  } else if (is("synth_val")) {
    synth_val = to_int(value, key, line);
  } else if (is("synth_test")) {
    synth_test = to_int(value, key, line);
  } else if (is("synth_keyframes")) {
    synth_keyframes = to_int(value, key, line);
  } else if (is("span_min")) {
    span_min = to_int(value, key, line);
  } else if (is("span_max")) {
    span_max = to_int(value, key, line);
  } else if (is("curvature")) {
    curvature = to_double(value, key, line);
  } else if (is("noise_px")) {
    noise_px = to_double(value, key, line);
  } else if (is("width")) {
    width = to_int(value, key, line);
  } else if (is("height")) {
    height = to_int(value, key, line);
  } else if (is("texture_waves")) {
    texture_waves = to_int(value, key, line);
  } else if (is("scene_group")) {
    scene_group = to_int(value, key, line);
  } else if (is("max_step")) {
    max_step = to_double(value, key, line);
  } else if (is("bc_lr")) {
    bc_lr = to_double(value, key, line);
  } else if (is("bc_epochs")) {
    bc_epochs = to_int(value, key, line);
  } else {
    throw ConfigError("unknown config key: " + key, line);
  }
}

void Config::apply_preset(const std::string& name) {
  if (name == "obs6pred3") {
    mode = "keyframe";
    t_obs = 6;
    t_pred = 3;
  } else if (name == "obs3pred6") {
    mode = "keyframe";
    t_obs = 3;
    t_pred = 6;
  } else {
    throw ConfigError("unknown preset: " + name, 0);
  }
}

std::string Config::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << seed << '\n';
  os << "threads = " << threads << '\n';
  os << "mode = " << mode << '\n';
  os << "t_obs = " << t_obs << '\n';
  os << "t_pred = " << t_pred << '\n';
  os << "lookahead_h = " << lookahead_h << '\n';
  os << "dense_clip_stride = " << dense_clip_stride << '\n';
  os << "delta_max = " << delta_max << '\n';
  os << "idle_eps = " << idle_eps << '\n';
  os << "r_time = " << r_time << '\n';
  os << "r_prox_max = " << r_prox_max << '\n';
  os << "tau_dist = " << tau_dist << '\n';
  os << "clamp_prox_at = ";
  if (clamp_prox_at)
    os << *clamp_prox_at << '\n';
  else
    os << "off\n";
  os << "crop = " << crop << '\n';
  os << "embed_dim = " << embed_dim << '\n';
  os << "heads = " << heads << '\n';
  os << "attn_layers = " << attn_layers << '\n';
  os << "conv_c1 = " << conv_c1 << '\n';
  os << "conv_c2 = " << conv_c2 << '\n';
  os << "conv_c3 = " << conv_c3 << '\n';
  os << "ffn_hidden = " << ffn_hidden << '\n';
  os << "freq_pairs = " << freq_pairs << '\n';
  os << "coord_embed = " << coord_embed << '\n';
  os << "phi_hidden = " << phi_hidden << '\n';
  os << "state_dim = " << state_dim << '\n';
  os << "guidance_radius_px = " << guidance_radius_px << '\n';
  os << "alpha_cql = " << alpha_cql << '\n';
  os << "gamma = " << gamma << '\n';
  os << "tau_soft = " << tau_soft << '\n';
  os << "alpha_entropy = " << alpha_entropy << '\n';
  os << "lambda_mag = " << lambda_mag << '\n';
  os << "bc_weight = " << bc_weight << '\n';
  os << "lr_encoder = " << lr_encoder << '\n';
  os << "lr_actor = " << lr_actor << '\n';
  os << "lr_critic = " << lr_critic << '\n';
  os << "lr_mag = " << lr_mag << '\n';
  os << "epochs = " << epochs << '\n';
  os << "batch_size = " << batch_size << '\n';
  os << "max_transitions_per_update = " << max_transitions_per_update << '\n';
  os << "head_hidden = " << head_hidden << '\n';
  os << "bucket_boundaries = ";
  for (std::size_t i = 0; i < bucket_boundaries.size(); ++i)
    os << bucket_boundaries[i] << (i + 1 < bucket_boundaries.size() ? "," : "");
  os << '\n';
  os << "guidance_window = " << guidance_window << '\n';
  os << "quad_min_points = " << quad_min_points << '\n';
  os << "synth_count = " << synth_count << '\n';
  os << "synth_train = " << synth_train << '\n';
  os << "synth_val = " << synth_val << '\n';
  os << "synth_test = " << synth_test << '\n';
  os << "synth_keyframes = " << synth_keyframes << '\n';
  os << "span_min = " << span_min << '\n';
  os << "span_max = " << span_max << '\n';
  os << "curvature = " << curvature << '\n';
  os << "noise_px = " << noise_px << '\n';
  os << "width = " << width << '\n';
  os << "height = " << height << '\n';
  os << "texture_waves = " << texture_waves << '\n';
  os << "scene_group = " << scene_group << '\n';
  os << "max_step = " << max_step << '\n';
  os << "bc_lr = " << bc_lr << '\n';
  os << "bc_epochs = " << bc_epochs << '\n';
  return os.str();
}

std::uint64_t Config::hash() const { return fnv1a(to_text()); }

dataset::DatasetConfig Config::dataset_config() const {
  dataset::DatasetConfig d;
  d.mode = mode == "dense" ? dataset::StepMode::kDense
                           : dataset::StepMode::kKeyframe;
  d.t_obs = t_obs;
  d.t_pred = t_pred;
  d.lookahead_h = lookahead_h;
  d.dense_clip_stride = dense_clip_stride;
  d.action = action_config();
  d.reward.r_time = r_time;
  d.reward.r_prox_max = r_prox_max;
  d.reward.tau_dist = tau_dist;
  d.reward.clamp_prox_at = clamp_prox_at;
  return d;
}

encoders::EncoderConfig Config::encoder_config() const {
  encoders::EncoderConfig e;
  e.crop = crop;
  e.embed_dim = embed_dim;
  e.heads = heads;
  e.attn_layers = attn_layers;
  e.conv_channels[0] = conv_c1;
  e.conv_channels[1] = conv_c2;
  e.conv_channels[2] = conv_c3;
  e.ffn_hidden = ffn_hidden;
  e.freq_pairs = freq_pairs;
  e.coord_embed = coord_embed;
  e.phi_hidden = phi_hidden;
  e.state_dim = state_dim;
  e.guidance_radius_px = guidance_radius_px;
  return e;
}

actions::ActionConfig Config::action_config() const {
  actions::ActionConfig a;
  a.delta_max = delta_max;
  a.idle_eps = idle_eps;
  return a;
}

cql::TrainConfig Config::train_config() const {
  cql::TrainConfig t;
  t.alpha_cql = alpha_cql;
  t.gamma = gamma;
  t.tau_soft = tau_soft;
  t.alpha_entropy = alpha_entropy;
  t.lambda_mag = lambda_mag;
  t.bc_weight = bc_weight;
  t.lr_encoder = lr_encoder;
  t.lr_actor = lr_actor;
  t.lr_critic = lr_critic;
  t.lr_mag = lr_mag;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.max_transitions_per_update = max_transitions_per_update;
  t.head_hidden = head_hidden;
  t.bucket_boundaries = bucket_boundaries;
  return t;
}

rollout::GuidanceConfig Config::guidance_config() const {
  rollout::GuidanceConfig g;
  g.window = guidance_window;
  g.quad_min_points = quad_min_points;
  return g;
}

synthgen::SynthConfig Config::synth_config() const {
  synthgen::SynthConfig s;
  s.seed = seed;
  s.count = synth_count;
  s.n_train = synth_train;
  s.n_val = synth_val;
  s.n_test = synth_test;
  s.keyframes = synth_keyframes;
  s.span_min = span_min;
  s.span_max = span_max;
  s.curvature = curvature;
  s.noise_px = noise_px;
  s.width = width;
  s.height = height;
  s.texture_waves = texture_waves;
  s.scene_group = scene_group;
  s.crop = crop;
  s.max_step = max_step;
  return s;
}

}  // namespace trajrl::config

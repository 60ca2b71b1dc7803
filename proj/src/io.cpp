#include "trajrl/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trajrl/common.hpp"

namespace trajrl::io {

using nlohmann::json;

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write file: " + path);
  return os;
}
std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open file: " + path);
  return is;
}
}  // namespace

void write_corpus(const std::string& path,
                  std::span<const geom::Trajectory> trajectories,
                  bool include_dense) {
  auto os = open_out(path);
  for (const auto& t : trajectories) {
    json j;
    j["id"] = t.id;
    j["scene"] = t.scene;
    j["width"] = t.width_px;
    j["height"] = t.height_px;
    json kfs = json::array();
    for (const auto& k : t.keyframes)
      kfs.push_back({k.frame,
                     static_cast<long long>(round_half_away(k.point.x * (t.width_px - 1))),
                     static_cast<long long>(round_half_away(k.point.y * (t.height_px - 1)))});
    j["keyframes"] = std::move(kfs);
    if (include_dense) {
      json ds = json::array();
      for (const auto& d : t.dense)
        ds.push_back({d.frame,
                      static_cast<long long>(round_half_away(d.point.x * (t.width_px - 1))),
                      static_cast<long long>(round_half_away(d.point.y * (t.height_px - 1))),
                      d.confidence, d.is_keyframe});
      j["dense"] = std::move(ds);
    }
    os << j.dump() << '\n';
  }
}

std::vector<geom::Trajectory> read_corpus(const std::string& path,
                                          bool densify_missing) {
  auto is = open_in(path);
  std::vector<geom::Trajectory> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": corpus parse error: " + e.what());
    }
    geom::Trajectory t;
    t.id = j.at("id").get<std::string>();
    t.scene = j.value("scene", std::string{});
    t.width_px = j.at("width").get<int>();
    t.height_px = j.at("height").get<int>();
    for (const auto& k : j.at("keyframes")) {
      geom::Keyframe kf;
      kf.frame = k.at(0).get<int>();
      kf.point = {geom::to_norm_x(k.at(1).get<long long>(), t.width_px),
                  geom::to_norm_y(k.at(2).get<long long>(), t.height_px)};
      t.keyframes.push_back(kf);
    }
    if (j.contains("dense")) {
      for (const auto& d : j.at("dense")) {
        geom::DenseSample s;
        s.frame = d.at(0).get<int>();
        s.point = {geom::to_norm_x(d.at(1).get<long long>(), t.width_px),
                   geom::to_norm_y(d.at(2).get<long long>(), t.height_px)};
        s.confidence = d.at(3).get<double>();
        s.is_keyframe = d.at(4).get<bool>();
        t.dense.push_back(s);
      }
    } else if (densify_missing) {
      geom::densify(t);
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ----------------------------------------------------------------- CropStore

namespace {
constexpr char kCropMagic[8] = {'T', 'R', 'J', 'C', 'R', 'O', 'P', '1'};
}

void CropStore::add(const std::string& id, Sequence seq) {
  if (crop_ == 0) crop_ = seq.crop;
  if (seq.crop != crop_)
    throw std::invalid_argument("crop store sequences must share a crop size");
  seqs_[id] = std::move(seq);
}

bool CropStore::contains(const std::string& id) const {
  return seqs_.count(id) > 0;
}

std::vector<double> CropStore::frame_rgb(const std::string& id,
                                         int frame) const {
  const auto it = seqs_.find(id);
  if (it == seqs_.end())
    throw std::out_of_range("crop store has no sequence: " + id);
  const auto& s = it->second;
  const int rel = frame - s.first_frame;
  if (rel < 0 || rel >= s.frames())
    throw std::out_of_range("crop store: frame outside sequence " + id);
  const std::size_t stride = static_cast<std::size_t>(3) * s.crop * s.crop;
  std::vector<double> out(stride);
  const std::uint8_t* src = s.data.data() + rel * stride;
  for (std::size_t i = 0; i < stride; ++i) out[i] = src[i] / 255.0;
  return out;
}

void CropStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write crop store: " + path);
  os.write(kCropMagic, sizeof(kCropMagic));
  const std::uint32_t crop = crop_;
  const std::uint32_t n = static_cast<std::uint32_t>(seqs_.size());
  os.write(reinterpret_cast<const char*>(&crop), sizeof(crop));
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& [id, s] : seqs_) {
    const std::uint32_t len = static_cast<std::uint32_t>(id.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(id.data(), len);
    const std::int32_t first = s.first_frame;
    const std::uint32_t frames = s.frames();
    os.write(reinterpret_cast<const char*>(&first), sizeof(first));
    os.write(reinterpret_cast<const char*>(&frames), sizeof(frames));
    os.write(reinterpret_cast<const char*>(s.data.data()),
             static_cast<std::streamsize>(s.data.size()));
  }
  if (!os) throw std::runtime_error("crop store write failed: " + path);
}

CropStore CropStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open crop store: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::string(magic, 8) != std::string(kCropMagic, 8))
    throw std::runtime_error("not a crop store file: " + path);
  std::uint32_t crop = 0, n = 0;
  is.read(reinterpret_cast<char*>(&crop), sizeof(crop));
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  CropStore store;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string id(len, '\0');
    is.read(id.data(), len);
    std::int32_t first = 0;
    std::uint32_t frames = 0;
    is.read(reinterpret_cast<char*>(&first), sizeof(first));
    is.read(reinterpret_cast<char*>(&frames), sizeof(frames));
    Sequence s;
    s.first_frame = first;
    s.crop = static_cast<int>(crop);
    s.data.resize(static_cast<std::size_t>(frames) * 3 * crop * crop);
    is.read(reinterpret_cast<char*>(s.data.data()),
            static_cast<std::streamsize>(s.data.size()));
    store.add(id, std::move(s));
  }
  if (!is) throw std::runtime_error("truncated crop store: " + path);
  return store;
}

// ---------------------------------------------------------- transition cache

namespace {
constexpr int kTransitionCacheVersion = 1;

json point_to_json(const geom::PixelPoint& p) { return json{p.x, p.y}; }
geom::PixelPoint point_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}
}  // namespace

void write_transition_cache(const std::string& path,
                            std::span<const dataset::Episode> episodes) {
  auto os = open_out(path);
  os << json{{"format", "trajrl-transitions"},
             {"version", kTransitionCacheVersion}}
            .dump()
     << '\n';
  for (const auto& ep : episodes) {
    json j;
    j["id"] = ep.id;
    j["traj_index"] = ep.traj_index;
    j["obs_frames"] = ep.spec.obs_frames;
    j["pred_frames"] = ep.spec.pred_frames;
    j["clip_frames"] = ep.spec.clip_frames;
    json trs = json::array();
    for (const auto& t : ep.transitions) {
      trs.push_back({{"k", t.k},
                     {"horizon", t.horizon},
                     {"p", point_to_json(t.p)},
                     {"p_next", point_to_json(t.p_next)},
                     {"g", point_to_json(t.g)},
                     {"g_next", point_to_json(t.g_next)},
                     {"a_exp", t.a_exp},
                     {"expert_len", t.expert_len},
                     {"r_time", t.reward.time},
                     {"r_prox", t.reward.prox},
                     {"r_term", t.reward.term},
                     {"r_total", t.reward.total},
                     {"d_k", t.reward.d_k},
                     {"w_k", t.reward.w_k},
                     {"done", t.done},
                     {"frame", t.frame},
                     {"frame_next", t.frame_next},
                     {"next_is_keyframe", t.next_is_keyframe}});
    }
    j["transitions"] = std::move(trs);
    os << j.dump() << '\n';
  }
}

std::vector<dataset::Episode> read_transition_cache(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty transition cache: " + path);
  const json header = json::parse(line);
  if (header.value("format", "") != "trajrl-transitions" ||
      header.value("version", -1) != kTransitionCacheVersion)
    throw std::runtime_error("unsupported transition cache header: " + path);

  std::vector<dataset::Episode> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    dataset::Episode ep;
    ep.id = j.at("id").get<std::string>();
    ep.traj_index = j.at("traj_index").get<int>();
    ep.spec.obs_frames = j.at("obs_frames").get<std::vector<int>>();
    ep.spec.pred_frames = j.at("pred_frames").get<std::vector<int>>();
    ep.spec.clip_frames = j.at("clip_frames").get<std::vector<int>>();
    for (const auto& tj : j.at("transitions")) {
      dataset::Transition t;
      t.k = tj.at("k").get<int>();
      t.horizon = tj.at("horizon").get<int>();
      t.p = point_from_json(tj.at("p"));
      t.p_next = point_from_json(tj.at("p_next"));
      t.g = point_from_json(tj.at("g"));
      t.g_next = point_from_json(tj.at("g_next"));
      t.a_exp = tj.at("a_exp").get<int>();
      t.expert_len = tj.at("expert_len").get<double>();
      t.reward.time = tj.at("r_time").get<double>();
      t.reward.prox = tj.at("r_prox").get<double>();
      t.reward.term = tj.at("r_term").get<double>();
      t.reward.total = tj.at("r_total").get<double>();
      t.reward.d_k = tj.at("d_k").get<double>();
      t.reward.w_k = tj.at("w_k").get<double>();
      t.done = tj.at("done").get<bool>();
      t.frame = tj.at("frame").get<int>();
      t.frame_next = tj.at("frame_next").get<int>();
      t.next_is_keyframe = tj.at("next_is_keyframe").get<bool>();
      ep.transitions.push_back(t);
    }
    out.push_back(std::move(ep));
  }
  return out;
}

// ------------------------------------------------------------------- reports

void write_metrics_csv(const std::string& path,
                       const metrics::MetricsReport& report) {
  auto os = open_out(path);
  os << "# method=" << report.method << " width=" << report.resolution.width
     << " height=" << report.resolution.height << '\n';
  os << "id,ade_px,fde_px,fd_px\n";
  os.precision(17);
  for (const auto& r : report.per_trajectory)
    os << r.id << ',' << r.ade << ',' << r.fde << ',' << r.fd << '\n';
}

metrics::MetricsReport read_metrics_csv(const std::string& path) {
  auto is = open_in(path);
  metrics::MetricsReport report;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("id,", 0) == 0) {
      if (line.rfind("# method=", 0) == 0) {
        std::istringstream ss(line.substr(2));
        std::string tok;
        while (ss >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
          if (key == "method") report.method = val;
          if (key == "width") report.resolution.width = std::stoi(val);
          if (key == "height") report.resolution.height = std::stoi(val);
        }
      }
      continue;
    }
    std::istringstream ss(line);
    metrics::TrajectoryMetrics row;
    std::string field;
    std::getline(ss, row.id, ',');
    std::getline(ss, field, ',');
    row.ade = std::stod(field);
    std::getline(ss, field, ',');
    row.fde = std::stod(field);
    std::getline(ss, field, ',');
    row.fd = std::stod(field);
    report.per_trajectory.push_back(std::move(row));
  }
  report.finalize();
  return report;
}

void write_metrics_summary(const std::string& path,
                           std::span<const metrics::MetricsReport> reports,
                           const std::string& extra) {
  auto os = open_out(path);
  os.precision(17);
  for (const auto& r : reports) {
    os << "method=" << r.method << " n=" << r.per_trajectory.size()
       << " ade_mean=" << r.mean_ade << " ade_std=" << r.std_ade
       << " fde_mean=" << r.mean_fde << " fde_std=" << r.std_fde
       << " fd_mean=" << r.mean_fd << " fd_std=" << r.std_fd << '\n';
  }
  if (!extra.empty()) os << extra;
}

void write_predictions(const std::string& path,
                       std::span<const PredictionRecord> records) {
  auto os = open_out(path);
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["width"] = r.resolution.width;
    j["height"] = r.resolution.height;
    json obs = json::array(), pred = json::array();
    for (const auto& [f, p] : r.observed)
      obs.push_back({f, p.x, p.y, p.x * r.resolution.width,
                     p.y * r.resolution.height});
    for (const auto& [f, p] : r.predicted)
      pred.push_back({f, p.x, p.y, p.x * r.resolution.width,
                      p.y * r.resolution.height});
    j["observed"] = std::move(obs);
    j["predicted"] = std::move(pred);
    os << j.dump() << '\n';
  }
}

void write_qcurve_csv(const std::string& path, const std::string& id,
                      const metrics::QCurve& qc, bool append) {
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write file: " + path);
  os.precision(17);
  if (!append) os << "id,step,q_policy,q_expert,is_keyframe\n";
  for (std::size_t k = 0; k < qc.q_policy.size(); ++k)
    os << id << ',' << k << ',' << qc.q_policy[k] << ',' << qc.q_expert[k]
       << ',' << (qc.keyframe[k] ? 1 : 0) << '\n';
}

void write_manifest(const std::string& path, const Manifest& m) {
  json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config_text;
  json hashes = json::object();
  for (const auto& [k, v] : m.input_hashes) hashes[k] = v;
  j["input_hashes"] = std::move(hashes);
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0)
    h = fnv1a(buf, static_cast<std::size_t>(is.gcount()), h);
  return h;
}

}  // namespace trajrl::io

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajrl/dataset.hpp"
#include "trajrl/geom.hpp"
#include "trajrl/metrics.hpp"

namespace trajrl::io {

// --- trajectory corpus -----------------------------------------------------
// Newline-delimited JSON, one trajectory per line:
//   {"id": "...", "scene": "...", "width": W, "height": H,
//    "keyframes": [[frame, x_px, y_px], ...],
//    "dense": [[frame, x_px, y_px, confidence, is_keyframe], ...]}  (optional)
// Pixel coordinates are integers in the source resolution. Readers densify
// when the dense block is absent.

void write_corpus(const std::string& path,
                  std::span<const geom::Trajectory> trajectories,
                  bool include_dense = false);
std::vector<geom::Trajectory> read_corpus(const std::string& path,
                                          bool densify_missing = true);

// --- crop archive ------------------------------------------------------------
// Per-frame RGB tiles (uint8, planar CHW), lossless, one sequence per
// trajectory covering every frame of its span.
class CropStore {
 public:
  struct Sequence {
    int first_frame = 0;
    int crop = 32;
    std::vector<std::uint8_t> data;  // n_frames * 3 * crop * crop
    int frames() const {
      return crop == 0 ? 0
                       : static_cast<int>(data.size() / (3 * crop * crop));
    }
  };

  void add(const std::string& id, Sequence seq);
  bool contains(const std::string& id) const;
  // RGB crop as doubles in [0,1], planar CHW.
  std::vector<double> frame_rgb(const std::string& id, int frame) const;
  int crop_size() const { return crop_; }

  void save(const std::string& path) const;
  static CropStore load(const std::string& path);

 private:
  int crop_ = 0;
  std::map<std::string, Sequence> seqs_;
};

// --- transition cache ---------------------------------------------------------
// Versioned JSON-lines cache of extracted episodes; header line first, then
// one episode per line. Readers reject unknown versions.

void write_transition_cache(const std::string& path,
                            std::span<const dataset::Episode> episodes);
std::vector<dataset::Episode> read_transition_cache(const std::string& path);

// --- reports -----------------------------------------------------------------

void write_metrics_csv(const std::string& path,
                       const metrics::MetricsReport& report);
void write_metrics_summary(const std::string& path,
                           std::span<const metrics::MetricsReport> reports,
                           const std::string& extra = "");
metrics::MetricsReport read_metrics_csv(const std::string& path);

struct PredictionRecord {
  std::string id;
  std::vector<std::pair<int, geom::PixelPoint>> observed;  // frame, point
  std::vector<std::pair<int, geom::PixelPoint>> predicted;
  metrics::Resolution resolution;
};

void write_predictions(const std::string& path,
                       std::span<const PredictionRecord> records);

void write_qcurve_csv(const std::string& path, const std::string& id,
                      const metrics::QCurve& qc, bool append = false);

// --- run manifest -------------------------------------------------------------

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::map<std::string, std::uint64_t> input_hashes;  // file -> fnv1a
  std::string version = "trajrl 0.1.0";
};

void write_manifest(const std::string& path, const Manifest& m);
std::uint64_t hash_file(const std::string& path);

}  // namespace trajrl::io

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trajrl/optim.hpp"
#include "trajrl/tensor.hpp"

namespace trajrl::nn {

// Versioned binary container of named parameter tensors plus optimizer
// states. Writes are atomic (temp file + rename).
struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::int64_t epochs_trained = 0;
  std::map<std::string, std::pair<Shape, std::vector<double>>> tensors;
  std::map<std::string, Adam::State> optimizers;

  void put_params(const ParamList& params);
  // Copies stored values into matching params; throws on missing name or
  // shape mismatch.
  void load_params(ParamList& params) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace trajrl::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "symreg/nn/model.hpp"

namespace symreg::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<float> data;
};

/// Binary container: magic "SYMRGCKP", version, model config (JSON), vocabulary
/// hash, parameter tensors, optimizer moments, rng state and step counter.
/// Tensors are row-major little-endian float32.
struct Checkpoint {
  ModelConfig config;
  std::string vocab_hash;
  std::vector<NamedTensor> parameters;
  std::vector<NamedTensor> adam_m;
  std::vector<NamedTensor> adam_v;
  std::uint64_t step = 0;
  std::string rng_state;
  /// Free-form training settings needed to resume.
  nlohmann::json train_state = nlohmann::json::object();
};

/// Writes to a temporary file and renames it into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

template <class T>
std::vector<NamedTensor> export_parameters(const Model<T>& model);
/// Throws Checkpoint on any name or shape mismatch.
template <class T>
void import_parameters(Model<T>& model, const std::vector<NamedTensor>& tensors);

/// Rebuilds a model from a checkpoint and checks its vocabulary hash.
template <class T>
std::unique_ptr<Model<T>> load_model(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace symreg::nn

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lop/ebm.hpp"
#include "lop/score_io.hpp"

namespace lop {

/// A trained model together with everything needed to interpret its vectors.
struct Model {
  ebm::ModelParams params;
  score::OrchestraLayout layout;
  int quantization = 4;
  int horizon = 4;
  nlohmann::json training_config = nlohmann::json::object();

  ebm::ModelKind kind() const { return ebm::kind_of(params); }
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary container:
///   "LOPMODEL" | u32 version | u32 kind | u32 tensor count
///   dimension table: per tensor u16 name length, name, u64 rows, u64 cols
///   tensor data: little-endian float64, column-major, table order
///   u64 metadata length | JSON {layout, quantization, horizon, training_config}
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace lop

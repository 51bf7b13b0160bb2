#ifndef GRAPHPARSE_CHECKPOINT_HPP_
#define GRAPHPARSE_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "graphparse/tensor.hpp"
#include "json.hpp"

namespace graphparse {

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

struct TensorRecord {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  DType dtype = DType::F32;
  std::vector<double> data;  // widened on load
};

// Flat archive: "GPCKPT01", u64 manifest length, JSON manifest, u32 record
// count, then per record {u32 name length, name, u32 rank, u64 rows, u64 cols,
// u8 dtype, little-endian payload}.
struct Checkpoint {
  nlohmann::json manifest;
  std::vector<TensorRecord> records;

  const TensorRecord* find(const std::string& name) const;
  const TensorRecord& at(const std::string& name) const;

  // Writes to a temp file and renames it into place.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

template <typename T>
TensorRecord make_record(const std::string& name, const Tensor<T>& t, DType dtype);

// Copies a record into an existing tensor of the same shape.
template <typename T>
void restore(const TensorRecord& rec, Tensor<T>& out);

void add_params(Checkpoint& ck, const ParamSet<float>& p, const std::string& prefix, DType dtype);
void add_params(Checkpoint& ck, const ParamSet<double>& p, const std::string& prefix, DType dtype);
void load_params(const Checkpoint& ck, ParamSet<float>& p, const std::string& prefix);
void load_params(const Checkpoint& ck, ParamSet<double>& p, const std::string& prefix);

}  // namespace graphparse

#endif  // GRAPHPARSE_CHECKPOINT_HPP_

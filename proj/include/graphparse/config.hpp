#ifndef GRAPHPARSE_CONFIG_HPP_
#define GRAPHPARSE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace graphparse {

// Ablation rows: graph decoding over raw tokens, over syntactic groups, and
// grouped with grounding attention.
enum class Mode : std::uint8_t { Plain, SyntaxAware, Grounded };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

inline constexpr std::size_t kMaxVariables = 8;

struct ModelConfig {
  Mode mode = Mode::Grounded;
  std::size_t d = 128;
  std::size_t n_vars = 4;
  std::size_t max_length = 64;
  bool kind_head = true;
  bool contextual_values = false;
  bool allow_self_loops = false;
  bool unk_for_oov = false;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// FNV-1a over a JSON dump; stable across runs and platforms.
std::uint64_t fingerprint(const nlohmann::json& j);
std::string hex64(std::uint64_t v);

}  // namespace graphparse

#endif  // GRAPHPARSE_CONFIG_HPP_

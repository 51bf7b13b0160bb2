#include "graphparse/config.hpp"

#include <cstdio>

#include "graphparse/errors.hpp"
#include "graphparse/vocab.hpp"

namespace graphparse {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Plain:
      return "plain";
    case Mode::SyntaxAware:
      return "syntax_aware";
    case Mode::Grounded:
      return "grounded";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "plain") return Mode::Plain;
  if (s == "syntax_aware" || s == "syntax-aware") return Mode::SyntaxAware;
  if (s == "grounded") return Mode::Grounded;
  throw std::invalid_argument("unknown mode '" + s + "' (plain, syntax_aware, grounded)");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"d", d},
          {"n_vars", n_vars},
          {"max_length", max_length},
          {"kind_head", kind_head},
          {"contextual_values", contextual_values},
          {"allow_self_loops", allow_self_loops},
          {"unk_for_oov", unk_for_oov}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.mode = parse_mode(j.value("mode", to_string(c.mode)));
  c.d = j.value("d", c.d);
  c.n_vars = j.value("n_vars", c.n_vars);
  c.max_length = j.value("max_length", c.max_length);
  c.kind_head = j.value("kind_head", c.kind_head);
  c.contextual_values = j.value("contextual_values", c.contextual_values);
  c.allow_self_loops = j.value("allow_self_loops", c.allow_self_loops);
  c.unk_for_oov = j.value("unk_for_oov", c.unk_for_oov);
  c.validate();
  return c;
}

void ModelConfig::validate() const {
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("d must be even and >= 2");
  if (n_vars < 1 || n_vars > kMaxVariables)
    throw std::invalid_argument("n_vars must be in [1, " + std::to_string(kMaxVariables) + "]");
  if (max_length < n_vars + 3) throw std::invalid_argument("max_length too small for n_vars");
}

std::uint64_t fingerprint(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

WordVocab::WordVocab(const std::vector<std::string>& words) {
  for (const auto& w : words) add(w);
}

std::uint32_t WordVocab::add(const std::string& word) {
  auto it = ids_.find(word);
  if (it != ids_.end()) return it->second;
  const auto id = kFirstWord + static_cast<std::uint32_t>(words_.size());
  words_.push_back(word);
  ids_.emplace(word, id);
  return id;
}

std::optional<std::uint32_t> WordVocab::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

}  // namespace graphparse

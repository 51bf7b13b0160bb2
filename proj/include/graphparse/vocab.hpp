#ifndef GRAPHPARSE_VOCAB_HPP_
#define GRAPHPARSE_VOCAB_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphparse/config.hpp"

namespace graphparse {

// Closed word vocabulary. Rows 0..10 of the embedding table are reserved:
// UNK, [SEP], NIL, then one row per variable token x_0..x_7.
class WordVocab {
 public:
  static constexpr std::uint32_t kUnk = 0;
  static constexpr std::uint32_t kSep = 1;
  static constexpr std::uint32_t kNil = 2;
  static constexpr std::uint32_t kFirstVar = 3;
  static constexpr std::uint32_t kFirstWord = kFirstVar + kMaxVariables;

  WordVocab() = default;
  explicit WordVocab(const std::vector<std::string>& words);

  static std::uint32_t variable(std::size_t i) { return kFirstVar + static_cast<std::uint32_t>(i); }

  // Adds in first-seen order; returns the id.
  std::uint32_t add(const std::string& word);
  std::optional<std::uint32_t> find(std::string_view word) const;
  std::size_t size() const { return kFirstWord + words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const WordVocab& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

}  // namespace graphparse

#endif  // GRAPHPARSE_VOCAB_HPP_

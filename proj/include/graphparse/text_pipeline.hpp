#ifndef GRAPHPARSE_TEXT_PIPELINE_HPP_
#define GRAPHPARSE_TEXT_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graphparse {

inline constexpr std::string_view kConjTag = "CONJ";
inline constexpr std::string_view kOtherTag = "OTHER";
inline constexpr std::string_view kEntityTag = "ENT";

// True for anonymized entity placeholders "M<digits>".
bool is_slot_token(std::string_view token);
std::string slot_token(std::uint32_t slot);

// Whitespace + punctuation split, lowercased. Slot tokens keep their case.
std::vector<std::string> tokenize(std::string_view text);

// Closed token -> tag lookup; "and" is CONJ, slot tokens are ENT, anything
// else missing from the table is OTHER.
class PosLexicon {
 public:
  PosLexicon() = default;
  void set(const std::string& token, const std::string& tag) { tags_[token] = tag; }
  std::string tag(std::string_view token) const;
  const std::unordered_map<std::string, std::string>& entries() const { return tags_; }

  // token<TAB>tag per line.
  static PosLexicon load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::unordered_map<std::string, std::string> tags_;
};

// Surface string -> canonical entity id, matched longest-first on token spans.
class EntityLexicon {
 public:
  void add(const std::string& surface, const std::string& canonical);
  // surface<TAB>canonical-id per line.
  static EntityLexicon load(const std::string& path);

  struct Match {
    std::size_t length = 0;  // in tokens; 0 = no match
    std::string canonical;
  };
  Match match(const std::vector<std::string>& lowered_tokens, std::size_t at) const;

 private:
  std::map<std::vector<std::string>, std::string> entries_;
  std::size_t max_len_ = 0;
};

struct AnonymizedQuestion {
  std::vector<std::string> tokens;
  std::map<std::uint32_t, std::string> entity_slots;               // slot -> surface
  std::map<std::uint32_t, std::vector<std::size_t>> mention_positions;
};

AnonymizedQuestion anonymize(std::string_view question, const EntityLexicon& entities);

// Substitutes slot surfaces back, re-tokenized.
std::vector<std::string> deanonymize(const AnonymizedQuestion& a);

struct Group {
  std::vector<std::string> members;
  std::vector<std::size_t> positions;  // into EncoderInput::tokens
  std::string pos_tag;
};

// Layout: groups g_1..g_k, [SEP], x_0..x_{n-1}, NIL.
struct EncoderInput {
  std::vector<std::string> tokens;  // anonymized tokens before grouping
  std::vector<Group> groups;
  std::size_t n_vars = 0;
  std::map<std::uint32_t, std::vector<std::size_t>> entity_groups;  // slot -> group indices

  std::size_t sep_position() const { return groups.size(); }
  std::size_t variable_position(std::size_t i) const { return groups.size() + 1 + i; }
  std::size_t nil_position() const { return groups.size() + 1 + n_vars; }
  std::size_t length() const { return groups.size() + 2 + n_vars; }
};

// Collapses maximal same-tag runs "w1 and w2 (and wi)*" into single groups,
// dropping the inner "and" tokens.
EncoderInput merge_groups(const AnonymizedQuestion& a, const PosLexicon& pos, std::size_t n_vars);

// Every token (including "and") becomes its own group.
EncoderInput degroup(const EncoderInput& e);

}  // namespace graphparse

#endif  // GRAPHPARSE_TEXT_PIPELINE_HPP_

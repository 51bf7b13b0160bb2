#include "graphparse/text_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "graphparse/errors.hpp"

namespace graphparse {

bool is_slot_token(std::string_view token) {
  if (token.size() < 2 || token[0] != 'M') return false;
  return std::all_of(token.begin() + 1, token.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string slot_token(std::uint32_t slot) { return "M" + std::to_string(slot); }

namespace {

std::vector<std::string> split_raw(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c) && ch != '_') {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void read_tsv_pairs(const std::string& path,
                                        std::vector<std::pair<std::string, std::string>>& out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected <key><TAB><value>");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  auto toks = split_raw(text);
  for (auto& t : toks)
    if (!is_slot_token(t)) t = lower(t);
  return toks;
}

std::string PosLexicon::tag(std::string_view token) const {
  auto it = tags_.find(std::string(token));
  if (it != tags_.end()) return it->second;
  if (token == "and") return std::string(kConjTag);
  if (is_slot_token(token)) return std::string(kEntityTag);
  return std::string(kOtherTag);
}

PosLexicon PosLexicon::load(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> rows;
  read_tsv_pairs(path, rows);
  PosLexicon lex;
  for (auto& [k, v] : rows) lex.set(k, v);
  return lex;
}

void PosLexicon::save(const std::string& path) const {
  std::vector<std::pair<std::string, std::string>> rows(tags_.begin(), tags_.end());
  std::sort(rows.begin(), rows.end());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write lexicon '" + path + "'");
  for (const auto& [k, v] : rows) out << k << '\t' << v << '\n';
}

void EntityLexicon::add(const std::string& surface, const std::string& canonical) {
  auto key = tokenize(surface);
  for (auto& t : key) t = lower(t);
  if (key.empty()) return;
  max_len_ = std::max(max_len_, key.size());
  entries_[std::move(key)] = canonical;
}

EntityLexicon EntityLexicon::load(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> rows;
  read_tsv_pairs(path, rows);
  EntityLexicon lex;
  for (auto& [k, v] : rows) lex.add(k, v);
  return lex;
}

EntityLexicon::Match EntityLexicon::match(const std::vector<std::string>& lowered, std::size_t at) const {
  const std::size_t longest = std::min(max_len_, lowered.size() - at);
  for (std::size_t len = longest; len >= 1; --len) {
    std::vector<std::string> key(lowered.begin() + static_cast<std::ptrdiff_t>(at),
                                 lowered.begin() + static_cast<std::ptrdiff_t>(at + len));
    auto it = entries_.find(key);
    if (it != entries_.end()) return {len, it->second};
  }
  return {};
}

AnonymizedQuestion anonymize(std::string_view question, const EntityLexicon& entities) {
  const auto raw = split_raw(question);
  std::vector<std::string> lowered(raw.size());
  std::transform(raw.begin(), raw.end(), lowered.begin(), lower);

  // Placeholders already present keep their ids; new slots skip them.
  std::set<std::uint32_t> reserved;
  for (const auto& t : raw)
    if (is_slot_token(t)) reserved.insert(static_cast<std::uint32_t>(std::stoul(t.substr(1))));

  AnonymizedQuestion a;
  std::map<std::string, std::uint32_t> slot_of;
  std::uint32_t next_slot = 0;
  auto fresh = [&] {
    while (reserved.count(next_slot)) ++next_slot;
    return next_slot++;
  };
  std::size_t i = 0;
  while (i < raw.size()) {
    if (is_slot_token(raw[i])) {
      const auto slot = static_cast<std::uint32_t>(std::stoul(raw[i].substr(1)));
      a.entity_slots.emplace(slot, raw[i]);
      a.mention_positions[slot].push_back(a.tokens.size());
      a.tokens.push_back(raw[i]);
      ++i;
      continue;
    }
    auto m = entities.match(lowered, i);
    if (m.length > 0) {
      auto [it, inserted] = slot_of.emplace(m.canonical, 0);
      if (inserted) {
        it->second = fresh();
        std::string surface;
        for (std::size_t j = i; j < i + m.length; ++j) surface += (j > i ? " " : "") + raw[j];
        a.entity_slots.emplace(it->second, surface);
      }
      a.mention_positions[it->second].push_back(a.tokens.size());
      a.tokens.push_back(slot_token(it->second));
      i += m.length;
      continue;
    }
    a.tokens.push_back(lowered[i]);
    ++i;
  }
  return a;
}

std::vector<std::string> deanonymize(const AnonymizedQuestion& a) {
  std::vector<std::string> out;
  for (const auto& t : a.tokens) {
    if (is_slot_token(t)) {
      auto it = a.entity_slots.find(static_cast<std::uint32_t>(std::stoul(t.substr(1))));
      if (it != a.entity_slots.end()) {
        for (auto& piece : split_raw(it->second)) out.push_back(std::move(piece));
        continue;
      }
    }
    out.push_back(t);
  }
  return out;
}

namespace {

bool mergeable(const std::string& tag) { return tag != kConjTag && tag != kOtherTag; }

void index_entities(EncoderInput& e) {
  e.entity_groups.clear();
  for (std::size_t g = 0; g < e.groups.size(); ++g) {
    for (const auto& m : e.groups[g].members) {
      if (!is_slot_token(m)) continue;
      auto& list = e.entity_groups[static_cast<std::uint32_t>(std::stoul(m.substr(1)))];
      if (list.empty() || list.back() != g) list.push_back(g);
    }
  }
}

}  // namespace

EncoderInput merge_groups(const AnonymizedQuestion& a, const PosLexicon& pos, std::size_t n_vars) {
  EncoderInput e;
  e.tokens = a.tokens;
  e.n_vars = n_vars;
  std::vector<std::string> tags(a.tokens.size());
  for (std::size_t i = 0; i < a.tokens.size(); ++i) tags[i] = pos.tag(a.tokens[i]);

  std::size_t i = 0;
  while (i < a.tokens.size()) {
    Group g;
    g.pos_tag = tags[i];
    g.members.push_back(a.tokens[i]);
    g.positions.push_back(i);
    std::size_t j = i + 1;
    if (mergeable(tags[i])) {
      while (j + 1 < a.tokens.size() && tags[j] == kConjTag && a.tokens[j] == "and" &&
             tags[j + 1] == tags[i]) {
        g.members.push_back(a.tokens[j + 1]);
        g.positions.push_back(j + 1);
        j += 2;
      }
    }
    e.groups.push_back(std::move(g));
    i = j;
  }
  index_entities(e);
  return e;
}

EncoderInput degroup(const EncoderInput& in) {
  EncoderInput e;
  e.tokens = in.tokens;
  e.n_vars = in.n_vars;
  // Tags survive from the grouped input where known; restored "and" is CONJ.
  std::vector<std::string> tags(in.tokens.size(), std::string(kConjTag));
  for (const auto& g : in.groups)
    for (auto p : g.positions) tags[p] = g.pos_tag;
  for (std::size_t i = 0; i < in.tokens.size(); ++i)
    e.groups.push_back(Group{{in.tokens[i]}, {i}, tags[i]});
  index_entities(e);
  return e;
}

}  // namespace graphparse

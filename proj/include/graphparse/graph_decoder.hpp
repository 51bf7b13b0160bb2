#ifndef GRAPHPARSE_GRAPH_DECODER_HPP_
#define GRAPHPARSE_GRAPH_DECODER_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "graphparse/autodiff.hpp"
#include "graphparse/config.hpp"
#include "graphparse/query_ir.hpp"

namespace graphparse {

template <typename T>
struct DecoderParams {
  Parameter<T>* relation = nullptr;  // R x 2d, or R x 3d when grounded
  Parameter<T>* query = nullptr;     // Q: d x 2d (grounded only)
  Parameter<T>* key = nullptr;       // K: d x d (grounded only)
  Parameter<T>* kind_w = nullptr;    // 1 x d (kind head only)
  Parameter<T>* kind_b = nullptr;    // 1 x 1

  static DecoderParams add_to(ParamSet<T>& params, std::size_t relations, std::size_t d, bool grounded,
                              bool kind_head);
  static DecoderParams bind(ParamSet<T>& params);
  bool grounded() const { return query != nullptr; }
};

// [h_s, h_o] for every ordered pair: P x 2d.
template <typename T>
Var pair_features(Tape<T>& tape, Var nodes, const std::vector<std::array<std::uint32_t, 2>>& pairs);

// Logits of P(s -r-> o) = sigmoid(w_r . [h_s, h_o]); P x R.
template <typename T>
Var score_plain(Tape<T>& tape, Var pair_feats, DecoderParams<T>& params, bool trainable);

template <typename T>
struct GroundedScores {
  Var logits;  // P x R
  Var alpha;   // P x (k+1), rows sum to 1
  Var grounded;  // z: P x d
};

// Logits of sigmoid(w_r . [h_s, h_o, z_so]) with z_so = sum_k alpha_k nu_k,
// alpha = softmax((Q[h_s,h_o]) . (K h_k) / sqrt(d)) over groups and NIL.
// `keys_src` holds the contextual h of each attended position and `values`
// the corresponding nu; both (k+1) x d.
template <typename T>
GroundedScores<T> score_grounded(Tape<T>& tape, Var pair_feats, Var keys_src, Var values,
                                 DecoderParams<T>& params, bool trainable);

// Logit of the Ask/Select head from the NIL-position contextual vector (1 x d).
template <typename T>
Var kind_logit(Tape<T>& tape, Var nil_hidden, DecoderParams<T>& params, bool trainable);

// Probabilities gathered from a forward pass, in double precision.
struct EdgeScores {
  std::vector<NodeRef> nodes;
  std::vector<std::array<std::uint32_t, 2>> pairs;
  std::size_t relations = 0;
  Tensor<double> probs;  // P x R
  Tensor<double> alpha;  // P x (k+1); empty unless grounded
  double kind_prob = 0.0;
  bool has_kind = false;

  // P[s, o, r]; 0 for masked self-pairs.
  double prob(std::size_t s, std::size_t o, std::size_t r) const;
};

// Edge (s, r, o) iff P > threshold; unused variables vanish; variables are
// renumbered canonically. Kind is Ask iff the head is enabled and p > 0.5.
ConjunctiveQuery decode(const EdgeScores& scores, double threshold = 0.5, const QueryOptions& options = {});

QueryKind classify_kind(const EdgeScores& scores);

}  // namespace graphparse

#endif  // GRAPHPARSE_GRAPH_DECODER_HPP_

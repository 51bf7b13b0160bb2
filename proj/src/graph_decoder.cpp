#include "graphparse/graph_decoder.hpp"

#include <cmath>

#include "graphparse/encoder.hpp"
#include "graphparse/errors.hpp"

namespace graphparse {

template <typename T>
DecoderParams<T> DecoderParams<T>::add_to(ParamSet<T>& params, std::size_t relations, std::size_t d,
                                          bool grounded, bool kind_head) {
  params.add("rel.w", Tensor<T>(relations, grounded ? 3 * d : 2 * d));
  if (grounded) {
    params.add("att.q", Tensor<T>(d, 2 * d));
    params.add("att.k", Tensor<T>(d, d));
  }
  if (kind_head) {
    params.add("kind.w", Tensor<T>(1, d));
    params.add("kind.b", Tensor<T>(1, 1));
  }
  return bind(params);
}

template <typename T>
DecoderParams<T> DecoderParams<T>::bind(ParamSet<T>& params) {
  DecoderParams p;
  p.relation = &params.at("rel.w");
  p.query = params.find("att.q");
  p.key = params.find("att.k");
  p.kind_w = params.find("kind.w");
  p.kind_b = params.find("kind.b");
  return p;
}

template <typename T>
Var pair_features(Tape<T>& tape, Var nodes, const std::vector<std::array<std::uint32_t, 2>>& pairs) {
  std::vector<std::vector<std::uint32_t>> subj, obj;
  subj.reserve(pairs.size());
  obj.reserve(pairs.size());
  for (const auto& p : pairs) {
    subj.push_back({p[0]});
    obj.push_back({p[1]});
  }
  return tape.concat_cols(tape.gather_sum(nodes, std::move(subj)), tape.gather_sum(nodes, std::move(obj)));
}

template <typename T>
Var score_plain(Tape<T>& tape, Var pair_feats, DecoderParams<T>& params, bool trainable) {
  const auto& w = params.relation->value;
  const auto& x = tape.value(pair_feats);
  if (w.cols() != x.cols())
    throw ContractViolation("relation weights are " + w.shape_string() + " but pair features are " +
                            x.shape_string());
  return tape.matmul_nt(pair_feats, leaf(tape, *params.relation, trainable));
}

template <typename T>
GroundedScores<T> score_grounded(Tape<T>& tape, Var pair_feats, Var keys_src, Var values,
                                 DecoderParams<T>& params, bool trainable) {
  if (!params.grounded()) throw ContractViolation("score_grounded needs attention parameters");
  const std::size_t d = params.key->value.cols();
  const auto& x = tape.value(pair_feats);
  if (x.cols() != 2 * d || params.relation->value.cols() != 3 * d)
    throw ContractViolation("grounded scoring expects 2d pair features and 3d relation weights, got " +
                            x.shape_string() + " and " + params.relation->value.shape_string());
  GroundedScores<T> out;
  const Var q = tape.matmul_nt(pair_feats, leaf(tape, *params.query, trainable));  // P x d
  const Var k = tape.matmul_nt(keys_src, leaf(tape, *params.key, trainable));      // (k+1) x d
  const Var a = tape.matmul_nt(q, k);                                              // P x (k+1)
  out.alpha = tape.softmax_rows(a, static_cast<T>(std::sqrt(static_cast<double>(d))));
  out.grounded = tape.matmul(out.alpha, values);  // P x d
  out.logits = tape.matmul_nt(tape.concat_cols(pair_feats, out.grounded), leaf(tape, *params.relation, trainable));
  return out;
}

template <typename T>
Var kind_logit(Tape<T>& tape, Var nil_hidden, DecoderParams<T>& params, bool trainable) {
  if (!params.kind_w) throw ContractViolation("kind head disabled");
  return tape.add(tape.matmul_nt(nil_hidden, leaf(tape, *params.kind_w, trainable)),
                  leaf(tape, *params.kind_b, trainable));
}

double EdgeScores::prob(std::size_t s, std::size_t o, std::size_t r) const {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i][0] == s && pairs[i][1] == o) return probs(i, r);
  return 0.0;
}

ConjunctiveQuery decode(const EdgeScores& scores, double threshold, const QueryOptions& options) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ContractViolation("threshold must lie in (0, 1)");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < scores.pairs.size(); ++i)
    for (std::size_t r = 0; r < scores.relations; ++r)
      if (scores.probs(i, r) > threshold)
        edges.push_back({scores.nodes[scores.pairs[i][0]], static_cast<std::uint32_t>(r),
                         scores.nodes[scores.pairs[i][1]]});
  ConjunctiveQuery q(std::move(edges), classify_kind(scores));
  return canonicalize(q, options);
}

QueryKind classify_kind(const EdgeScores& scores) {
  return scores.has_kind && scores.kind_prob > 0.5 ? QueryKind::Ask : QueryKind::Select;
}

template struct DecoderParams<float>;
template struct DecoderParams<double>;
template Var pair_features(Tape<float>&, Var, const std::vector<std::array<std::uint32_t, 2>>&);
template Var pair_features(Tape<double>&, Var, const std::vector<std::array<std::uint32_t, 2>>&);
template Var score_plain(Tape<float>&, Var, DecoderParams<float>&, bool);
template Var score_plain(Tape<double>&, Var, DecoderParams<double>&, bool);
template GroundedScores<float> score_grounded(Tape<float>&, Var, Var, Var, DecoderParams<float>&, bool);
template GroundedScores<double> score_grounded(Tape<double>&, Var, Var, Var, DecoderParams<double>&, bool);
template Var kind_logit(Tape<float>&, Var, DecoderParams<float>&, bool);
template Var kind_logit(Tape<double>&, Var, DecoderParams<double>&, bool);

}  // namespace graphparse

#ifndef GRAPHPARSE_ENCODER_HPP_
#define GRAPHPARSE_ENCODER_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "graphparse/autodiff.hpp"
#include "graphparse/config.hpp"
#include "graphparse/query_ir.hpp"
#include "graphparse/rng.hpp"
#include "graphparse/text_pipeline.hpp"
#include "graphparse/vocab.hpp"

namespace graphparse {

// An EncoderInput resolved against a vocabulary, plus the candidate node set
// and the ordered node pairs the decoder scores.
struct PreparedInput {
  EncoderInput input;
  std::vector<std::vector<std::uint32_t>> bags;  // word ids per sequence position
  std::vector<NodeRef> nodes;                    // entity slots ascending, then x_0..x_{n-1}
  std::vector<std::vector<std::uint32_t>> node_positions;
  std::vector<std::array<std::uint32_t, 2>> pairs;  // (subject, object) node indices

  std::size_t length() const { return bags.size(); }
  std::size_t group_count() const { return input.groups.size(); }
  // Sequence positions the grounding attention ranges over: groups, then NIL.
  std::vector<std::uint32_t> attention_positions() const;
};

// Throws DataError on out-of-vocabulary tokens (unless config.unk_for_oov)
// and CapacityError when the sequence exceeds config.max_length.
PreparedInput prepare_input(const EncoderInput& input, const WordVocab& vocab, const ModelConfig& config);

// Borrowed views into a ParamSet.
template <typename T>
struct EncoderParams {
  Parameter<T>* embed = nullptr;
  std::array<Parameter<T>*, 2> wx{}, wh{}, bias{};  // [0] forward, [1] backward
  Parameter<T>* proj_w = nullptr;
  Parameter<T>* proj_b = nullptr;

  static EncoderParams add_to(ParamSet<T>& params, std::size_t vocab_size, std::size_t d);
  static EncoderParams bind(ParamSet<T>& params);
};

template <typename T>
struct EncoderOutput {
  Var inputs;          // L x d, group embeddings (non-contextual)
  Var forward_states;  // L x d/2, before projection
  Var backward_states;
  Var hidden;  // L x d, contextual embeddings h
  Var nodes;   // N x d, node embeddings h_v
};

// Leaf helper: trainable parameters record gradients, frozen ones do not.
template <typename T>
Var leaf(Tape<T>& tape, Parameter<T>& p, bool trainable) {
  return trainable ? tape.param(p) : tape.frozen(p);
}

// Sum of member word embeddings.
template <typename T>
Tensor<T> embed_group(const Group& g, const WordVocab& vocab, const Tensor<T>& table);

// Bidirectional gated recurrent pass over group embeddings, projected to d.
template <typename T>
EncoderOutput<T> encode(Tape<T>& tape, const PreparedInput& in, EncoderParams<T>& params, bool trainable);

}  // namespace graphparse

#endif  // GRAPHPARSE_ENCODER_HPP_

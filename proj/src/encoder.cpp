#include "graphparse/encoder.hpp"

#include <algorithm>

#include "graphparse/errors.hpp"

namespace graphparse {

std::vector<std::uint32_t> PreparedInput::attention_positions() const {
  std::vector<std::uint32_t> pos;
  pos.reserve(group_count() + 1);
  for (std::size_t k = 0; k < group_count(); ++k) pos.push_back(static_cast<std::uint32_t>(k));
  pos.push_back(static_cast<std::uint32_t>(input.nil_position()));
  return pos;
}

namespace {

std::uint32_t lookup(const WordVocab& vocab, const std::string& token, bool unk_ok) {
  if (auto id = vocab.find(token)) return *id;
  if (unk_ok) return WordVocab::kUnk;
  throw DataError("out-of-vocabulary token '" + token + "'");
}

}  // namespace

PreparedInput prepare_input(const EncoderInput& input, const WordVocab& vocab, const ModelConfig& config) {
  if (input.n_vars != config.n_vars)
    throw ContractViolation("encoder input built for " + std::to_string(input.n_vars) +
                            " variables, model expects " + std::to_string(config.n_vars));
  if (input.length() > config.max_length)
    throw CapacityError("sequence of " + std::to_string(input.length()) + " positions exceeds limit " +
                        std::to_string(config.max_length));
  PreparedInput p;
  p.input = input;
  p.bags.reserve(input.length());
  for (const auto& g : input.groups) {
    std::vector<std::uint32_t> ids;
    for (const auto& m : g.members) ids.push_back(lookup(vocab, m, config.unk_for_oov));
    std::sort(ids.begin(), ids.end());
    p.bags.push_back(std::move(ids));
  }
  p.bags.push_back({WordVocab::kSep});
  for (std::size_t i = 0; i < input.n_vars; ++i) p.bags.push_back({WordVocab::variable(i)});
  p.bags.push_back({WordVocab::kNil});

  for (const auto& [slot, groups] : input.entity_groups) {
    p.nodes.push_back(NodeRef::entity(slot));
    std::vector<std::uint32_t> pos(groups.begin(), groups.end());
    p.node_positions.push_back(std::move(pos));
  }
  for (std::size_t i = 0; i < input.n_vars; ++i) {
    p.nodes.push_back(NodeRef::variable(static_cast<std::uint32_t>(i)));
    p.node_positions.push_back({static_cast<std::uint32_t>(input.variable_position(i))});
  }
  const auto n = static_cast<std::uint32_t>(p.nodes.size());
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t o = 0; o < n; ++o)
      if (s != o || config.allow_self_loops) p.pairs.push_back({s, o});
  return p;
}

template <typename T>
EncoderParams<T> EncoderParams<T>::add_to(ParamSet<T>& params, std::size_t vocab_size, std::size_t d) {
  const std::size_t h = d / 2;
  params.add("embed", Tensor<T>(vocab_size, d));
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string pre = std::string("lstm.") + dir;
    params.add(pre + ".wx", Tensor<T>(d, 4 * h));
    params.add(pre + ".wh", Tensor<T>(h, 4 * h));
    params.add(pre + ".b", Tensor<T>(1, 4 * h));
  }
  params.add("proj.w", Tensor<T>(d, d));
  params.add("proj.b", Tensor<T>(1, d));
  return bind(params);
}

template <typename T>
EncoderParams<T> EncoderParams<T>::bind(ParamSet<T>& params) {
  EncoderParams e;
  e.embed = &params.at("embed");
  const char* dirs[2] = {"fwd", "bwd"};
  for (int k = 0; k < 2; ++k) {
    const std::string pre = std::string("lstm.") + dirs[k];
    e.wx[k] = &params.at(pre + ".wx");
    e.wh[k] = &params.at(pre + ".wh");
    e.bias[k] = &params.at(pre + ".b");
  }
  e.proj_w = &params.at("proj.w");
  e.proj_b = &params.at("proj.b");
  return e;
}

template <typename T>
Tensor<T> embed_group(const Group& g, const WordVocab& vocab, const Tensor<T>& table) {
  std::vector<std::uint32_t> ids;
  for (const auto& m : g.members) ids.push_back(lookup(vocab, m, false));
  std::sort(ids.begin(), ids.end());
  Tensor<T> out(1, table.cols());
  for (auto id : ids)
    for (std::size_t c = 0; c < table.cols(); ++c) out[c] += table(id, c);
  return out;
}

namespace {

// One direction of an LSTM; gate order i, f, g, o. Returns L x h states in
// sequence order.
template <typename T>
Var run_lstm(Tape<T>& tape, Var inputs, std::size_t length, Var wx, Var wh, Var b, std::size_t h,
             bool reverse) {
  const Var pre = tape.add_row(tape.matmul(inputs, wx), b);
  std::vector<Var> states(length);
  Var h_prev, c_prev;
  for (std::size_t step = 0; step < length; ++step) {
    const std::size_t t = reverse ? length - 1 - step : step;
    Var gates = tape.slice_rows(pre, t, t + 1);
    if (h_prev.valid()) gates = tape.add(gates, tape.matmul(h_prev, wh));
    const Var i = tape.sigmoid(tape.slice_cols(gates, 0, h));
    const Var f = tape.sigmoid(tape.slice_cols(gates, h, 2 * h));
    const Var g = tape.tanh(tape.slice_cols(gates, 2 * h, 3 * h));
    const Var o = tape.sigmoid(tape.slice_cols(gates, 3 * h, 4 * h));
    Var c = tape.mul(i, g);
    if (c_prev.valid()) c = tape.add(c, tape.mul(f, c_prev));
    const Var hs = tape.mul(o, tape.tanh(c));
    states[t] = hs;
    h_prev = hs;
    c_prev = c;
  }
  return tape.concat_rows(states);
}

}  // namespace

template <typename T>
EncoderOutput<T> encode(Tape<T>& tape, const PreparedInput& in, EncoderParams<T>& params, bool trainable) {
  const std::size_t d = params.embed->value.cols();
  const std::size_t h = d / 2;
  const std::size_t length = in.length();
  EncoderOutput<T> out;
  out.inputs = tape.gather_sum(leaf(tape, *params.embed, trainable), in.bags);
  Var dirs[2];
  for (int k = 0; k < 2; ++k) {
    dirs[k] = run_lstm(tape, out.inputs, length, leaf(tape, *params.wx[k], trainable),
                       leaf(tape, *params.wh[k], trainable), leaf(tape, *params.bias[k], trainable), h,
                       k == 1);
  }
  out.forward_states = dirs[0];
  out.backward_states = dirs[1];
  const Var both = tape.concat_cols(dirs[0], dirs[1]);
  out.hidden = tape.add_row(tape.matmul(both, leaf(tape, *params.proj_w, trainable)),
                            leaf(tape, *params.proj_b, trainable));
  out.nodes = tape.gather_sum(out.hidden, in.node_positions);
  return out;
}

template struct EncoderParams<float>;
template struct EncoderParams<double>;
template Tensor<float> embed_group(const Group&, const WordVocab&, const Tensor<float>&);
template Tensor<double> embed_group(const Group&, const WordVocab&, const Tensor<double>&);
template EncoderOutput<float> encode(Tape<float>&, const PreparedInput&, EncoderParams<float>&, bool);
template EncoderOutput<double> encode(Tape<double>&, const PreparedInput&, EncoderParams<double>&, bool);

}  // namespace graphparse

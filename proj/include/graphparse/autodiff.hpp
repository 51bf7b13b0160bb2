#ifndef GRAPHPARSE_AUTODIFF_HPP_
#define GRAPHPARSE_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "graphparse/tensor.hpp"

namespace graphparse {

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op : std::uint8_t {
  Constant,
  Param,
  MatMul,    // A[m,k] B[k,n]
  MatMulNT,  // A[m,k] B[n,k]^T
  Add,
  AddRow,  // A[m,n] + b[1,n] on every row
  Mul,
  Scale,
  Sigmoid,
  Tanh,
  SoftmaxRows,
  ConcatCols,
  ConcatRows,
  SliceCols,
  SliceRows,
  GatherSum,  // out[i] = sum_{j in bag_i} A[j]
  Sum,        // all elements, or along one axis
  BceLogits,  // sum of binary cross-entropy of sigmoid(logits) vs targets
};

// Single-use reverse-mode tape. Nodes are appended in topological order;
// backward() walks them once in reverse and accumulates into Parameter::grad.
template <typename T>
class Tape {
 public:
  Var constant(Tensor<T> value);
  // Trainable leaf: backward() accumulates into p.grad. The tape keeps a
  // reference to p.value, so p must outlive the tape's use.
  Var param(Parameter<T>& p);
  // Non-trainable view of a parameter (inference).
  Var frozen(const Parameter<T>& p);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);
  Var mul(Var a, Var b);
  Var scale(Var a, T s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  // Row-wise exp(a_i / t) / sum_j exp(a_j / t), max-subtracted.
  Var softmax_rows(Var a, T temperature);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(Var a, Var b) { const Var p[2] = {a, b}; return concat_cols(p); }
  Var slice_cols(Var a, std::size_t begin, std::size_t end);
  Var slice_rows(Var a, std::size_t begin, std::size_t end);
  // Bags are summed in ascending index order, so member order never matters.
  Var gather_sum(Var a, std::vector<std::vector<std::uint32_t>> bags);
  Var embedding_lookup(Var table, std::span<const std::uint32_t> ids);
  // axis < 0: scalar total; axis 0: 1 x cols; axis 1: rows x 1.
  Var sum(Var a, int axis = -1);
  // Scalar: sum over elements of -[y log s(x) + (1-y) log(1 - s(x))].
  Var bce_with_logits(Var logits, Tensor<T> targets);

  const Tensor<T>& value(Var v) const { nodes_.at(static_cast<std::size_t>(v.id)); return val(v.id); }
  // Gradient of the loss w.r.t. a node; valid after backward().
  const Tensor<T>& grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).grad; }

  void backward(Var loss);
  void reset();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::Constant;
    std::vector<int> in;
    Tensor<T> value;
    Tensor<T> grad;
    const Tensor<T>* ref = nullptr;  // value lives in a Parameter
    Parameter<T>* param = nullptr;
    T scalar = T(0);
    std::size_t lo = 0, hi = 0;
    int axis = -1;
    std::vector<std::vector<std::uint32_t>> bags;
    Tensor<T> aux;  // BCE targets
  };

  Node& node(Var v);
  const Tensor<T>& val(int id) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.value;
  }
  const Tensor<T>& cval(Var v);
  Tensor<T>& grad_of(int id);
  Var push(Node n);
  void backward_node(Node& n);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace graphparse

#endif  // GRAPHPARSE_AUTODIFF_HPP_

#include "graphparse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace graphparse {

namespace {

template <typename T>
[[noreturn]] void shape_error(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  throw ContractViolation(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                          b.shape_string());
}

template <typename T>
void check_finite(const char* op, const Tensor<T>& t) {
#ifndef NDEBUG
  for (T v : t.values())
    if (!std::isfinite(v)) throw NumericError(std::string(op) + " produced a non-finite value");
#else
  (void)op;
  (void)t;
#endif
}

// C += A B
template <typename T>
void gemm_nn(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c.data() + i * n;
    const T* ai = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      const T* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C += A B^T
template <typename T>
void gemm_nt(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a.data() + i * k;
    T* ci = c.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b.data() + j * k;
      T s = T(0);
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// C += A^T B
template <typename T>
void gemm_tn(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a.data() + i * k;
    const T* bi = b.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      T* cp = c.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) {
    const T z = std::exp(-x);
    return T(1) / (T(1) + z);
  }
  const T z = std::exp(x);
  return z / (T(1) + z);
}

}  // namespace

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw ContractViolation("variable does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
const Tensor<T>& Tape<T>::cval(Var v) {
  node(v);
  return val(v.id);
}

template <typename T>
Tensor<T>& Tape<T>::grad_of(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  const auto& v = val(id);
  if (n.grad.size() != v.size()) n.grad = Tensor<T>(v.rows(), v.cols());
  return n.grad;
}

template <typename T>
Var Tape<T>::push(Node n) {
  if (backward_done_) throw ContractViolation("tape already consumed by backward(); call reset()");
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::param(Parameter<T>& p) {
  Node n;
  n.op = Op::Param;
  n.ref = &p.value;
  n.param = &p;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::frozen(const Parameter<T>& p) {
  Node n;
  n.op = Op::Constant;
  n.ref = &p.value;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::matmul(Var a, Var b) {
  const auto& A = cval(a);
  const auto& B = cval(b);
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  Node n;
  n.op = Op::MatMul;
  n.in = {a.id, b.id};
  n.value = Tensor<T>(A.rows(), B.cols());
  gemm_nn(A, B, n.value);
  check_finite("matmul", n.value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::matmul_nt(Var a, Var b) {
  const auto& A = cval(a);
  const auto& B = cval(b);
  if (A.cols() != B.cols()) shape_error("matmul_nt", A, B);
  Node n;
  n.op = Op::MatMulNT;
  n.in = {a.id, b.id};
  n.value = Tensor<T>(A.rows(), B.rows());
  gemm_nt(A, B, n.value);
  check_finite("matmul_nt", n.value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const auto& A = cval(a);
  const auto& B = cval(b);
  if (!A.same_shape(B)) shape_error("add", A, B);
  Node n;
  n.op = Op::Add;
  n.in = {a.id, b.id};
  n.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) n.value[i] += B[i];
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::add_row(Var a, Var row) {
  const auto& A = cval(a);
  const auto& R = cval(row);
  if (R.rows() != 1 || R.cols() != A.cols()) shape_error("add_row", A, R);
  Node n;
  n.op = Op::AddRow;
  n.in = {a.id, row.id};
  n.value = A;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) n.value(i, j) += R[j];
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  const auto& A = cval(a);
  const auto& B = cval(b);
  if (!A.same_shape(B)) shape_error("mul", A, B);
  Node n;
  n.op = Op::Mul;
  n.in = {a.id, b.id};
  n.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) n.value[i] *= B[i];
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::scale(Var a, T s) {
  Node n;
  n.op = Op::Scale;
  n.in = {a.id};
  n.scalar = s;
  n.value = cval(a);
  for (auto& v : n.value.values()) v *= s;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sigmoid(Var a) {
  Node n;
  n.op = Op::Sigmoid;
  n.in = {a.id};
  n.value = cval(a);
  for (auto& v : n.value.values()) v = stable_sigmoid(v);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::tanh(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.in = {a.id};
  n.value = cval(a);
  for (auto& v : n.value.values()) v = std::tanh(v);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::softmax_rows(Var a, T temperature) {
  if (!(temperature > T(0))) throw ContractViolation("softmax temperature must be positive");
  Node n;
  n.op = Op::SoftmaxRows;
  n.in = {a.id};
  n.scalar = temperature;
  n.value = cval(a);
  auto& Y = n.value;
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    T mx = Y(i, 0);
    for (std::size_t j = 1; j < Y.cols(); ++j) mx = std::max(mx, Y(i, j));
    T total = T(0);
    for (std::size_t j = 0; j < Y.cols(); ++j) {
      Y(i, j) = std::exp((Y(i, j) - mx) / temperature);
      total += Y(i, j);
    }
    for (std::size_t j = 0; j < Y.cols(); ++j) Y(i, j) /= total;
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  const std::size_t rows = cval(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    const auto& P = cval(p);
    if (P.rows() != rows) shape_error("concat_cols", cval(parts[0]), P);
    cols += P.cols();
  }
  Node n;
  n.op = Op::ConcatCols;
  n.value = Tensor<T>(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const auto& P = val(p.id);
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(P.data() + i * P.cols(), P.cols(), n.value.data() + i * cols + off);
    off += P.cols();
    n.in.push_back(p.id);
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
  const std::size_t cols = cval(parts[0]).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    const auto& P = cval(p);
    if (P.cols() != cols) shape_error("concat_rows", cval(parts[0]), P);
    rows += P.rows();
  }
  Node n;
  n.op = Op::ConcatRows;
  n.value = Tensor<T>(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const auto& P = val(p.id);
    std::copy_n(P.data(), P.size(), n.value.data() + off);
    off += P.size();
    n.in.push_back(p.id);
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::slice_cols(Var a, std::size_t begin, std::size_t end) {
  const auto& A = cval(a);
  if (begin >= end || end > A.cols())
    throw ContractViolation("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                            ") out of range for " + A.shape_string());
  Node n;
  n.op = Op::SliceCols;
  n.in = {a.id};
  n.lo = begin;
  n.hi = end;
  n.value = Tensor<T>(A.rows(), end - begin);
  for (std::size_t i = 0; i < A.rows(); ++i)
    std::copy_n(A.data() + i * A.cols() + begin, end - begin, n.value.data() + i * (end - begin));
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::slice_rows(Var a, std::size_t begin, std::size_t end) {
  const auto& A = cval(a);
  if (begin >= end || end > A.rows())
    throw ContractViolation("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) +
                            ") out of range for " + A.shape_string());
  Node n;
  n.op = Op::SliceRows;
  n.in = {a.id};
  n.lo = begin;
  n.hi = end;
  n.value = Tensor<T>(end - begin, A.cols());
  std::copy_n(A.data() + begin * A.cols(), (end - begin) * A.cols(), n.value.data());
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::gather_sum(Var a, std::vector<std::vector<std::uint32_t>> bags) {
  const auto& A = cval(a);
  Node n;
  n.op = Op::GatherSum;
  n.in = {a.id};
  n.value = Tensor<T>(bags.size(), A.cols());
  for (std::size_t i = 0; i < bags.size(); ++i) {
    auto& bag = bags[i];
    std::sort(bag.begin(), bag.end());
    T* out = n.value.data() + i * A.cols();
    for (auto j : bag) {
      if (j >= A.rows())
        throw ContractViolation("gather_sum: row " + std::to_string(j) + " out of range for " +
                                A.shape_string());
      const T* src = A.data() + j * A.cols();
      for (std::size_t c = 0; c < A.cols(); ++c) out[c] += src[c];
    }
  }
  n.bags = std::move(bags);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::embedding_lookup(Var table, std::span<const std::uint32_t> ids) {
  std::vector<std::vector<std::uint32_t>> bags;
  bags.reserve(ids.size());
  for (auto id : ids) bags.push_back({id});
  return gather_sum(table, std::move(bags));
}

template <typename T>
Var Tape<T>::sum(Var a, int axis) {
  const auto& A = cval(a);
  Node n;
  n.op = Op::Sum;
  n.in = {a.id};
  n.axis = axis;
  if (axis < 0) {
    T s = T(0);
    for (T v : A.values()) s += v;
    n.value = Tensor<T>(1, 1, s);
  } else if (axis == 0) {
    n.value = Tensor<T>(1, A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) n.value[j] += A(i, j);
  } else {
    n.value = Tensor<T>(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) n.value[i] += A(i, j);
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::bce_with_logits(Var logits, Tensor<T> targets) {
  const auto& X = cval(logits);
  if (!X.same_shape(targets)) shape_error("bce_with_logits", X, targets);
  T loss = T(0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const T x = X[i], y = targets[i];
    loss += std::max(x, T(0)) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  Node n;
  n.op = Op::BceLogits;
  n.in = {logits.id};
  n.value = Tensor<T>(1, 1, loss);
  n.aux = std::move(targets);
  check_finite("bce_with_logits", n.value);
  return push(std::move(n));
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (backward_done_) throw ContractViolation("backward() called twice without reset()");
  node(loss);
  if (val(loss.id).size() != 1)
    throw ContractViolation("backward() needs a scalar loss, got " + val(loss.id).shape_string());
  backward_done_ = true;
  grad_of(loss.id)[0] = T(1);
  for (int id = loss.id; id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) continue;  // not on a path to the loss
    backward_node(n);
  }
}

template <typename T>
void Tape<T>::backward_node(Node& n) {
  const Tensor<T>& G = n.grad;
  switch (n.op) {
    case Op::Constant:
      break;
    case Op::Param: {
      auto& pg = n.param->grad;
      for (std::size_t i = 0; i < G.size(); ++i) pg[i] += G[i];
      break;
    }
    case Op::MatMul: {
      const auto& A = val(n.in[0]);
      const auto& B = val(n.in[1]);
      gemm_nt(G, B, grad_of(n.in[0]));  // dA = G B^T
      gemm_tn(A, G, grad_of(n.in[1]));  // dB = A^T G
      break;
    }
    case Op::MatMulNT: {
      const auto& A = val(n.in[0]);
      const auto& B = val(n.in[1]);
      gemm_nn(G, B, grad_of(n.in[0]));  // dA = G B
      gemm_tn(G, A, grad_of(n.in[1]));  // dB = G^T A
      break;
    }
    case Op::Add: {
      for (int k = 0; k < 2; ++k) {
        auto& d = grad_of(n.in[static_cast<std::size_t>(k)]);
        for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
      }
      break;
    }
    case Op::AddRow: {
      auto& da = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.size(); ++i) da[i] += G[i];
      auto& db = grad_of(n.in[1]);
      for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < G.cols(); ++j) db[j] += G(i, j);
      break;
    }
    case Op::Mul: {
      const auto& A = val(n.in[0]);
      const auto& B = val(n.in[1]);
      auto& da = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.size(); ++i) da[i] += G[i] * B[i];
      auto& db = grad_of(n.in[1]);
      for (std::size_t i = 0; i < G.size(); ++i) db[i] += G[i] * A[i];
      break;
    }
    case Op::Scale: {
      auto& da = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.size(); ++i) da[i] += G[i] * n.scalar;
      break;
    }
    case Op::Sigmoid: {
      auto& da = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.size(); ++i) {
        const T y = n.value[i];
        da[i] += G[i] * y * (T(1) - y);
      }
      break;
    }
    case Op::Tanh: {
      auto& da = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.size(); ++i) {
        const T y = n.value[i];
        da[i] += G[i] * (T(1) - y * y);
      }
      break;
    }
    case Op::SoftmaxRows: {
      auto& da = grad_of(n.in[0]);
      const auto& Y = n.value;
      for (std::size_t i = 0; i < Y.rows(); ++i) {
        T dot = T(0);
        for (std::size_t j = 0; j < Y.cols(); ++j) dot += G(i, j) * Y(i, j);
        for (std::size_t j = 0; j < Y.cols(); ++j)
          da(i, j) += Y(i, j) * (G(i, j) - dot) / n.scalar;
      }
      break;
    }
    case Op::ConcatCols: {
      std::size_t off = 0;
      for (int in : n.in) {
        auto& d = grad_of(in);
        const std::size_t c = d.cols();
        for (std::size_t i = 0; i < G.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) d(i, j) += G(i, off + j);
        off += c;
      }
      break;
    }
    case Op::ConcatRows: {
      std::size_t off = 0;
      for (int in : n.in) {
        auto& d = grad_of(in);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[off + i];
        off += d.size();
      }
      break;
    }
    case Op::SliceCols: {
      auto& d = grad_of(n.in[0]);
      for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < G.cols(); ++j) d(i, n.lo + j) += G(i, j);
      break;
    }
    case Op::SliceRows: {
      auto& d = grad_of(n.in[0]);
      const std::size_t base = n.lo * d.cols();
      for (std::size_t i = 0; i < G.size(); ++i) d[base + i] += G[i];
      break;
    }
    case Op::GatherSum: {
      auto& d = grad_of(n.in[0]);
      const std::size_t c = d.cols();
      for (std::size_t i = 0; i < n.bags.size(); ++i)
        for (auto j : n.bags[i])
          for (std::size_t k = 0; k < c; ++k) d(j, k) += G(i, k);
      break;
    }
    case Op::Sum: {
      auto& d = grad_of(n.in[0]);
      for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
          d(i, j) += n.axis < 0 ? G[0] : (n.axis == 0 ? G[j] : G[i]);
      break;
    }
    case Op::BceLogits: {
      auto& d = grad_of(n.in[0]);
      const auto& X = val(n.in[0]);
      for (std::size_t i = 0; i < X.size(); ++i) d[i] += G[0] * (stable_sigmoid(X[i]) - n.aux[i]);
      break;
    }
  }
}

template <typename T>
void Tape<T>::reset() {
  nodes_.clear();
  backward_done_ = false;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace graphparse

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "reviewnet/rng.hpp"

namespace reviewnet {

/// Dense row-major 2-D array. Column vectors (n, 1) carry per-step LSTM
/// quantities; a batch of B examples is laid out as B columns.
template <typename Scalar>
using BasicTensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Tensor = BasicTensor<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.rows(), a.cols()) + " vs " +
                         shape_string(b.rows(), b.cols()));
  }
}

template <typename A, typename B>
BasicTensor<typename A::Scalar> matmul(const Eigen::MatrixBase<A>& a,
                                       const Eigen::MatrixBase<B>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(a.rows(), a.cols()) +
                         " x " + shape_string(b.rows(), b.cols()));
  }
  return a * b;
}

template <typename Scalar>
Scalar sigmoid_scalar(Scalar x) {
  // Branch on sign so exp() never overflows.
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
BasicTensor<typename Derived::Scalar> sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid_scalar(v); });
}

template <typename Derived>
BasicTensor<typename Derived::Scalar> tanh_act(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return std::tanh(v); });
}

template <typename Derived>
BasicTensor<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  BasicTensor<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar peak = x.row(r).maxCoeff();
    Scalar total = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out(r, c) = std::exp(x(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

/// Softmax down each column; the layout used when columns are batch items.
template <typename Derived>
BasicTensor<typename Derived::Scalar> softmax_cols(const Eigen::MatrixBase<Derived>& x) {
  return softmax_rows(x.transpose()).transpose();
}

/// [a b]: side by side, rows must agree.
template <typename A, typename B>
BasicTensor<typename A::Scalar> concat_cols(const Eigen::MatrixBase<A>& a,
                                            const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts differ " + shape_string(a.rows(), a.cols()) +
                         " vs " + shape_string(b.rows(), b.cols()));
  }
  BasicTensor<typename A::Scalar> out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

/// [a; b]: stacked, columns must agree. Builds [h_{t-1}; x_t] for the gates.
template <typename A, typename B>
BasicTensor<typename A::Scalar> concat_rows(const Eigen::MatrixBase<A>& a,
                                            const Eigen::MatrixBase<B>& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: column counts differ " +
                         shape_string(a.rows(), a.cols()) + " vs " +
                         shape_string(b.rows(), b.cols()));
  }
  BasicTensor<typename A::Scalar> out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

template <typename A, typename B>
BasicTensor<typename A::Scalar> add(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  require_same_shape(a, b, "add");
  return a + b;
}

template <typename A, typename B>
BasicTensor<typename A::Scalar> sub(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  require_same_shape(a, b, "sub");
  return a - b;
}

template <typename A, typename B>
BasicTensor<typename A::Scalar> hadamard(const Eigen::MatrixBase<A>& a,
                                         const Eigen::MatrixBase<B>& b) {
  require_same_shape(a, b, "hadamard");
  return a.cwiseProduct(b);
}

template <typename Derived>
BasicTensor<typename Derived::Scalar> scale(const Eigen::MatrixBase<Derived>& a,
                                            typename Derived::Scalar s) {
  return a * s;
}

template <typename Derived>
BasicTensor<typename Derived::Scalar> add_scalar(const Eigen::MatrixBase<Derived>& a,
                                                 typename Derived::Scalar s) {
  return a.array() + s;
}

/// Entries i.i.d. uniform on [-scale, +scale], drawn in row-major order.
template <typename Scalar = double>
BasicTensor<Scalar> init_uniform(Eigen::Index rows, Eigen::Index cols, SeededRng& rng,
                                 Scalar scale) {
  if (!(scale >= Scalar(0))) throw std::invalid_argument("init_uniform: scale must be >= 0");
  BasicTensor<Scalar> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      out(r, c) = static_cast<Scalar>(2.0 * rng.uniform() - 1.0) * scale;
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace reviewnet

#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace bsg {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// Dense array with `Rank` indices, each in [0, extent). Row-major offsets.
template <typename Scalar, int Rank>
class IndexArray {
 public:
  static_assert(Rank >= 1);

  IndexArray() = default;
  explicit IndexArray(int extent) : extent_(extent), data_(size_for(extent)) { data_.setZero(); }

  int extent() const { return extent_; }

  template <typename... I>
  Scalar& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(idx...)];
  }
  template <typename... I>
  Scalar operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(idx...)];
  }

  const VectorX<Scalar>& flat() const { return data_; }
  VectorX<Scalar>& flat() { return data_; }

  Scalar max_abs() const { return data_.size() == 0 ? Scalar(0) : data_.cwiseAbs().maxCoeff(); }

  IndexArray& operator+=(const IndexArray& o) { data_ += o.data_; return *this; }
  IndexArray& operator-=(const IndexArray& o) { data_ -= o.data_; return *this; }
  IndexArray& operator*=(Scalar s) { data_ *= s; return *this; }

  friend IndexArray operator+(IndexArray a, const IndexArray& b) { return a += b; }
  friend IndexArray operator-(IndexArray a, const IndexArray& b) { return a -= b; }
  friend IndexArray operator*(IndexArray a, Scalar s) { return a *= s; }
  friend IndexArray operator*(Scalar s, IndexArray a) { return a *= s; }

 private:
  static Eigen::Index size_for(int extent) {
    Eigen::Index n = 1;
    for (int r = 0; r < Rank; ++r) n *= extent;
    return n;
  }
  template <typename... I>
  Eigen::Index offset(I... idx) const {
    Eigen::Index off = 0;
    ((off = off * extent_ + static_cast<Eigen::Index>(idx)), ...);
    return off;
  }

  int extent_ = 0;
  VectorX<Scalar> data_;
};

/// Christoffel symbols of the second kind, `(k, i, j)` = Γ^k_ij.
using Christoffel = IndexArray<double, 3>;
/// Metric partial derivatives, `(k, i, j)` = ∂_k g_ij.
using MetricJacobian = IndexArray<double, 3>;
/// Riemann tensor, `(a, i, j, k)` = (R(∂_i, ∂_j) ∂_k)^a with
/// R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y].
using Riemann = IndexArray<double, 4>;

}  // namespace bsg

#pragma once

// Dense complex matrix and third-order tensor algebra used by every receiver.
//
// Tensor3 stores its entries column-major in (i1, i2, i3): entry (i1, i2, i3)
// lives at i1 + I1 * (i2 + I2 * i3). Frontal slices are therefore contiguous
// I1 x I2 column-major blocks, and the unfoldings are
//
//   mode 1: [A_1, ..., A_K]          I1 x (I3 I2), column i2 + I2 i3
//   mode 2: [A_1^T, ..., A_K^T]      I2 x (I3 I1), column i1 + I1 i3
//   mode 3: [vec A_1, ..., vec A_K]^T I3 x (I2 I1), column i1 + I1 i2
//
// where A_k is the k-th frontal slice and vec stacks columns.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hris/errors.hpp"

namespace hris {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct Dims3 {
  Index i1 = 0;
  Index i2 = 0;
  Index i3 = 0;

  Index size() const { return i1 * i2 * i3; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(Index i1, Index i2, Index i3) : Tensor3(Dims3{i1, i2, i3}) {}

  explicit Tensor3(Dims3 dims) : dims_(dims) {
    if (dims.i1 < 0 || dims.i2 < 0 || dims.i3 < 0) {
      throw DimensionError("Tensor3: negative dimension");
    }
    data_.assign(static_cast<std::size_t>(dims.size()), cplx{0.0, 0.0});
  }

  /// Stacks equally-shaped matrices as frontal slices.
  static Tensor3 from_slices(std::span<const CMatrix> slices) {
    if (slices.empty()) throw DimensionError("Tensor3::from_slices: no slices");
    Tensor3 t(slices.front().rows(), slices.front().cols(),
              static_cast<Index>(slices.size()));
    for (Index k = 0; k < t.dims_.i3; ++k) t.set_slice(k, slices[k]);
    return t;
  }

  const Dims3& dims() const { return dims_; }
  Index size() const { return dims_.size(); }

  cplx& operator()(Index a, Index b, Index c) {
    return data_[static_cast<std::size_t>(offset(a, b, c))];
  }
  const cplx& operator()(Index a, Index b, Index c) const {
    return data_[static_cast<std::size_t>(offset(a, b, c))];
  }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  Eigen::Map<const CMatrix> slice_view(Index k) const {
    check_slice(k);
    return {data_.data() + k * dims_.i1 * dims_.i2, dims_.i1, dims_.i2};
  }
  Eigen::Map<CMatrix> slice_view(Index k) {
    check_slice(k);
    return {data_.data() + k * dims_.i1 * dims_.i2, dims_.i1, dims_.i2};
  }

  CMatrix slice(Index k) const { return slice_view(k); }

  void set_slice(Index k, const CMatrix& m) {
    if (m.rows() != dims_.i1 || m.cols() != dims_.i2) {
      throw DimensionError("Tensor3::set_slice: slice shape mismatch");
    }
    slice_view(k) = m;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return s;
  }

  Tensor3& operator+=(const Tensor3& other) {
    if (!(dims_ == other.dims_)) throw DimensionError("Tensor3 +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) {
    if (!(a.dims_ == b.dims_)) throw DimensionError("Tensor3 -: shape mismatch");
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

  friend Tensor3 operator*(Tensor3 a, cplx s) {
    for (auto& v : a.data_) v *= s;
    return a;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Index offset(Index a, Index b, Index c) const {
    return a + dims_.i1 * (b + dims_.i2 * c);
  }
  void check_slice(Index k) const {
    if (k < 0 || k >= dims_.i3) throw DimensionError("Tensor3: slice index out of range");
  }

  Dims3 dims_{};
  std::vector<cplx> data_;
};

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

namespace detail {

inline void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw DimensionError("invalid unfolding mode " + std::to_string(mode) +
                         " (expected 1, 2 or 3)");
  }
}

inline std::array<Index, 2> unfolding_shape(const Dims3& d, int mode) {
  switch (mode) {
    case 1: return {d.i1, d.i3 * d.i2};
    case 2: return {d.i2, d.i3 * d.i1};
    default: return {d.i3, d.i2 * d.i1};
  }
}

}  // namespace detail

inline CMatrix unfold(const Tensor3& t, int mode) {
  detail::check_mode(mode);
  const auto& d = t.dims();
  const auto [rows, cols] = detail::unfolding_shape(d, mode);
  CMatrix m(rows, cols);
  for (Index c = 0; c < d.i3; ++c) {
    for (Index b = 0; b < d.i2; ++b) {
      for (Index a = 0; a < d.i1; ++a) {
        const cplx v = t(a, b, c);
        switch (mode) {
          case 1: m(a, b + d.i2 * c) = v; break;
          case 2: m(b, a + d.i1 * c) = v; break;
          default: m(c, a + d.i1 * b) = v; break;
        }
      }
    }
  }
  return m;
}

inline Tensor3 fold(const CMatrix& m, int mode, Dims3 dims) {
  detail::check_mode(mode);
  const auto [rows, cols] = detail::unfolding_shape(dims, mode);
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", mode-" + std::to_string(mode) +
                         " unfolding needs " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  Tensor3 t(dims);
  for (Index c = 0; c < dims.i3; ++c) {
    for (Index b = 0; b < dims.i2; ++b) {
      for (Index a = 0; a < dims.i1; ++a) {
        switch (mode) {
          case 1: t(a, b, c) = m(a, b + dims.i2 * c); break;
          case 2: t(a, b, c) = m(b, a + dims.i1 * c); break;
          default: t(a, b, c) = m(c, a + dims.i1 * b); break;
        }
      }
    }
  }
  return t;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Column-wise Kronecker product: column p is kron(a.col(p), b.col(p)).
inline CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
  }
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Index p = 0; p < a.cols(); ++p) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.col(p).segment(i * b.rows(), b.rows()) = a(i, p) * b.col(p);
    }
  }
  return out;
}

/// Column-stacking vectorization, returned as a single-column matrix.
inline CMatrix vec(const CMatrix& m) {
  return m.reshaped(m.size(), 1);
}

inline CMatrix unvec(const CMatrix& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) + " cannot fill " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  return v.reshaped(rows, cols);
}

inline CMatrix diag(const CMatrix& v) {
  return v.reshaped().asDiagonal();
}

/// n-mode product: unfold(result, mode) == m * unfold(t, mode).
inline Tensor3 mode_n_product(const Tensor3& t, const CMatrix& m, int mode) {
  detail::check_mode(mode);
  Dims3 out = t.dims();
  Index* target = mode == 1 ? &out.i1 : mode == 2 ? &out.i2 : &out.i3;
  if (m.cols() != *target) {
    throw DimensionError("mode_n_product: matrix has " + std::to_string(m.cols()) +
                         " columns, mode " + std::to_string(mode) + " has size " +
                         std::to_string(*target));
  }
  *target = m.rows();
  return fold(m * unfold(t, mode), mode, out);
}

/// Slice-wise product sharing the third mode: C(:,:,k) = A(:,:,k) B(:,:,k).
///
/// This is the only specialization of the general mode-wise contraction the
/// receivers need (contracting mode 2 of `a` against mode 1 of `b`).
inline Tensor3 modewise_contraction(const Tensor3& a, const Tensor3& b) {
  const auto& da = a.dims();
  const auto& db = b.dims();
  if (da.i3 != db.i3 || da.i2 != db.i1) {
    throw DimensionError("modewise_contraction: slices are not conformable");
  }
  Tensor3 c(da.i1, db.i2, da.i3);
  for (Index k = 0; k < da.i3; ++k) c.slice_view(k) = a.slice_view(k) * b.slice_view(k);
  return c;
}

/// Default relative threshold for pinv: max(rows, cols) * machine epsilon.
inline double default_pinv_tolerance(const CMatrix& m) {
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon();
}

/// Moore-Penrose pseudo-inverse. Singular values at or below tol * sigma_max
/// are discarded; a negative tol selects the default threshold.
inline CMatrix pinv(const CMatrix& m, double tol = -1.0) {
  if (m.size() == 0) return CMatrix::Zero(m.cols(), m.rows());
  if (tol < 0.0) tol = default_pinv_tolerance(m);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = tol * (s.size() > 0 ? s(0) : 0.0);
  CMatrix out = CMatrix::Zero(m.cols(), m.rows());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff || s(i) == 0.0) break;
    out.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).adjoint();
  }
  return out;
}

/// Number of singular values above rel_tol * sigma_max.
inline Index numerical_rank(const CMatrix& m, double rel_tol = 1e-10) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

struct Rank1 {
  CVector u;
  double sigma = 0.0;
  CVector v;

  /// sigma * u * v^H
  CMatrix reconstruct() const { return sigma * u * v.adjoint(); }
};

/// Dominant singular triplet of m. The phase is fixed by making the
/// largest-magnitude entry of u real and positive (ties go to the lowest index).
inline Rank1 rank1_approx(const CMatrix& m) {
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    throw RankDeficiencyError("rank1_approx: input matrix is zero");
  }
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Rank1 r{svd.matrixU().col(0), svd.singularValues()(0), svd.matrixV().col(0)};
  Index pivot = 0;
  r.u.cwiseAbs().maxCoeff(&pivot);
  const cplx phase = std::polar(1.0, -std::arg(r.u(pivot)));
  r.u *= phase;
  r.v *= phase;
  r.u(pivot) = cplx{r.u(pivot).real(), 0.0};
  return r;
}

}  // namespace hris

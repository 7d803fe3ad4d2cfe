// Exact dense linear algebra free functions over field scalars.
//
// Everything here works for any exact field scalar with Eigen NumTraits
// (Rat, Fp<P>). Pivots are chosen as the first nonzero entry of a column —
// magnitude pivoting is meaningless over exact fields — and full reduced
// row echelon form is produced, so bases and coordinates are canonical.
#pragma once

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

#include "nctk/rat.hpp"

namespace nctk {

namespace detail {
template <typename S> inline bool nonzero(const S& x) { return !(x == S(0)); }
} // namespace detail

// Reduce `m` to reduced row echelon form in place. Returns the rank and the
// pivot column of each of the first `rank` rows.
template <typename S>
int rref_in_place(Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& m,
                  std::vector<int>* pivot_cols = nullptr) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  if (pivot_cols) pivot_cols->clear();
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    for (int i = r; i < rows; ++i) {
      if (detail::nonzero(m(i, c))) { piv = i; break; }
    }
    if (piv < 0) continue;
    if (piv != r) m.row(piv).swap(m.row(r));
    const S lead = m(r, c);
    if (!(lead == S(1))) m.row(r) /= lead;
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      if (detail::nonzero(m(i, c))) {
        const S f = m(i, c);
        m.row(i) -= f * m.row(r);
      }
    }
    if (pivot_cols) pivot_cols->push_back(c);
    ++r;
  }
  return r;
}

template <typename D>
int rank_of(const Eigen::MatrixBase<D>& a) {
  using S = typename D::Scalar;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> m = a;
  return rref_in_place(m);
}

// Columns of the result form a basis of the right kernel {x : a x = 0}.
template <typename D>
Eigen::Matrix<typename D::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kernel_basis(const Eigen::MatrixBase<D>& a) {
  using S = typename D::Scalar;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  Mat m = a;
  std::vector<int> piv;
  const int rank = rref_in_place(m, &piv);
  const int cols = static_cast<int>(m.cols());
  std::vector<bool> is_piv(cols, false);
  for (int c : piv) is_piv[c] = true;
  Mat k(cols, cols - rank);
  k.setZero();
  int out = 0;
  for (int c = 0; c < cols; ++c) {
    if (is_piv[c]) continue;
    k(c, out) = S(1);
    for (int r = 0; r < rank; ++r) k(piv[r], out) = -m(r, c);
    ++out;
  }
  return k;
}

// One solution of a x = b, if any.
template <typename DA, typename DB>
std::optional<Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, 1>>
solve_linear(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using S = typename DA::Scalar;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  Mat aug(a.rows(), a.cols() + 1);
  aug.leftCols(a.cols()) = a;
  aug.col(a.cols()) = b;
  std::vector<int> piv;
  const int rank = rref_in_place(aug, &piv);
  for (int r = 0; r < rank; ++r) {
    if (piv[r] == static_cast<int>(a.cols())) return std::nullopt; // inconsistent
  }
  Vec x = Vec::Zero(a.cols());
  for (int r = 0; r < rank; ++r) x(piv[r]) = aug(r, a.cols());
  return x;
}

// A subspace of a fixed coordinate space, maintained as canonical RREF rows.
// insert() is the workhorse of every ideal/center/filtration closure loop.
template <typename S> class Subspace {
public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  explicit Subspace(int ambient) : ambient_(ambient) {}

  int ambient_dim() const { return ambient_; }
  int dim() const { return static_cast<int>(rows_.size()); }

  // Reduce v against the current rows; returns the residue.
  Vec reduce(Vec v) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const S& x = v(pivots_[i]);
      if (detail::nonzero(x)) {
        const S f = x;
        v -= f * rows_[i];
      }
    }
    return v;
  }

  bool contains(const Vec& v) const {
    Vec r = reduce(v);
    for (int i = 0; i < r.size(); ++i) {
      if (detail::nonzero(r(i))) return false;
    }
    return true;
  }

  // Returns true if v was independent (the subspace grew).
  bool insert(const Vec& v) {
    Vec r = reduce(v);
    int p = -1;
    for (int i = 0; i < r.size(); ++i) {
      if (detail::nonzero(r(i))) { p = i; break; }
    }
    if (p < 0) return false;
    const S lead = r(p);
    if (!(lead == S(1))) r /= lead;
    // Back-substitute into existing rows to keep full RREF.
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const S& x = rows_[i](p);
      if (detail::nonzero(x)) {
        const S f = x;
        rows_[i] -= f * r;
      }
    }
    // Keep rows ordered by pivot column.
    std::size_t at = 0;
    while (at < pivots_.size() && pivots_[at] < p) ++at;
    rows_.insert(rows_.begin() + at, std::move(r));
    pivots_.insert(pivots_.begin() + at, p);
    return true;
  }

  void insert_all(const Mat& cols_as_vectors) {
    for (int c = 0; c < cols_as_vectors.cols(); ++c) insert(cols_as_vectors.col(c));
  }

  const std::vector<Vec>& rows() const { return rows_; }
  const std::vector<int>& pivots() const { return pivots_; }

  // Basis as matrix columns (canonical order).
  Mat basis_cols() const {
    Mat b(ambient_, dim());
    for (int i = 0; i < dim(); ++i) b.col(i) = rows_[i];
    return b;
  }

  // Coordinates of v in the pivot-indexed basis, if v lies in the subspace.
  std::optional<Vec> coords_of(const Vec& v) const {
    Vec c(dim());
    Vec r = v;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      c(static_cast<int>(i)) = r(pivots_[i]);
      if (detail::nonzero(c(static_cast<int>(i)))) r -= c(static_cast<int>(i)) * rows_[i];
    }
    for (int i = 0; i < r.size(); ++i) {
      if (detail::nonzero(r(i))) return std::nullopt;
    }
    return c;
  }

  bool same_as(const Subspace& other) const {
    if (dim() != other.dim()) return false;
    for (const auto& row : other.rows_) {
      if (!contains(row)) return false;
    }
    return true;
  }

private:
  int ambient_ = 0;
  std::vector<Vec> rows_;   // RREF rows, pivot-sorted
  std::vector<int> pivots_;
};

using SubspaceQ = Subspace<Rat>;

} // namespace nctk

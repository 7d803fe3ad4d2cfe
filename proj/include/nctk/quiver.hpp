#pragma once

// Quiver representations and their deformation complex.
//
// A representation of a quiver Q assigns a finite-dimensional vector space
// to every vertex and a matrix e_a : k^{n_t(a)} -> k^{n_h(a)} to every arrow.
// Its deformations are controlled by the two-term complex
//
//   E0 = prod_v End(k^{n_v})  --d_e-->  E1 = prod_a Hom(k^{n_t(a)}, k^{n_h(a)}),
//   d_e(phi)_a = phi_{h(a)} e_a - e_a phi_{t(a)},
//
// whose kernel is End of the representation and whose cokernel is Ext^1.
// This header computes both over a field (with an independent oracle for
// Ext^1 through the Euler form of the path algebra), and over polynomial
// and Laurent-polynomial chart bases, where a unit-pivot column reduction
// certifies the cohomology as free modules and yields canonical class
// representatives.  On top of that sit the Kodaira-Spencer map of a chart
// family and the excellence certificate: H^0 reduced to base scalars and
// KS an isomorphism from the tangent sheaf onto H^1.

#include <Eigen/Core>

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nctk/cpoly.hpp"
#include "nctk/fp.hpp"
#include "nctk/linalg.hpp"
#include "nctk/rat.hpp"

namespace nctk {

// ---------------------------------------------------------------------------
// Exact coefficient embedding Q -> S.

namespace detail {

template <typename S>
struct RatEmbed;

template <>
struct RatEmbed<Rat> {
  static Rat of(const Rat& r) { return r; }
};

template <unsigned P>
struct RatEmbed<Fp<P>> {
  static Fp<P> of(const Rat& r) {
    const unsigned long num = mpz_fdiv_ui(r.get_num().get_mpz_t(), P);
    const unsigned long den = mpz_fdiv_ui(r.get_den().get_mpz_t(), P);
    if (den == 0)
      throw std::domain_error("scalar_of_rat: denominator vanishes mod p");
    return Fp<P>(static_cast<long long>(num)) /
           Fp<P>(static_cast<long long>(den));
  }
};

}  // namespace detail

template <typename S>
S scalar_of_rat(const Rat& r) {
  return detail::RatEmbed<S>::of(r);
}

// ---------------------------------------------------------------------------
// Quivers.

struct Quiver {
  struct Arrow {
    int tail = 0;
    int head = 0;
  };

  int vertices = 0;
  std::vector<Arrow> arrows;

  void validate() const {
    if (vertices <= 0)
      throw std::invalid_argument("quiver: need at least one vertex");
    for (const auto& a : arrows)
      if (a.tail < 0 || a.tail >= vertices || a.head < 0 || a.head >= vertices)
        throw std::invalid_argument("quiver: arrow endpoint out of range");
  }

  // two vertices, all arrows from 0 to 1
  static Quiver kronecker(int arrow_count) {
    Quiver q;
    q.vertices = 2;
    for (int i = 0; i < arrow_count; ++i) q.arrows.push_back({0, 1});
    return q;
  }

  // one vertex, loop_count loops
  static Quiver loop(int loop_count) {
    Quiver q;
    q.vertices = 1;
    for (int i = 0; i < loop_count; ++i) q.arrows.push_back({0, 0});
    return q;
  }
};

// Euler form of the (hereditary) path algebra:
//   <n, m> = sum_v n_v m_v - sum_a n_{t(a)} m_{h(a)}.
inline long long euler_form(const Quiver& q, const std::vector<int>& n,
                            const std::vector<int>& m) {
  if (static_cast<int>(n.size()) != q.vertices ||
      static_cast<int>(m.size()) != q.vertices)
    throw std::invalid_argument("euler_form: dimension vector size mismatch");
  long long s = 0;
  for (int v = 0; v < q.vertices; ++v)
    s += static_cast<long long>(n[static_cast<std::size_t>(v)]) *
         m[static_cast<std::size_t>(v)];
  for (const auto& a : q.arrows)
    s -= static_cast<long long>(n[static_cast<std::size_t>(a.tail)]) *
         m[static_cast<std::size_t>(a.head)];
  return s;
}

// ---------------------------------------------------------------------------
// Coordinate layout of the complex.
//
// E0 coordinates are vertex-major, entries row-major: (v, r, c) with
// r, c < n_v.  E1 coordinates are arrow-major, entries row-major: (a, r, c)
// with r < n_{h(a)}, c < n_{t(a)}.

struct ComplexLayout {
  std::vector<int> dims;
  std::vector<Quiver::Arrow> arrows;
  std::vector<int> off0, off1;
  int dim0 = 0, dim1 = 0;

  static ComplexLayout of(const Quiver& q, const std::vector<int>& dims) {
    q.validate();
    if (static_cast<int>(dims.size()) != q.vertices)
      throw std::invalid_argument("layout: dimension vector size mismatch");
    for (int d : dims)
      if (d < 0) throw std::invalid_argument("layout: negative dimension");
    ComplexLayout L;
    L.dims = dims;
    L.arrows = q.arrows;
    for (int v = 0; v < q.vertices; ++v) {
      L.off0.push_back(L.dim0);
      L.dim0 += dims[static_cast<std::size_t>(v)] *
                dims[static_cast<std::size_t>(v)];
    }
    for (const auto& a : q.arrows) {
      L.off1.push_back(L.dim1);
      L.dim1 += dims[static_cast<std::size_t>(a.head)] *
                dims[static_cast<std::size_t>(a.tail)];
    }
    return L;
  }

  int idx0(int v, int r, int c) const {
    return off0[static_cast<std::size_t>(v)] +
           r * dims[static_cast<std::size_t>(v)] + c;
  }
  int idx1(int a, int r, int c) const {
    return off1[static_cast<std::size_t>(a)] +
           r * dims[static_cast<std::size_t>(
                   arrows[static_cast<std::size_t>(a)].tail)] +
           c;
  }
};

// ---------------------------------------------------------------------------
// Representations over a field.

template <typename S>
struct QuiverRepT {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Quiver quiver;
  std::vector<int> dims;        // one per vertex
  std::vector<Mat> mats;        // mats[a]: dims[head] x dims[tail]

  void validate() const {
    quiver.validate();
    if (static_cast<int>(dims.size()) != quiver.vertices)
      throw std::invalid_argument("rep: dimension vector size mismatch");
    for (int d : dims)
      if (d < 0) throw std::invalid_argument("rep: negative dimension");
    if (mats.size() != quiver.arrows.size())
      throw std::invalid_argument("rep: arrow matrix count mismatch");
    for (std::size_t a = 0; a < mats.size(); ++a) {
      const auto& ar = quiver.arrows[a];
      if (mats[a].rows() != dims[static_cast<std::size_t>(ar.head)] ||
          mats[a].cols() != dims[static_cast<std::size_t>(ar.tail)])
        throw std::invalid_argument("rep: arrow matrix shape mismatch");
    }
  }

  ComplexLayout layout() const { return ComplexLayout::of(quiver, dims); }
};

using QuiverRep = QuiverRepT<Rat>;

// d_e applied blockwise: phi is one square matrix per vertex.
template <typename S>
std::vector<typename QuiverRepT<S>::Mat> d_e_apply(
    const QuiverRepT<S>& rep,
    const std::vector<typename QuiverRepT<S>::Mat>& phi) {
  if (static_cast<int>(phi.size()) != rep.quiver.vertices)
    throw std::invalid_argument("d_e_apply: block count mismatch");
  for (int v = 0; v < rep.quiver.vertices; ++v)
    if (phi[static_cast<std::size_t>(v)].rows() !=
            rep.dims[static_cast<std::size_t>(v)] ||
        phi[static_cast<std::size_t>(v)].cols() !=
            rep.dims[static_cast<std::size_t>(v)])
      throw std::invalid_argument("d_e_apply: block shape mismatch");
  std::vector<typename QuiverRepT<S>::Mat> out;
  for (std::size_t a = 0; a < rep.mats.size(); ++a) {
    const auto& ar = rep.quiver.arrows[a];
    out.push_back(phi[static_cast<std::size_t>(ar.head)] * rep.mats[a] -
                  rep.mats[a] * phi[static_cast<std::size_t>(ar.tail)]);
  }
  return out;
}

// Matrix of d_e in the layout coordinates (dim1 x dim0).
template <typename S>
typename QuiverRepT<S>::Mat de_matrix(const QuiverRepT<S>& rep) {
  rep.validate();
  const ComplexLayout L = rep.layout();
  using Mat = typename QuiverRepT<S>::Mat;
  Mat D = Mat::Zero(L.dim1, L.dim0);
  for (std::size_t a = 0; a < rep.mats.size(); ++a) {
    const auto& ar = rep.quiver.arrows[a];
    const Mat& e = rep.mats[a];
    const int nh = rep.dims[static_cast<std::size_t>(ar.head)];
    const int nt = rep.dims[static_cast<std::size_t>(ar.tail)];
    // (E_{rc} e)(r, c') = e(c, c') at vertex h(a)
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nh; ++c)
        for (int cp = 0; cp < nt; ++cp)
          D(L.idx1(static_cast<int>(a), r, cp), L.idx0(ar.head, r, c)) +=
              e(c, cp);
    // (e E_{rc})(r', c) = e(r', r) at vertex t(a), subtracted
    for (int r = 0; r < nt; ++r)
      for (int c = 0; c < nt; ++c)
        for (int rp = 0; rp < nh; ++rp)
          D(L.idx1(static_cast<int>(a), rp, c), L.idx0(ar.tail, r, c)) -=
              e(rp, r);
  }
  return D;
}

// Pack / unpack between block form and layout coordinates.
template <typename S>
typename QuiverRepT<S>::Vec pack0(
    const ComplexLayout& L,
    const std::vector<typename QuiverRepT<S>::Mat>& phi) {
  typename QuiverRepT<S>::Vec out =
      QuiverRepT<S>::Vec::Zero(L.dim0);
  for (std::size_t v = 0; v < phi.size(); ++v)
    for (int r = 0; r < phi[v].rows(); ++r)
      for (int c = 0; c < phi[v].cols(); ++c)
        out(L.idx0(static_cast<int>(v), r, c)) = phi[v](r, c);
  return out;
}

template <typename S>
std::vector<typename QuiverRepT<S>::Mat> unpack0(
    const ComplexLayout& L, const typename QuiverRepT<S>::Vec& x) {
  std::vector<typename QuiverRepT<S>::Mat> phi;
  for (std::size_t v = 0; v < L.dims.size(); ++v) {
    const int n = L.dims[v];
    typename QuiverRepT<S>::Mat m = QuiverRepT<S>::Mat::Zero(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = x(L.idx0(static_cast<int>(v), r, c));
    phi.push_back(std::move(m));
  }
  return phi;
}

template <typename S>
typename QuiverRepT<S>::Vec pack1(
    const ComplexLayout& L,
    const std::vector<typename QuiverRepT<S>::Mat>& psi) {
  typename QuiverRepT<S>::Vec out =
      QuiverRepT<S>::Vec::Zero(L.dim1);
  for (std::size_t a = 0; a < psi.size(); ++a)
    for (int r = 0; r < psi[a].rows(); ++r)
      for (int c = 0; c < psi[a].cols(); ++c)
        out(L.idx1(static_cast<int>(a), r, c)) = psi[a](r, c);
  return out;
}

template <typename S>
std::vector<typename QuiverRepT<S>::Mat> unpack1(
    const ComplexLayout& L, const typename QuiverRepT<S>::Vec& x) {
  std::vector<typename QuiverRepT<S>::Mat> psi;
  for (std::size_t a = 0; a < L.arrows.size(); ++a) {
    const int nh = L.dims[static_cast<std::size_t>(L.arrows[a].head)];
    const int nt = L.dims[static_cast<std::size_t>(L.arrows[a].tail)];
    typename QuiverRepT<S>::Mat m = QuiverRepT<S>::Mat::Zero(nh, nt);
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nt; ++c) m(r, c) = x(L.idx1(static_cast<int>(a), r, c));
    psi.push_back(std::move(m));
  }
  return psi;
}

// H^0 = End of the representation: kernel of d_e, as blocks per vertex.
template <typename S>
struct EndBasisT {
  int dim = 0;
  std::vector<std::vector<typename QuiverRepT<S>::Mat>> basis;
};

template <typename S>
EndBasisT<S> h0_end(const QuiverRepT<S>& rep) {
  const ComplexLayout L = rep.layout();
  const typename QuiverRepT<S>::Mat K = kernel_basis(de_matrix(rep));
  EndBasisT<S> out;
  out.dim = static_cast<int>(K.cols());
  for (int j = 0; j < K.cols(); ++j)
    out.basis.push_back(unpack0<S>(L, K.col(j)));
  return out;
}

// H^1 = coker of d_e.  The image is kept as a subspace in reduced row form;
// the coordinates not pivotal in the image give a canonical complement, so
// classes get canonical coordinates: reduce, then read the free positions.
template <typename S>
struct H1SpaceT {
  int total = 0;                     // dim E1
  int dim = 0;                       // dim H^1
  Subspace<S> image = Subspace<S>(0);
  std::vector<int> free_coords;      // E1 positions carrying the quotient
};

template <typename S>
H1SpaceT<S> h1(const QuiverRepT<S>& rep) {
  const typename QuiverRepT<S>::Mat D = de_matrix(rep);
  H1SpaceT<S> out;
  out.total = static_cast<int>(D.rows());
  out.image = Subspace<S>(out.total);
  for (int j = 0; j < D.cols(); ++j) out.image.insert(D.col(j));
  std::vector<bool> pivotal(static_cast<std::size_t>(out.total), false);
  for (int p : out.image.pivots()) pivotal[static_cast<std::size_t>(p)] = true;
  for (int i = 0; i < out.total; ++i)
    if (!pivotal[static_cast<std::size_t>(i)]) out.free_coords.push_back(i);
  out.dim = static_cast<int>(out.free_coords.size());
  return out;
}

template <typename S>
typename QuiverRepT<S>::Vec h1_coords(const H1SpaceT<S>& H,
                                      typename QuiverRepT<S>::Vec w) {
  if (static_cast<int>(w.size()) != H.total)
    throw std::invalid_argument("h1_coords: vector size mismatch");
  w = H.image.reduce(std::move(w));
  typename QuiverRepT<S>::Vec out =
      QuiverRepT<S>::Vec::Zero(H.dim);
  for (int i = 0; i < H.dim; ++i)
    out(i) = w(H.free_coords[static_cast<std::size_t>(i)]);
  return out;
}

// ---------------------------------------------------------------------------
// Independent Ext^1 oracle.
//
// The path algebra of a quiver is hereditary: every representation M has the
// standard two-step projective resolution whose Euler characteristic is the
// Euler form, so dim End(M) - dim Ext^1(M, M) = <dim M, dim M>.  The oracle
// computes dim End(M) from the intertwiner equations assembled independently
// of the complex above (column-major unknown packing, rank instead of a
// kernel basis) and solves for dim Ext^1.

template <typename S>
long long end_dim_oracle(const QuiverRepT<S>& rep) {
  rep.validate();
  using Mat = typename QuiverRepT<S>::Mat;
  std::vector<int> off(static_cast<std::size_t>(rep.quiver.vertices), 0);
  int unknowns = 0;
  for (int v = 0; v < rep.quiver.vertices; ++v) {
    off[static_cast<std::size_t>(v)] = unknowns;
    unknowns += rep.dims[static_cast<std::size_t>(v)] *
                rep.dims[static_cast<std::size_t>(v)];
  }
  // column-major unknown index inside each vertex block
  auto u0 = [&](int v, int r, int c) {
    return off[static_cast<std::size_t>(v)] +
           c * rep.dims[static_cast<std::size_t>(v)] + r;
  };
  int eqs = 0;
  for (std::size_t a = 0; a < rep.mats.size(); ++a)
    eqs += static_cast<int>(rep.mats[a].rows() * rep.mats[a].cols());
  Mat sys = Mat::Zero(eqs, unknowns);
  int row = 0;
  for (std::size_t a = 0; a < rep.mats.size(); ++a) {
    const auto& ar = rep.quiver.arrows[a];
    const Mat& e = rep.mats[a];
    const int nh = rep.dims[static_cast<std::size_t>(ar.head)];
    const int nt = rep.dims[static_cast<std::size_t>(ar.tail)];
    // equations enumerated column-major: sum_s phi_h(r, s) e(s, c)
    //                                  - sum_s e(r, s) phi_t(s, c) = 0
    for (int c = 0; c < nt; ++c)
      for (int r = 0; r < nh; ++r) {
        for (int s = 0; s < nh; ++s) sys(row, u0(ar.head, r, s)) += e(s, c);
        for (int s = 0; s < nt; ++s) sys(row, u0(ar.tail, s, c)) -= e(r, s);
        ++row;
      }
  }
  return unknowns - rank_of(sys);
}

template <typename S>
long long ext1_oracle(const QuiverRepT<S>& rep) {
  const long long end_dim = end_dim_oracle(rep);
  const long long chi = euler_form(rep.quiver, rep.dims, rep.dims);
  const long long e1 = end_dim - chi;
  if (e1 < 0)
    throw std::logic_error("ext1_oracle: Euler bookkeeping broke (Ext^1 < 0)");
  return e1;
}

// ---------------------------------------------------------------------------
// Chart bases and polynomial families.

struct ChartBase {
  int nvars = 0;
  std::vector<std::string> names;  // defaulted to x0, x1, ... when empty
  std::vector<bool> laurent;       // invertible directions; defaulted false

  bool is_laurent(int i) const {
    return !laurent.empty() && laurent[static_cast<std::size_t>(i)];
  }

  void validate() const {
    if (nvars < 0) throw std::invalid_argument("chart: negative variable count");
    if (!names.empty() && static_cast<int>(names.size()) != nvars)
      throw std::invalid_argument("chart: name count mismatch");
    if (!laurent.empty() && static_cast<int>(laurent.size()) != nvars)
      throw std::invalid_argument("chart: laurent flag count mismatch");
  }

  std::vector<std::string> var_names() const {
    if (!names.empty()) return names;
    std::vector<std::string> out;
    for (int i = 0; i < nvars; ++i) out.push_back("x" + std::to_string(i));
    return out;
  }
};

class PolyMat {
 public:
  PolyMat() = default;
  PolyMat(int rows, int cols, int nvars)
      : rows_(rows),
        cols_(cols),
        e_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
           CPoly::constant(nvars, Rat(0))) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("PolyMat: negative shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  CPoly& at(int r, int c) { return e_[idx(r, c)]; }
  const CPoly& at(int r, int c) const { return e_[idx(r, c)]; }

 private:
  std::size_t idx(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw std::out_of_range("PolyMat: index out of range");
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }
  int rows_ = 0, cols_ = 0;
  std::vector<CPoly> e_;
};

// A single-term polynomial c * x^e whose exponents sit only in invertible
// directions: exactly the units of the chart's coordinate ring.
inline bool is_base_unit(const ChartBase& base, const CPoly& p) {
  if (p.terms().size() != 1) return false;
  const auto& [e, c] = *p.terms().begin();
  (void)c;  // never zero: zero coefficients are not stored
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0 && !base.is_laurent(static_cast<int>(i))) return false;
  return true;
}

inline CPoly base_unit_inverse(const ChartBase& base, const CPoly& p) {
  if (!is_base_unit(base, p))
    throw std::invalid_argument("base_unit_inverse: not a unit of the base");
  const auto& [e, c] = *p.terms().begin();
  ExpVec einv = e;
  for (auto& k : einv) k = -k;
  return CPoly::monomial(einv, Rat(1) / c);
}

struct PolyFamily {
  Quiver quiver;
  ChartBase base;
  std::vector<int> dims;
  std::vector<PolyMat> mats;  // mats[a]: dims[head] x dims[tail] over the base

  void validate() const {
    quiver.validate();
    base.validate();
    if (static_cast<int>(dims.size()) != quiver.vertices)
      throw std::invalid_argument("family: dimension vector size mismatch");
    for (int d : dims)
      if (d < 0) throw std::invalid_argument("family: negative dimension");
    if (mats.size() != quiver.arrows.size())
      throw std::invalid_argument("family: arrow matrix count mismatch");
    for (std::size_t a = 0; a < mats.size(); ++a) {
      const auto& ar = quiver.arrows[a];
      if (mats[a].rows() != dims[static_cast<std::size_t>(ar.head)] ||
          mats[a].cols() != dims[static_cast<std::size_t>(ar.tail)])
        throw std::invalid_argument("family: arrow matrix shape mismatch");
      for (int r = 0; r < mats[a].rows(); ++r)
        for (int c = 0; c < mats[a].cols(); ++c) {
          const CPoly& p = mats[a].at(r, c);
          if (p.nvars() != base.nvars)
            throw std::invalid_argument("family: entry variable count mismatch");
          for (const auto& [ev, coef] : p.terms()) {
            (void)coef;
            for (std::size_t i = 0; i < ev.size(); ++i)
              if (ev[i] < 0 && !base.is_laurent(static_cast<int>(i)))
                throw std::invalid_argument(
                    "family: entry inverts a non-Laurent direction");
          }
        }
    }
  }

  ComplexLayout layout() const { return ComplexLayout::of(quiver, dims); }
};

// Evaluate an entry at a scalar point; Laurent terms need invertible values.
template <typename S>
S eval_cpoly_at(const CPoly& p, const std::vector<S>& at) {
  if (static_cast<int>(at.size()) != p.nvars())
    throw std::invalid_argument("eval_cpoly_at: point size mismatch");
  S acc = S(0);
  for (const auto& [e, c] : p.terms()) {
    S m = scalar_of_rat<S>(c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (e[i] < 0 && is_zero(S(at[i])))
        throw std::domain_error("eval_cpoly_at: inverting zero");
      const S b = e[i] > 0 ? at[i] : S(S(1) / at[i]);
      for (int k = 0; k < std::abs(e[i]); ++k) m = S(m * b);
    }
    acc = S(acc + m);
  }
  return acc;
}

// The fiber representation of a family at a scalar point.
template <typename S>
QuiverRepT<S> rep_at_point(const PolyFamily& fam, const std::vector<S>& at) {
  fam.validate();
  QuiverRepT<S> rep;
  rep.quiver = fam.quiver;
  rep.dims = fam.dims;
  for (const auto& m : fam.mats) {
    typename QuiverRepT<S>::Mat em =
        QuiverRepT<S>::Mat::Zero(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        em(r, c) = eval_cpoly_at<S>(m.at(r, c), at);
    rep.mats.push_back(std::move(em));
  }
  return rep;
}

// Columns of d_e over the chart base, indexed by E0 coordinates.
inline std::vector<std::vector<CPoly>> de_columns(const PolyFamily& fam,
                                                  const ComplexLayout& L) {
  const CPoly z = CPoly::constant(fam.base.nvars, Rat(0));
  std::vector<std::vector<CPoly>> cols(
      static_cast<std::size_t>(L.dim0),
      std::vector<CPoly>(static_cast<std::size_t>(L.dim1), z));
  for (std::size_t a = 0; a < fam.mats.size(); ++a) {
    const auto& ar = fam.quiver.arrows[a];
    const PolyMat& e = fam.mats[a];
    const int nh = fam.dims[static_cast<std::size_t>(ar.head)];
    const int nt = fam.dims[static_cast<std::size_t>(ar.tail)];
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nh; ++c)
        for (int cp = 0; cp < nt; ++cp) {
          auto& dst = cols[static_cast<std::size_t>(L.idx0(ar.head, r, c))]
                          [static_cast<std::size_t>(
                              L.idx1(static_cast<int>(a), r, cp))];
          dst += e.at(c, cp);
        }
    for (int r = 0; r < nt; ++r)
      for (int c = 0; c < nt; ++c)
        for (int rp = 0; rp < nh; ++rp) {
          auto& dst = cols[static_cast<std::size_t>(L.idx0(ar.tail, r, c))]
                          [static_cast<std::size_t>(
                              L.idx1(static_cast<int>(a), rp, c))];
          dst -= e.at(rp, r);
        }
  }
  return cols;
}

// ---------------------------------------------------------------------------
// Unit-pivot column reduction over the chart's coordinate ring.
//
// Only unit entries (single terms supported on invertible directions) are
// ever used as pivots, so every column operation is invertible over the
// base ring.  When the reduction completes -- every non-pivot column is
// eliminated to zero -- the surviving data certify both cohomologies as
// free modules:
//   * the kernel combinations form a free basis of ker d_e   (H^0), and
//   * the rows owned by no pivot carry a free complement of im d_e (H^1),
// because the final pivot columns are unit-triangular on the pivot rows.
// No completeness is guaranteed in general; callers must check `complete`.

struct PolyReduction {
  int rows = 0;
  bool complete = false;
  std::vector<int> pivot_rows;                 // row owned by pivot k
  std::vector<std::vector<CPoly>> pivot_cols;  // final reduced pivot columns
  std::vector<std::vector<CPoly>> kernel;      // combinations over the inputs
  std::vector<int> free_rows;                  // rows owned by no pivot
};

inline PolyReduction unit_pivot_reduce(const ChartBase& base, int rows,
                                       std::vector<std::vector<CPoly>> cols) {
  base.validate();
  const int ncols = static_cast<int>(cols.size());
  for (const auto& col : cols)
    if (static_cast<int>(col.size()) != rows)
      throw std::invalid_argument("unit_pivot_reduce: column length mismatch");

  const CPoly z = CPoly::constant(base.nvars, Rat(0));
  const CPoly one = CPoly::constant(base.nvars, Rat(1));
  std::vector<std::vector<CPoly>> comb(
      static_cast<std::size_t>(ncols),
      std::vector<CPoly>(static_cast<std::size_t>(ncols), z));
  for (int j = 0; j < ncols; ++j)
    comb[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = one;

  std::vector<bool> is_pivot_col(static_cast<std::size_t>(ncols), false);
  std::vector<bool> row_owned(static_cast<std::size_t>(rows), false);

  PolyReduction red;
  red.rows = rows;
  std::vector<int> pivot_col_index;

  auto axpy = [](std::vector<CPoly>& dst, const CPoly& f,
                 const std::vector<CPoly>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i)
      if (!src[i].is_zero_poly()) dst[i] -= f * src[i];
  };

  for (;;) {
    int pj = -1, pr = -1;
    for (int j = 0; j < ncols && pj < 0; ++j) {
      if (is_pivot_col[static_cast<std::size_t>(j)]) continue;
      for (int r = 0; r < rows; ++r) {
        if (row_owned[static_cast<std::size_t>(r)]) continue;
        const CPoly& entry =
            cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
        if (!entry.is_zero_poly() && is_base_unit(base, entry)) {
          pj = j;
          pr = r;
          break;
        }
      }
    }
    if (pj < 0) break;

    // normalize the pivot entry to 1 (invertible scaling)
    const CPoly inv = base_unit_inverse(
        base, cols[static_cast<std::size_t>(pj)][static_cast<std::size_t>(pr)]);
    for (auto& x : cols[static_cast<std::size_t>(pj)]) x = inv * x;
    for (auto& x : comb[static_cast<std::size_t>(pj)]) x = inv * x;

    // eliminate the pivot row from every other column
    for (int k = 0; k < ncols; ++k) {
      if (k == pj) continue;
      const CPoly f =
          cols[static_cast<std::size_t>(k)][static_cast<std::size_t>(pr)];
      if (f.is_zero_poly()) continue;
      axpy(cols[static_cast<std::size_t>(k)], f,
           cols[static_cast<std::size_t>(pj)]);
      axpy(comb[static_cast<std::size_t>(k)], f,
           comb[static_cast<std::size_t>(pj)]);
    }

    is_pivot_col[static_cast<std::size_t>(pj)] = true;
    row_owned[static_cast<std::size_t>(pr)] = true;
    pivot_col_index.push_back(pj);
    red.pivot_rows.push_back(pr);
  }

  red.complete = true;
  for (int j = 0; j < ncols; ++j) {
    if (is_pivot_col[static_cast<std::size_t>(j)]) continue;
    bool zero = true;
    for (const auto& x : cols[static_cast<std::size_t>(j)])
      if (!x.is_zero_poly()) {
        zero = false;
        break;
      }
    if (!zero) {
      red.complete = false;
      continue;
    }
    // pivot combinations stay supported on pivot indices, so a kernel
    // combination keeps coefficient 1 on its own column: a cheap
    // unimodularity witness
    if (comb[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] !=
        CPoly::constant(base.nvars, Rat(1)))
      throw std::logic_error("unit_pivot_reduce: combination tracking broke");
    red.kernel.push_back(comb[static_cast<std::size_t>(j)]);
  }
  for (std::size_t i = 0; i < pivot_col_index.size(); ++i)
    red.pivot_cols.push_back(
        cols[static_cast<std::size_t>(pivot_col_index[i])]);
  for (int r = 0; r < rows; ++r)
    if (!row_owned[static_cast<std::size_t>(r)]) red.free_rows.push_back(r);
  return red;
}

// ---------------------------------------------------------------------------
// Chart cohomology.

struct ChartCohomology {
  ComplexLayout layout;
  ChartBase base;
  bool certified = false;  // reduction completed: both cohomologies free
  PolyReduction red;
  std::vector<std::vector<CPoly>> h0_basis;  // kernel sections of E0
  std::vector<int> h1_rows;                  // E1 rows carrying H^1
  // fallback data when not certified: generic rank from sample points,
  // optionally confirmed by one symbolically nonzero minor
  int generic_rank = -1;
  bool minor_confirmed = false;

  int h0_rank() const {
    return certified ? static_cast<int>(h0_basis.size())
                     : layout.dim0 - generic_rank;
  }
  int h1_rank() const {
    return certified ? static_cast<int>(h1_rows.size())
                     : layout.dim1 - generic_rank;
  }
};

// Laplace expansion along the first row (shapes here are tiny).
inline CPoly det_cpoly(const std::vector<std::vector<CPoly>>& m) {
  const int n = static_cast<int>(m.size());
  int nv = 0;
  for (const auto& row : m) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("det_cpoly: not square");
    for (const auto& p : row) nv = p.nvars();
  }
  if (n == 0) return CPoly::constant(nv, Rat(1));
  if (n == 1) return m[0][0];
  CPoly det = CPoly::constant(m[0][0].nvars(), Rat(0));
  for (int j = 0; j < n; ++j) {
    if (m[0][static_cast<std::size_t>(j)].is_zero_poly()) continue;
    std::vector<std::vector<CPoly>> sub;
    for (int r = 1; r < n; ++r) {
      std::vector<CPoly> row;
      for (int c = 0; c < n; ++c)
        if (c != j) row.push_back(m[static_cast<std::size_t>(r)]
                                   [static_cast<std::size_t>(c)]);
      sub.push_back(std::move(row));
    }
    const CPoly cof = m[0][static_cast<std::size_t>(j)] * det_cpoly(sub);
    if (j % 2 == 0)
      det += cof;
    else
      det -= cof;
  }
  return det;
}

namespace detail {

// Gaussian elimination over Q tracking the pivot rows and columns used.
template <typename S>
std::pair<std::vector<int>, std::vector<int>> pivot_positions(
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> m) {
  std::vector<int> rows_sel, cols_sel;
  std::vector<bool> used_row(static_cast<std::size_t>(m.rows()), false);
  for (int c = 0; c < m.cols(); ++c) {
    int pr = -1;
    for (int r = 0; r < m.rows(); ++r)
      if (!used_row[static_cast<std::size_t>(r)] && !is_zero(S(m(r, c)))) {
        pr = r;
        break;
      }
    if (pr < 0) continue;
    used_row[static_cast<std::size_t>(pr)] = true;
    rows_sel.push_back(pr);
    cols_sel.push_back(c);
    const S inv = S(S(1) / m(pr, c));
    for (int r = 0; r < m.rows(); ++r) {
      if (r == pr || is_zero(S(m(r, c)))) continue;
      const S f = S(m(r, c) * inv);
      for (int cc = c; cc < m.cols(); ++cc)
        m(r, cc) = S(m(r, cc) - f * m(pr, cc));
    }
  }
  return {rows_sel, cols_sel};
}

}  // namespace detail

// Symbolic unit-pivot reduction is attempted first on every chart; when it
// stalls, the rank falls back to deterministic sample points plus one
// symbolic minor, flagged as uncertified.  In strict mode an uncertified
// chart is an error instead of a flagged answer.
inline ChartCohomology chart_cohomology(const PolyFamily& fam,
                                        bool strict = false) {
  fam.validate();
  ChartCohomology H;
  H.layout = fam.layout();
  H.base = fam.base;
  H.red = unit_pivot_reduce(fam.base, H.layout.dim1, de_columns(fam, H.layout));
  if (H.red.complete) {
    H.certified = true;
    H.h0_basis = H.red.kernel;
    H.h1_rows = H.red.free_rows;
    return H;
  }
  if (strict)
    throw std::domain_error(
        "chart_cohomology: strict mode, and the chart could not be certified "
        "symbolically");
  // fallback: generic rank over the fraction field, sampled at a few
  // deterministic points with all coordinates nonzero
  using MatQ = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;
  int best = -1;
  std::vector<Rat> best_pt;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Rat> at;
    for (int i = 0; i < fam.base.nvars; ++i) at.emplace_back(2 + i + 5 * trial);
    MatQ D = MatQ::Zero(H.layout.dim1, H.layout.dim0);
    const auto cols = de_columns(fam, H.layout);
    for (int j = 0; j < H.layout.dim0; ++j)
      for (int r = 0; r < H.layout.dim1; ++r)
        D(r, j) = eval_cpoly_at<Rat>(
            cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)], at);
    const int rk = static_cast<int>(rank_of(D));
    if (rk > best) {
      best = rk;
      best_pt = at;
    }
  }
  H.generic_rank = best;
  // confirm with one symbolic minor at the best sample point
  {
    const auto cols = de_columns(fam, H.layout);
    MatQ D = MatQ::Zero(H.layout.dim1, H.layout.dim0);
    for (int j = 0; j < H.layout.dim0; ++j)
      for (int r = 0; r < H.layout.dim1; ++r)
        D(r, j) = eval_cpoly_at<Rat>(
            cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)],
            best_pt);
    const auto [rs, cs] = detail::pivot_positions<Rat>(D);
    std::vector<std::vector<CPoly>> minor;
    for (int r : rs) {
      std::vector<CPoly> row;
      for (int c : cs)
        row.push_back(cols[static_cast<std::size_t>(c)]
                          [static_cast<std::size_t>(r)]);
      minor.push_back(std::move(row));
    }
    H.minor_confirmed =
        static_cast<int>(rs.size()) == best && !det_cpoly(minor).is_zero_poly();
  }
  return H;
}

// Canonical representative of [w] modulo im d_e (certified charts only):
// subtract, for each pivot, the pivot column scaled by w's entry at the
// pivot row.  The result vanishes on all pivot rows.
inline std::vector<CPoly> reduce_class(const ChartCohomology& H,
                                       std::vector<CPoly> w) {
  if (!H.certified)
    throw std::invalid_argument("reduce_class: chart cohomology not certified");
  if (static_cast<int>(w.size()) != H.layout.dim1)
    throw std::invalid_argument("reduce_class: vector size mismatch");
  for (std::size_t i = 0; i < H.red.pivot_rows.size(); ++i) {
    const CPoly f =
        w[static_cast<std::size_t>(H.red.pivot_rows[i])];
    if (f.is_zero_poly()) continue;
    const auto& pc = H.red.pivot_cols[i];
    for (std::size_t r = 0; r < w.size(); ++r)
      if (!pc[r].is_zero_poly()) w[r] -= f * pc[r];
  }
  for (int pr : H.red.pivot_rows)
    if (!w[static_cast<std::size_t>(pr)].is_zero_poly())
      throw std::logic_error("reduce_class: pivot row survived reduction");
  return w;
}

// Coordinates of [w] on the free rows.
inline std::vector<CPoly> class_coords(const ChartCohomology& H,
                                       const std::vector<CPoly>& w) {
  const std::vector<CPoly> r = reduce_class(H, w);
  std::vector<CPoly> out;
  for (int fr : H.h1_rows) out.push_back(r[static_cast<std::size_t>(fr)]);
  return out;
}

inline bool in_image(const ChartCohomology& H, const std::vector<CPoly>& w) {
  for (const auto& p : reduce_class(H, w))
    if (!p.is_zero_poly()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Kodaira-Spencer.

struct VectorField {
  std::vector<CPoly> coeffs;  // one per base variable

  static VectorField coordinate(const ChartBase& base, int j) {
    if (j < 0 || j >= base.nvars)
      throw std::invalid_argument("VectorField: direction out of range");
    VectorField v;
    for (int i = 0; i < base.nvars; ++i)
      v.coeffs.push_back(
          CPoly::constant(base.nvars, i == j ? Rat(1) : Rat(0)));
    return v;
  }
};

// Derivative of the family along the field: the E1 section
// (v.e)_a = sum_j coeffs[j] * d e_a / d x_j.
inline std::vector<CPoly> apply_field(const PolyFamily& fam,
                                      const ComplexLayout& L,
                                      const VectorField& v) {
  if (static_cast<int>(v.coeffs.size()) != fam.base.nvars)
    throw std::invalid_argument("apply_field: coefficient count mismatch");
  std::vector<CPoly> out(static_cast<std::size_t>(L.dim1),
                         CPoly::constant(fam.base.nvars, Rat(0)));
  for (std::size_t a = 0; a < fam.mats.size(); ++a) {
    const PolyMat& e = fam.mats[a];
    for (int r = 0; r < e.rows(); ++r)
      for (int c = 0; c < e.cols(); ++c)
        for (int j = 0; j < fam.base.nvars; ++j) {
          if (v.coeffs[static_cast<std::size_t>(j)].is_zero_poly()) continue;
          out[static_cast<std::size_t>(L.idx1(static_cast<int>(a), r, c))] +=
              v.coeffs[static_cast<std::size_t>(j)] *
              e.at(r, c).derivative(j);
        }
  }
  return out;
}

struct KsClass {
  std::vector<CPoly> raw;        // the E1 section v(e)
  std::vector<CPoly> canonical;  // reduced representative
  std::vector<CPoly> coords;     // coordinates on the free rows
};

inline KsClass ks_map(const PolyFamily& fam, const ChartCohomology& H,
                      const VectorField& v) {
  if (!H.certified)
    throw std::invalid_argument("ks_map: chart cohomology not certified");
  KsClass out;
  out.raw = apply_field(fam, H.layout, v);
  out.canonical = reduce_class(H, out.raw);
  for (int fr : H.h1_rows)
    out.coords.push_back(out.canonical[static_cast<std::size_t>(fr)]);
  return out;
}

// ---------------------------------------------------------------------------
// Excellence.
//
// A chart family is excellent when
//  (a) the structure map is an isomorphism onto H^0: endomorphisms of the
//      family are exactly the base scalars (H^0 free of rank 1, generated
//      by a unit multiple of the identity section), and
//  (b) the Kodaira-Spencer map is an isomorphism from the tangent sheaf
//      onto H^1: the KS matrix over the coordinate directions is square
//      with unit determinant.

struct ExcellenceCert {
  bool excellent = false;
  std::string failure;  // names the failing clause with a witness
  ChartCohomology coh;
  bool identity_generator = false;            // clause (a)
  std::vector<std::vector<CPoly>> ks_matrix;  // h1_rank x nvars
  CPoly ks_det;
  bool tangent_iso = false;                   // clause (b)
};

inline ExcellenceCert excellence_check(const PolyFamily& fam) {
  ExcellenceCert cert;
  cert.coh = chart_cohomology(fam);
  const auto names = fam.base.var_names();
  if (!cert.coh.certified) {
    cert.failure =
        "chart complex is not certified free over the base: "
        "unit-pivot reduction stalled";
    return cert;
  }
  const ComplexLayout& L = cert.coh.layout;

  // clause (a)
  if (cert.coh.h0_rank() != 1) {
    cert.failure = "(a) fails: H^0(End) has rank " +
                   std::to_string(cert.coh.h0_rank()) + ", not 1";
  } else {
    const auto& gen = cert.coh.h0_basis[0];
    std::optional<CPoly> alpha;
    bool scalar = true;
    for (std::size_t v = 0; v < L.dims.size() && scalar; ++v)
      for (int r = 0; r < L.dims[v] && scalar; ++r)
        for (int c = 0; c < L.dims[v] && scalar; ++c) {
          const CPoly& x =
              gen[static_cast<std::size_t>(L.idx0(static_cast<int>(v), r, c))];
          if (r == c) {
            if (!alpha)
              alpha = x;
            else if (!(x == *alpha))
              scalar = false;
          } else if (!x.is_zero_poly()) {
            scalar = false;
          }
        }
    if (!scalar) {
      cert.failure =
          "(a) fails: the H^0 generator is not a multiple of the identity";
    } else if (!alpha || !is_base_unit(fam.base, *alpha)) {
      cert.failure =
          "(a) fails: the H^0 generator is " +
          (alpha ? alpha->print(names) : std::string("0")) +
          " times the identity, and that factor is not a base unit";
    } else {
      cert.identity_generator = true;
    }
  }

  // clause (b)
  const int h1r = cert.coh.h1_rank();
  cert.ks_matrix.assign(
      static_cast<std::size_t>(h1r),
      std::vector<CPoly>(static_cast<std::size_t>(fam.base.nvars),
                         CPoly::constant(fam.base.nvars, Rat(0))));
  for (int j = 0; j < fam.base.nvars; ++j) {
    const KsClass kc =
        ks_map(fam, cert.coh, VectorField::coordinate(fam.base, j));
    for (int r = 0; r < h1r; ++r)
      cert.ks_matrix[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
          kc.coords[static_cast<std::size_t>(r)];
  }
  if (h1r != fam.base.nvars) {
    if (cert.failure.empty())
      cert.failure = "(b) fails: H^1 has rank " + std::to_string(h1r) +
                     " but the base has " + std::to_string(fam.base.nvars) +
                     " directions";
  } else {
    cert.ks_det = det_cpoly(cert.ks_matrix);
    if (is_base_unit(fam.base, cert.ks_det)) {
      cert.tangent_iso = true;
    } else if (cert.failure.empty()) {
      cert.failure = "(b) fails: the Kodaira-Spencer determinant " +
                     cert.ks_det.print(names) + " is not a base unit";
    }
  }

  cert.excellent = cert.identity_generator && cert.tangent_iso;
  return cert;
}

}  // namespace nctk

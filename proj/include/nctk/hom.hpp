// Morphism calculus: conjugacy of homomorphisms, unit groups, central
// extensions with their lift brackets, derivation spaces, the Delta_f map,
// and the classification of lift fibers by coker(Delta_f).
#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nctk/findim.hpp"
#include "nctk/fp.hpp"
#include "nctk/linalg.hpp"

namespace nctk {

// ---------------------------------------------------------------------------
// Local structure.  The decidable target class for unit searches: algebras
// whose abelianization is local Artinian with residue field the ground
// field.  The nilradical of the (commutative) abelianization is the radical
// of the trace form in characteristic zero, and the kernel of an iterated
// Frobenius map in characteristic p (where x -> x^p is linear over the prime
// field); an explicit nilpotency check on the pulled-back maximal ideal
// finishes the detection.

template <typename S>
struct field_char {
  static constexpr unsigned value = 0;
};
template <unsigned P>
struct field_char<Fp<P>> {
  static constexpr unsigned value = P;
};

template <typename S>
struct LocalData {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  Mat radical;                      // columns: basis of the maximal ideal K
  Eigen::Matrix<S, 1, Eigen::Dynamic> eps; // residue functional: eps(1)=1, eps|K=0
  bool is_unit(const Vec& v) const { return !is_zero(S((eps * v)(0, 0))); }
  S residue(const Vec& v) const { return (eps * v)(0, 0); }
};

template <typename S>
std::optional<LocalData<S>> local_structure(const FinAlgT<S>& A) {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  const int D = A.dim();

  // commutator ideal and abelianization coordinates
  const Subspace<S> comm = A.filtration_image(2);
  Mat cm(D, comm.dim());
  {
    int c = 0;
    for (const auto& r : comm.rows()) cm.col(c++) = r;
  }
  // quotient basis: unit coordinates not pivotal in comm
  Subspace<S> sp = comm;
  std::vector<int> keep;
  for (int i = 0; i < D; ++i) {
    Vec e = Vec::Zero(D);
    e(i) = S(1);
    if (!sp.contains(e)) {
      sp.insert(e);
      keep.push_back(i);
    }
  }
  const int Dab = static_cast<int>(keep.size());
  if (Dab == 0) return std::nullopt; // ideal([A,A]) = A: no residue character
  // abelianization multiplication through representatives
  Subspace<S> commsp = comm;
  auto ab_coords = [&](Vec v) -> Vec {
    v = commsp.reduce(std::move(v));
    Vec out = Vec::Zero(Dab);
    for (int t = 0; t < Dab; ++t) out(t) = v(keep[static_cast<std::size_t>(t)]);
    return out;
  };
  auto ab_lift = [&](const Vec& v) -> Vec {
    Vec out = Vec::Zero(D);
    for (int t = 0; t < Dab; ++t) out(keep[static_cast<std::size_t>(t)]) += v(t);
    return out;
  };
  auto ab_mul = [&](const Vec& a, const Vec& b) -> Vec {
    return ab_coords(A.mul(ab_lift(a), ab_lift(b)));
  };

  Mat nilrad; // Dab x (nilradical dimension), columns a basis
  if constexpr (field_char<S>::value == 0) {
    // characteristic zero: nilradical = radical of the trace form
    std::vector<Mat> left(static_cast<std::size_t>(Dab));
    for (int t = 0; t < Dab; ++t) {
      Mat L(Dab, Dab);
      for (int u = 0; u < Dab; ++u) {
        Vec ej = Vec::Zero(Dab);
        ej(u) = S(1);
        Vec ei = Vec::Zero(Dab);
        ei(t) = S(1);
        L.col(u) = ab_mul(ei, ej);
      }
      left[static_cast<std::size_t>(t)] = std::move(L);
    }
    Mat gram(Dab, Dab);
    for (int t = 0; t < Dab; ++t)
      for (int u = 0; u <= t; ++u) {
        const Mat prod = left[static_cast<std::size_t>(t)] * left[static_cast<std::size_t>(u)];
        S tr = S(0);
        for (int m = 0; m < Dab; ++m) tr += prod(m, m);
        gram(t, u) = tr;
        gram(u, t) = tr;
      }
    nilrad = kernel_basis(gram);
  } else {
    // characteristic p: x -> x^p is linear over the prime field on a
    // commutative algebra, and an element is nilpotent iff x^(p^m) = 0 once
    // p^m >= Dab (the minimal polynomial has degree <= Dab), so the
    // nilradical is the kernel of the m-fold Frobenius matrix.
    constexpr unsigned p = field_char<S>::value;
    Mat frob(Dab, Dab);
    for (int u = 0; u < Dab; ++u) {
      Vec e = Vec::Zero(Dab);
      e(u) = S(1);
      Vec pw = e;
      for (unsigned i = 1; i < p; ++i) pw = ab_mul(pw, e);
      frob.col(u) = pw;
    }
    Mat iter = frob;
    long long reach = p;
    while (reach < Dab) {
      iter = frob * iter;
      reach *= p;
    }
    nilrad = kernel_basis(iter);
  }
  if (nilrad.cols() != Dab - 1) return std::nullopt; // residue not the ground field

  // K = preimage of the nilradical: commutator ideal + lifted radical columns
  LocalData<S> out;
  out.radical = Mat(D, comm.dim() + nilrad.cols());
  {
    int c = 0;
    for (const auto& r : comm.rows()) out.radical.col(c++) = r;
    for (int j = 0; j < nilrad.cols(); ++j) {
      Vec v = Vec::Zero(D);
      for (int t = 0; t < Dab; ++t)
        v(keep[static_cast<std::size_t>(t)]) += nilrad(t, j);
      out.radical.col(c++) = v;
    }
  }
  // nilpotency of K as a two-sided ideal: the powers K ⊇ K² ⊇ ... form a
  // descending chain, so equal consecutive dimensions mean stabilization
  {
    Subspace<S> kb(D);
    for (int j = 0; j < out.radical.cols(); ++j) kb.insert(out.radical.col(j));
    std::vector<Vec> power = kb.rows();
    while (!power.empty()) {
      Subspace<S> next(D);
      for (const Vec& a : power)
        for (const Vec& b : kb.rows()) next.insert(A.mul(a, b));
      if (next.dim() == static_cast<int>(power.size()))
        return std::nullopt; // stabilized nonzero: not nilpotent
      power = next.rows();
    }
  }
  // residue functional: eps(1) = 1, eps(K) = 0  — solve eps as row vector
  {
    Mat cols(D, 1 + out.radical.cols());
    cols.col(0) = A.one();
    for (int j = 0; j < out.radical.cols(); ++j)
      cols.col(1 + j) = out.radical.col(j);
    Eigen::Matrix<S, Eigen::Dynamic, 1> rhs =
        Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(1 + out.radical.cols());
    rhs(0) = S(1);
    // eps * cols = rhs^T  <=>  cols^T eps^T = rhs
    auto sol = solve_linear(Mat(cols.transpose()), rhs);
    if (!sol) return std::nullopt; // 1 inside K: inconsistent
    out.eps = sol->transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intertwiner space and conjugacy.

// Solution space of u f1(a) = f2(a) u over the generators' images (columns).
template <typename S>
typename FinAlgT<S>::Mat intertwiner_space(const AlgebraHomT<S>& f1,
                                           const AlgebraHomT<S>& f2) {
  using Mat = typename FinAlgT<S>::Mat;
  if (f1.src != f2.src || f1.dst != f2.dst)
    throw std::invalid_argument("intertwiner_space: mismatched homs");
  const FinAlgT<S>& L = *f1.dst;
  const auto gens = f1.src->generators();
  Mat sys(static_cast<int>(gens.size()) * L.dim() + L.dim(), L.dim());
  int r = 0;
  for (const auto& g : gens) {
    const Mat block = L.right_op(f1.apply(g)) - L.left_op(f2.apply(g));
    sys.middleRows(r, L.dim()) = block;
    r += L.dim();
  }
  // also intertwine the unit images (redundant for unital homs, harmless)
  sys.middleRows(r, L.dim()) =
      L.right_op(f1.apply(f1.src->one())) - L.left_op(f2.apply(f2.src->one()));
  return kernel_basis(sys);
}

template <typename S>
struct ConjugacyResult {
  bool conjugate = false;
  typename FinAlgT<S>::Vec unit;     // valid when conjugate
  int solution_dim = 0;              // dim of the intertwiner space
  bool residue_vanishes = false;     // certificate when not conjugate
};

// Decide whether f2 = u f1 u^{-1} for some unit u of the target.  The target
// must be in the decidable class (local Artinian abelianization): there a
// solution u works iff the residue functional is nonzero somewhere on the
// intertwiner space.
template <typename S>
ConjugacyResult<S> conjugate_p(const AlgebraHomT<S>& f1,
                               const AlgebraHomT<S>& f2) {
  using Vec = typename FinAlgT<S>::Vec;
  const FinAlgT<S>& L = *f1.dst;
  auto loc = local_structure(L);
  if (!loc)
    throw std::domain_error("undecidable target");
  ConjugacyResult<S> res;
  const auto V = intertwiner_space(f1, f2);
  res.solution_dim = static_cast<int>(V.cols());
  for (int j = 0; j < V.cols(); ++j) {
    if (loc->is_unit(V.col(j))) {
      Vec u = V.col(j);
      // sanity: u is invertible and conjugates f1 to f2
      auto uinv = L.inverse(u);
      if (!uinv) throw std::logic_error("conjugate_p: unit candidate rejected");
      for (const auto& g : f1.src->generators()) {
        if (L.mul(L.mul(u, f1.apply(g)), *uinv) != f2.apply(g))
          throw std::logic_error("conjugate_p: verification failed");
      }
      res.conjugate = true;
      res.unit = u;
      return res;
    }
  }
  res.residue_vanishes = true; // eps = 0 on the whole solution space
  return res;
}

template <typename S>
AlgebraHomT<S> conjugate_hom(const AlgebraHomT<S>& f,
                             const typename FinAlgT<S>::Vec& u) {
  const FinAlgT<S>& L = *f.dst;
  auto uinv = L.inverse(u);
  if (!uinv) throw std::invalid_argument("conjugate_hom: u is not a unit");
  return AlgebraHomT<S>{f.src, f.dst,
                        typename FinAlgT<S>::Mat(
                            L.left_op(u) * L.right_op(*uinv) * f.matrix)};
}

template <typename S>
AlgebraHomT<S> compose(const AlgebraHomT<S>& f, const AlgebraHomT<S>& g) {
  if (g.dst != f.src) throw std::invalid_argument("compose: chain mismatch");
  return AlgebraHomT<S>{g.src, f.dst,
                        typename FinAlgT<S>::Mat(f.matrix * g.matrix)};
}

// ---------------------------------------------------------------------------
// U(f): units commuting with the image of f.

template <typename S>
struct UnitGroupDesc {
  using Mat = typename FinAlgT<S>::Mat;
  Mat centralizer;    // columns: basis of {v : [v, f(a)] = 0 for generators a}
  Mat nilpotent_part; // columns: basis of N = centralizer ∩ radical
  // U(f) = { c (1 + n) : c a nonzero scalar, n in span(nilpotent_part) }
};

template <typename S>
UnitGroupDesc<S> u_group(const AlgebraHomT<S>& f) {
  using Mat = typename FinAlgT<S>::Mat;
  const FinAlgT<S>& L = *f.dst;
  auto loc = local_structure(L);
  if (!loc) throw std::domain_error("undecidable target");
  UnitGroupDesc<S> out;
  out.centralizer = intertwiner_space(f, f);
  // N = centralizer ∩ K: kernel of [C | -K] gives the pairing
  Mat join(L.dim(), out.centralizer.cols() + loc->radical.cols());
  join.leftCols(out.centralizer.cols()) = out.centralizer;
  join.rightCols(loc->radical.cols()) = -loc->radical;
  const Mat pair = kernel_basis(join);
  Subspace<S> n(L.dim());
  for (int j = 0; j < pair.cols(); ++j) {
    typename FinAlgT<S>::Vec v =
        out.centralizer * pair.col(j).topRows(out.centralizer.cols());
    n.insert(v);
  }
  out.nilpotent_part = Mat(L.dim(), n.dim());
  int c = 0;
  for (const auto& r : n.rows()) out.nilpotent_part.col(c++) = r;
  return out;
}

// ---------------------------------------------------------------------------
// Central extensions with section and lift bracket.

template <typename S>
struct CentralExtensionT {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  AlgebraHomT<S> proj;  // p: total -> quotient
  Mat ideal_basis;      // columns: basis of I = ker p in the total algebra
  Mat section;          // linear section s with p∘s = id, s(1) = 1

  const FinAlgT<S>& total() const { return *proj.src; }
  const FinAlgT<S>& quotient() const { return *proj.dst; }
  int ideal_dim() const { return static_cast<int>(ideal_basis.cols()); }

  Vec lift(const Vec& v) const { return section * v; }

  // I-coordinates of a vector known to lie in I
  Vec ideal_coords(const Vec& v) const {
    auto c = solve_linear(ideal_basis, v);
    if (!c) throw std::logic_error("CentralExtension: vector outside I");
    return *c;
  }

  // the paper's [l1,l2]_{Λ'}: bracket of any lifts, landing in I and
  // independent of the lifts because I is central with I² = 0
  Vec bracket_lift(const Vec& v, const Vec& w) const {
    return total().bracket(lift(v), lift(w));
  }

  // module action of the quotient on I (left = right, by centrality)
  Mat action_on_ideal(const Vec& v) const {
    Mat act(ideal_dim(), ideal_dim());
    for (int j = 0; j < ideal_dim(); ++j)
      act.col(j) = ideal_coords(total().mul(lift(v), ideal_basis.col(j)));
    return act;
  }
};

template <typename S>
CentralExtensionT<S> make_central_extension(const AlgebraHomT<S>& p) {
  using Mat = typename FinAlgT<S>::Mat;
  if (!p.is_algebra_hom() || !p.is_surjective())
    throw std::invalid_argument("make_central_extension: not a surjection");
  if (!is_central_extension(p))
    throw std::invalid_argument(
        "make_central_extension: kernel not central square-zero");
  CentralExtensionT<S> e;
  e.proj = p;
  e.ideal_basis = p.kernel();
  const int Dq = p.dst->dim();
  Mat sec(p.src->dim(), Dq);
  for (int j = 0; j < Dq; ++j) {
    typename FinAlgT<S>::Vec t = FinAlgT<S>::Vec::Zero(Dq);
    t(j) = S(1);
    auto s = solve_linear(p.matrix, t);
    if (!s) throw std::logic_error("make_central_extension: section failed");
    sec.col(j) = *s;
  }
  // normalize the section at the unit: adjusting any column that carries a
  // nonzero coefficient of 1_quotient by the defect (which lies in ker p)
  // keeps p∘s = id and arranges s(1) = 1
  {
    const typename FinAlgT<S>::Vec defect =
        p.src->one() - typename FinAlgT<S>::Vec(sec * p.dst->one());
    if (defect != FinAlgT<S>::Vec::Zero(p.src->dim())) {
      const typename FinAlgT<S>::Vec oq = p.dst->one();
      for (int j = 0; j < Dq; ++j) {
        if (!is_zero(S(oq(j)))) {
          sec.col(j) += defect / S(oq(j));
          break;
        }
      }
    }
  }
  e.section = sec;
  return e;
}

// ---------------------------------------------------------------------------
// Derivations A -> I, where I is a central module given by action matrices.

template <typename S>
struct CentralModule {
  int dim = 0;
  std::vector<typename FinAlgT<S>::Mat> act; // one dim x dim matrix per A-basis elt
};

// module structure of ext's ideal pulled back through f: A -> quotient
template <typename S>
CentralModule<S> module_through(const AlgebraHomT<S>& f,
                                const CentralExtensionT<S>& ext) {
  if (f.dst != &ext.quotient())
    throw std::invalid_argument("module_through: target is not the quotient");
  CentralModule<S> m;
  m.dim = ext.ideal_dim();
  const int DA = f.src->dim();
  for (int i = 0; i < DA; ++i) {
    typename FinAlgT<S>::Vec e = FinAlgT<S>::Vec::Zero(DA);
    e(i) = S(1);
    m.act.push_back(ext.action_on_ideal(f.apply(e)));
  }
  return m;
}

// Derivations D: A -> M with D(ab) = a·D(b) + b·D(a) (central module, so the
// two sides act the same way).  Each derivation is a dim(M) x dim(A) matrix
// whose columns are the values on A's basis.
template <typename S>
std::vector<typename FinAlgT<S>::Mat> der_space(const FinAlgT<S>& A,
                                                const CentralModule<S>& M) {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  const int DA = A.dim();
  const int DM = M.dim;
  const int unknowns = DA * DM; // X(m, a)
  auto idx = [DM](int a, int m) { return a * DM + m; };
  std::vector<Eigen::Matrix<S, 1, Eigen::Dynamic>> rows;
  for (int i = 0; i < DA; ++i) {
    for (int j = 0; j < DA; ++j) {
      Vec ei = Vec::Zero(DA), ej = Vec::Zero(DA);
      ei(i) = S(1);
      ej(j) = S(1);
      const Vec prod = A.mul(ei, ej); // coordinates c_m of b_i b_j
      // D(b_i b_j) - act(b_i) D(b_j) - act(b_j) D(b_i) = 0  (DM rows)
      for (int m = 0; m < DM; ++m) {
        Eigen::Matrix<S, 1, Eigen::Dynamic> row =
            Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(unknowns);
        for (int t = 0; t < DA; ++t)
          if (!is_zero(S(prod(t)))) row(idx(t, m)) += prod(t);
        for (int t = 0; t < DM; ++t) {
          if (!is_zero(S(M.act[static_cast<std::size_t>(i)](m, t))))
            row(idx(j, t)) -= M.act[static_cast<std::size_t>(i)](m, t);
          if (!is_zero(S(M.act[static_cast<std::size_t>(j)](m, t))))
            row(idx(i, t)) -= M.act[static_cast<std::size_t>(j)](m, t);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  Mat sys(static_cast<int>(rows.size()), unknowns);
  for (std::size_t r = 0; r < rows.size(); ++r)
    sys.row(static_cast<int>(r)) = rows[r];
  const Mat ker = kernel_basis(sys);
  std::vector<Mat> out;
  for (int j = 0; j < ker.cols(); ++j) {
    Mat D(DM, DA);
    for (int a = 0; a < DA; ++a)
      for (int m = 0; m < DM; ++m) D(m, a) = ker(idx(a, m), j);
    out.push_back(std::move(D));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Delta_f.

// Delta_f(u)(a) = [u, f(a)]_{Λ'} u^{-1}, for u in U(f).  Returned as a
// dim(I) x dim(A) matrix of values in I-coordinates.
template <typename S>
typename FinAlgT<S>::Mat delta_f(const typename FinAlgT<S>::Vec& u,
                                 const AlgebraHomT<S>& f,
                                 const CentralExtensionT<S>& ext) {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  const FinAlgT<S>& L = ext.quotient();
  if (f.dst != &L) throw std::invalid_argument("delta_f: target mismatch");
  auto uinv = L.inverse(u);
  if (!uinv) throw std::invalid_argument("delta_f: u is not a unit");
  for (const auto& g : f.src->generators())
    if (L.mul(u, f.apply(g)) != L.mul(f.apply(g), u))
      throw std::invalid_argument("delta_f: u is not in U(f)");
  const int DA = f.src->dim();
  Mat out(ext.ideal_dim(), DA);
  const Vec ulift = ext.lift(u);
  const Vec uinvlift = ext.lift(*uinv);
  for (int a = 0; a < DA; ++a) {
    Vec e = Vec::Zero(DA);
    e(a) = S(1);
    const Vec br = ext.total().bracket(ulift, ext.lift(f.apply(e)));
    out.col(a) = ext.ideal_coords(ext.total().mul(br, uinvlift));
  }
  return out;
}

// The image of Delta_f as a subspace of Der(A, I) (rational mode): spanned by
// Delta_f(1 + b) for b running over bases of N, N², N³, ... where N is the
// nilpotent part of the centralizer of f(A).  (Divisibility of the unit
// group makes the image a subspace; the power filtration makes this spanning
// set sufficient.)
template <typename S>
Subspace<S> delta_image(const AlgebraHomT<S>& f, const CentralExtensionT<S>& ext,
                        const UnitGroupDesc<S>& U) {
  using Vec = typename FinAlgT<S>::Vec;
  const FinAlgT<S>& L = ext.quotient();
  const int DA = f.src->dim();
  const int DI = ext.ideal_dim();
  Subspace<S> im(DA * DI);
  std::vector<Vec> layer;
  for (int j = 0; j < U.nilpotent_part.cols(); ++j)
    layer.push_back(U.nilpotent_part.col(j));
  std::vector<Vec> base = layer;
  for (int depth = 0; depth < L.dim() + 1 && !layer.empty(); ++depth) {
    for (const Vec& n : layer) {
      const auto D = delta_f<S>(Vec(L.one() + n), f, ext);
      Vec flat(DA * DI);
      for (int a = 0; a < DA; ++a)
        for (int m = 0; m < DI; ++m) flat(a * DI + m) = D(m, a);
      im.insert(flat);
    }
    // next layer: products, spanning N^{depth+2}
    Subspace<S> nx(L.dim());
    for (const Vec& a : layer)
      for (const Vec& b : base) nx.insert(L.mul(a, b));
    layer = nx.rows();
  }
  return im;
}

// ---------------------------------------------------------------------------
// Lift fibers.

template <typename S>
struct LiftFiberT {
  AlgebraHomT<S> lift;                          // one chosen lift f'
  std::vector<typename FinAlgT<S>::Mat> der_basis; // Der(A, I)
  Subspace<S> delta_im = Subspace<S>(0);        // image of Delta_f (flattened)
  std::vector<typename FinAlgT<S>::Mat> coker_reps; // coset representatives
  int der_dim = 0;
  int image_dim = 0;
};

// Solve for one multiplicative unital lift of f through ext: F = s∘f + E,
// unknown E: A -> I.  Multiplicativity is affine in E because I² = 0.
template <typename S>
std::optional<AlgebraHomT<S>> solve_lift(const AlgebraHomT<S>& f,
                                         const CentralExtensionT<S>& ext) {
  using Mat = typename FinAlgT<S>::Mat;
  using Vec = typename FinAlgT<S>::Vec;
  const FinAlgT<S>& Lp = ext.total();
  const FinAlgT<S>& A = *f.src;
  const int DA = A.dim();
  const int DI = ext.ideal_dim();
  const Mat F0 = ext.section * f.matrix; // dim(Λ') x DA
  const int unknowns = DA * DI;
  auto idx = [DI](int a, int m) { return a * DI + m; };

  std::vector<Eigen::Matrix<S, 1, Eigen::Dynamic>> rows;
  std::vector<S> rhs;
  auto push_eq = [&](const Eigen::Matrix<S, 1, Eigen::Dynamic>& row, const S& b) {
    rows.push_back(row);
    rhs.push_back(b);
  };

  // unit equation: F(1) = 1, i.e. E(1) = 1 - F0(1) ∈ I
  {
    const Vec defect = Lp.one() - Vec(F0 * A.one());
    const Vec dc = ext.ideal_coords(defect);
    const Vec onea = A.one();
    for (int m = 0; m < DI; ++m) {
      Eigen::Matrix<S, 1, Eigen::Dynamic> row =
          Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(unknowns);
      for (int a = 0; a < DA; ++a)
        if (!is_zero(S(onea(a)))) row(idx(a, m)) += onea(a);
      push_eq(row, dc(m));
    }
  }

  // multiplicativity: E(b_i b_j) - f(b_i)·E(b_j) - E(b_i)·f(b_j) = C_ij,
  // with C_ij = F0(b_i)F0(b_j) - F0(b_i b_j) ∈ I
  std::vector<Mat> act; // action of f(b_i) on I
  for (int i = 0; i < DA; ++i) {
    Vec e = Vec::Zero(DA);
    e(i) = S(1);
    act.push_back(ext.action_on_ideal(f.apply(e)));
  }
  for (int i = 0; i < DA; ++i) {
    Vec ei = Vec::Zero(DA);
    ei(i) = S(1);
    for (int j = 0; j < DA; ++j) {
      Vec ej = Vec::Zero(DA);
      ej(j) = S(1);
      const Vec prod = A.mul(ei, ej);
      const Vec C = Lp.mul(Vec(F0 * ei), Vec(F0 * ej)) - Vec(F0 * prod);
      const Vec Cc = ext.ideal_coords(C);
      for (int m = 0; m < DI; ++m) {
        Eigen::Matrix<S, 1, Eigen::Dynamic> row =
            Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(unknowns);
        for (int t = 0; t < DA; ++t)
          if (!is_zero(S(prod(t)))) row(idx(t, m)) += prod(t);
        for (int t = 0; t < DI; ++t) {
          if (!is_zero(S(act[static_cast<std::size_t>(i)](m, t))))
            row(idx(j, t)) -= act[static_cast<std::size_t>(i)](m, t);
          if (!is_zero(S(act[static_cast<std::size_t>(j)](m, t))))
            row(idx(i, t)) -= act[static_cast<std::size_t>(j)](m, t);
        }
        push_eq(row, Cc(m));
      }
    }
  }

  Mat sys(static_cast<int>(rows.size()), unknowns);
  Vec b(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sys.row(static_cast<int>(r)) = rows[r];
    b(static_cast<int>(r)) = rhs[r];
  }
  auto sol = solve_linear(sys, b);
  if (!sol) return std::nullopt;
  Mat E = Mat::Zero(Lp.dim(), DA);
  for (int a = 0; a < DA; ++a) {
    Vec val = Vec::Zero(DI);
    for (int m = 0; m < DI; ++m) val(m) = (*sol)(idx(a, m));
    E.col(a) = ext.ideal_basis * val;
  }
  AlgebraHomT<S> out{&A, &Lp, Mat(F0 + E)};
  if (!out.is_algebra_hom())
    throw std::logic_error("solve_lift: solver produced a non-homomorphism");
  return out;
}

template <typename S>
LiftFiberT<S> lift_fiber(const AlgebraHomT<S>& f,
                         const CentralExtensionT<S>& ext) {
  auto lf = solve_lift(f, ext);
  if (!lf)
    throw std::domain_error(
        "no lift exists: source is not smooth over this extension");
  LiftFiberT<S> out;
  out.lift = *lf;
  out.der_basis = der_space(*f.src, module_through(f, ext));
  out.der_dim = static_cast<int>(out.der_basis.size());
  const auto U = u_group(f);
  out.delta_im = delta_image(f, ext, U);
  out.image_dim = static_cast<int>(out.delta_im.dim());
  // coset representatives: derivation basis elements that extend im(Delta_f)
  Subspace<S> acc = out.delta_im;
  const int DA = f.src->dim();
  const int DI = ext.ideal_dim();
  for (const auto& D : out.der_basis) {
    typename FinAlgT<S>::Vec flat(DA * DI);
    for (int a = 0; a < DA; ++a)
      for (int m = 0; m < DI; ++m) flat(a * DI + m) = D(m, a);
    if (!acc.contains(flat)) {
      acc.insert(flat);
      out.coker_reps.push_back(D);
    }
  }
  return out;
}

// Add a derivation (in I-coordinates, dim I x dim A) to a lift.
template <typename S>
AlgebraHomT<S> add_derivation(const AlgebraHomT<S>& lift,
                              const CentralExtensionT<S>& ext,
                              const typename FinAlgT<S>::Mat& D) {
  return AlgebraHomT<S>{lift.src, lift.dst,
                        typename FinAlgT<S>::Mat(lift.matrix + ext.ideal_basis * D)};
}

// ---------------------------------------------------------------------------
// The non-representability witness: a finite model of (A * Q[z, z^{-1}])/I_3
// with m³ = 0, where z = 1 + w is a unit but fails to be central.

template <typename S>
struct NoncentralWitness {
  FinAlgT<S> model;                 // free on x_1..x_k, w modulo I_3 + m³
  typename FinAlgT<S>::Vec z;       // 1 + w
  typename FinAlgT<S>::Vec z_inv;
  std::vector<typename FinAlgT<S>::Vec> commutators; // [z, x_i] for each i
  bool all_nonzero = false;
  int gr2_span_dim = 0;             // dimension of span{[z, x_i]} in degree 2
};

template <typename S>
NoncentralWitness<S> z_noncentral_witness(int k) {
  if (k < 1) throw std::invalid_argument("z_noncentral_witness: k >= 1");
  NoncentralWitness<S> out{FinAlgT<S>::filtration_quotient(3, 2, k + 1), {}, {}, {}, false, 0};
  const auto& M = out.model;
  const auto w = M.gen(k); // the extra generator; z = 1 + w
  out.z = M.one() + w;
  auto zi = M.inverse(out.z);
  if (!zi) throw std::logic_error("z_noncentral_witness: z not invertible");
  out.z_inv = *zi;
  out.all_nonzero = true;
  Subspace<S> span(M.dim());
  for (int i = 0; i < k; ++i) {
    auto c = M.bracket(out.z, M.gen(i));
    if (c == M.zero()) out.all_nonzero = false;
    span.insert(c);
    out.commutators.push_back(std::move(c));
  }
  out.gr2_span_dim = span.dim();
  return out;
}

} // namespace nctk

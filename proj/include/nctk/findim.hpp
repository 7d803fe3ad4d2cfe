// Finite-dimensional unital algebras: presentations, structure constants,
// centers, filtration images, and fiber products.
//
// Two construction paths feed one element model (coordinate vectors over a
// fixed basis):
//
//  * word-backed: a quotient of the free algebra on k generators by a graded
//    two-sided ideal given per degree (relation cells), truncated above a
//    degree cap. Basis = non-pivot words; multiplication = free product
//    followed by per-degree reduction. Associativity is inherited from the
//    free algebra.
//
//  * table-backed: explicit structure constants (e.g. matrix algebras,
//    fiber products). Associativity and unitality are verified on all basis
//    triples at construction.
//
// The NC-nilpotency degree is the least d with I_{d+1} = 0 in the quotient,
// where I_n is the commutator-filtration ideal. Word-backed algebras push
// the free-algebra cells through the quotient; table-backed algebras run the
// ideal recursion
//
//   J_2     = two-sided ideal generated by all commutators,
//   J_{n+1} = ideal([J_n, A]) + sum_{2<=a<=n} J_a * J_{max(2, n+1-a)},
//
// which stabilizes in at most dim A steps; a nonzero stable ideal means the
// algebra is not NC-nilpotent and the degree is absent.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nctk/filtration.hpp"
#include "nctk/linalg.hpp"
#include "nctk/ncpoly.hpp"
#include "nctk/rat.hpp"
#include "nctk/word.hpp"

namespace nctk {

template <class S>
class FinAlgT {
public:
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  // ---------------------------------------------------------------- builders

  // Quotient of the free algebra by per-degree relation cells (degree 0..cap;
  // every word of degree > cap is zero). Cells must be canonicalized RREF.
  static FinAlgT from_cells(int k, int cap,
                            std::vector<SparseSubspaceT<S>> cells) {
    FinAlgT a;
    a.word_backed_ = true;
    a.k_ = k;
    a.cap_ = cap;
    a.cells_ = std::move(cells);
    if (static_cast<int>(a.cells_.size()) != cap + 1)
      throw std::invalid_argument("from_cells: need one cell per degree");
    if (a.cells_[0].dim() > 0)
      throw std::invalid_argument("inconsistent relations (1 = 0)");
    for (int e = 0; e <= cap; ++e) {
      const long cnt = words_count(e, k);
      a.freepos_.emplace_back();
      for (long j = 0; j < cnt; ++j) {
        if (a.cells_[e].has_pivot(static_cast<int>(j))) continue;
        a.freepos_.back()[static_cast<int>(j)] =
            static_cast<int>(a.basis_words_.size());
        a.basis_words_.push_back(word_of_index(j, e, k));
      }
    }
    a.dim_ = static_cast<int>(a.basis_words_.size());
    return a;
  }

  // free algebra on k generators modulo (I_n + m^{cap+1}).
  static FinAlgT filtration_quotient(int n, int cap, int k) {
    std::vector<SparseSubspaceT<S>> cells;
    auto& eng = FiltrationEngineT<S>::instance();
    for (int e = 0; e <= cap; ++e) {
      if (n <= 0) {
        // I_0 = R: everything collapses; keep the degenerate case honest.
        SparseSubspaceT<S> full(words_count(e, k));
        for (long j = 0; j < words_count(e, k); ++j)
          full.insert({{static_cast<int>(j), S(1)}});
        full.canonicalize();
        cells.push_back(std::move(full));
      } else {
        cells.push_back(eng.ideal_cell(n, e, k)); // copy; engine keeps its own
      }
    }
    if (n <= 0)
      throw std::invalid_argument("inconsistent relations (1 = 0)");
    return from_cells(k, cap, std::move(cells));
  }

  // free algebra on k generators modulo m^{cap+1}.
  static FinAlgT truncated_free(int k, int cap) {
    std::vector<SparseSubspaceT<S>> cells;
    for (int e = 0; e <= cap; ++e)
      cells.emplace_back(words_count(e, k));
    return from_cells(k, cap, std::move(cells));
  }

  // Quotient by a list of homogeneous relations, closed to a two-sided ideal
  // per degree. With truncate=false the presentation must stabilize: every
  // word of degree cap+1 has to reduce to zero, otherwise the quotient is
  // infinite-dimensional as far as we can tell and we refuse.
  static FinAlgT from_presentation(int k, int cap,
                                   const std::vector<NcPolyT<S>>& relations,
                                   bool truncate) {
    for (const auto& r : relations) {
      if (r.is_zero()) continue;
      int deg = -1;
      for (const auto& [w, c] : r.terms()) {
        if (deg < 0) deg = static_cast<int>(w.size());
        if (static_cast<int>(w.size()) != deg)
          throw std::invalid_argument(
              "from_presentation: relations must be homogeneous");
      }
      if (deg == 0) throw std::invalid_argument("inconsistent relations (1 = 0)");
    }
    const int top = cap + 1;
    std::vector<SparseSubspaceT<S>> cells;
    for (int e = 0; e <= top; ++e) {
      SparseSubspaceT<S> cell(words_count(e, k));
      for (const auto& r : relations) {
        if (r.is_zero()) continue;
        const int d = r.degree();
        if (d > e) continue;
        const SparseRowT<S> base = sparse_of_poly_component(r, d, k);
        for (int a = 0; a + d <= e; ++a) {
          const int b = e - d - a;
          const long na = words_count(a, k), nb = words_count(b, k);
          const long shift = words_count(d + b, k);
          for (long u = 0; u < na; ++u) {
            for (long v = 0; v < nb; ++v) {
              SparseRowT<S> row;
              row.reserve(base.size());
              for (const auto& [j, c] : base)
                row.emplace_back(static_cast<int>(u * shift + j * nb + v), c);
              cell.insert(std::move(row));
            }
          }
        }
      }
      cell.canonicalize();
      cells.push_back(std::move(cell));
    }
    if (!truncate) {
      if (cells[top].dim() != words_count(top, k))
        throw std::runtime_error(
            "non-nilpotent: presentation does not stabilize below the bound");
    }
    cells.pop_back();
    return from_cells(k, cap, std::move(cells));
  }

  // Explicit structure constants. table[i][j] = coordinates of b_i * b_j.
  // Verifies associativity and unitality on all triples/pairs.
  static FinAlgT from_table(std::vector<std::string> names,
                            std::vector<std::vector<Vec>> table, Vec unit,
                            std::vector<int> generators = {}) {
    FinAlgT a;
    a.word_backed_ = false;
    a.dim_ = static_cast<int>(names.size());
    a.names_ = std::move(names);
    a.table_ = std::move(table);
    a.unit_vec_ = std::move(unit);
    a.gen_idx_ = std::move(generators);
    const int D = a.dim_;
    if (static_cast<int>(a.table_.size()) != D)
      throw std::invalid_argument("from_table: table size mismatch");
    for (const auto& row : a.table_)
      if (static_cast<int>(row.size()) != D)
        throw std::invalid_argument("from_table: table size mismatch");
    // unitality
    for (int i = 0; i < D; ++i) {
      Vec ei = Vec::Zero(D);
      ei(i) = S(1);
      if (a.mul(a.unit_vec_, ei) != ei || a.mul(ei, a.unit_vec_) != ei)
        throw std::invalid_argument("from_table: unit element fails");
    }
    // associativity on basis triples
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) {
        const Vec ij = a.table_[i][j];
        for (int l = 0; l < D; ++l) {
          Vec lhs = Vec::Zero(D);
          for (int t = 0; t < D; ++t)
            if (!is_zero(ij(t))) lhs += ij(t) * a.table_[t][l];
          const Vec jl = a.table_[j][l];
          Vec rhs = Vec::Zero(D);
          for (int t = 0; t < D; ++t)
            if (!is_zero(jl(t))) rhs += jl(t) * a.table_[i][t];
          if (lhs != rhs)
            throw std::invalid_argument("from_table: associativity fails");
        }
      }
    }
    return a;
  }

  // ------------------------------------------------------------ basic access

  int dim() const { return dim_; }
  bool word_backed() const { return word_backed_; }
  int generator_count() const { return word_backed_ ? k_ : -1; }
  int degree_cap() const { return cap_; }
  const std::vector<Word>& basis_words() const { return basis_words_; }

  std::string basis_name(int i) const {
    if (!word_backed_) return names_[static_cast<std::size_t>(i)];
    const Word& w = basis_words_[static_cast<std::size_t>(i)];
    std::vector<std::string> names;
    for (int g = 0; g < k_; ++g) names.push_back("x" + std::to_string(g));
    return word_print(w, names);
  }

  Vec zero() const { return Vec::Zero(dim_); }

  Vec one() const {
    if (!word_backed_) return unit_vec_;
    Vec v = zero();
    v(coord_of_word(Word{})) = S(1);
    return v;
  }

  Vec gen(int g) const {
    if (!word_backed_)
      throw std::logic_error("gen: table-backed algebra has no word generators");
    return reduce_poly(NcPolyT<S>::generator(static_cast<uint8_t>(g)));
  }

  // Designated generating set (as coordinate vectors).
  std::vector<Vec> generators() const {
    std::vector<Vec> out;
    if (word_backed_) {
      for (int g = 0; g < k_; ++g) out.push_back(gen(g));
    } else if (!gen_idx_.empty()) {
      for (int i : gen_idx_) {
        Vec v = zero();
        v(i) = S(1);
        out.push_back(v);
      }
    } else {
      for (int i = 0; i < dim_; ++i) {
        Vec v = zero();
        v(i) = S(1);
        out.push_back(v);
      }
    }
    return out;
  }

  // -------------------------------------------------------------- arithmetic

  Vec mul(const Vec& a, const Vec& b) const {
    if (word_backed_) return reduce_poly(nc_mul(lift(a), lift(b), cap_));
    Vec out = zero();
    for (int i = 0; i < dim_; ++i) {
      if (is_zero(a(i))) continue;
      for (int j = 0; j < dim_; ++j) {
        if (is_zero(b(j))) continue;
        out += (a(i) * b(j)) * table_[i][j];
      }
    }
    return out;
  }

  Vec bracket(const Vec& a, const Vec& b) const {
    return mul(a, b) - mul(b, a);
  }

  Mat left_op(const Vec& a) const {
    Mat m(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
      Vec ej = zero();
      ej(j) = S(1);
      m.col(j) = mul(a, ej);
    }
    return m;
  }

  Mat right_op(const Vec& a) const {
    Mat m(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
      Vec ej = zero();
      ej(j) = S(1);
      m.col(j) = mul(ej, a);
    }
    return m;
  }

  Vec pow(const Vec& a, int e) const {
    Vec acc = one();
    for (int j = 0; j < e; ++j) acc = mul(acc, a);
    return acc;
  }

  // ------------------------------------------------- word-backed conversions

  Vec reduce_poly(const NcPolyT<S>& p) const {
    if (!word_backed_)
      throw std::logic_error("reduce_poly: table-backed algebra");
    Vec v = zero();
    for (int e = 0; e <= cap_; ++e) {
      SparseRowT<S> row = sparse_of_poly_component(p, e, k_);
      if (row.empty()) continue;
      row = cells_[e].reduce(std::move(row));
      for (const auto& [j, c] : row)
        v(freepos_[static_cast<std::size_t>(e)].at(j)) += c;
    }
    return v;
  }

  NcPolyT<S> lift(const Vec& v) const {
    if (!word_backed_) throw std::logic_error("lift: table-backed algebra");
    NcPolyT<S> p;
    for (int i = 0; i < dim_; ++i) {
      if (!is_zero(v(i)))
        p.add_term(basis_words_[static_cast<std::size_t>(i)], v(i));
    }
    return p;
  }

  // Coefficient of the empty word (the residue map onto the degree-0 line).
  S eps(const Vec& v) const {
    if (!word_backed_) throw std::logic_error("eps: table-backed algebra");
    return v(coord_of_word(Word{}));
  }

  // --------------------------------------------------------------- structure

  // Graded-local criterion: word-backed quotients are local with maximal
  // ideal spanned by the positive-degree basis words.
  bool graded_local() const { return word_backed_; }

  bool is_unit(const Vec& v) const { return inverse(v).has_value(); }

  std::optional<Vec> inverse(const Vec& v) const {
    if (word_backed_ && is_zero(eps(v))) return std::nullopt;
    auto x = solve_linear(left_op(v), one());
    if (!x) return std::nullopt;
    if (mul(*x, v) != one()) return std::nullopt;
    return x;
  }

  // Kernel of c -> ([c, g]) over the designated generators.
  std::vector<Vec> center_basis() const {
    const std::vector<Vec> gens = generators();
    Mat stacked(dim_ * static_cast<int>(gens.size()), dim_);
    int r = 0;
    for (const auto& g : gens) {
      stacked.middleRows(r, dim_) = left_op(g) - right_op(g);
      r += dim_;
    }
    Mat kb = kernel_basis(stacked);
    std::vector<Vec> out;
    for (int c = 0; c < kb.cols(); ++c) out.push_back(kb.col(c));
    return out;
  }

  // Image of the filtration ideal I_n inside the algebra, as a subspace.
  Subspace<S> filtration_image(int n) const {
    if (n <= 0) {
      Subspace<S> all(dim_);
      for (int i = 0; i < dim_; ++i) {
        Vec ei = zero();
        ei(i) = S(1);
        all.insert(ei);
      }
      return all;
    }
    if (n == 1) n = 2; // I_1 = I_2 convention
    if (word_backed_) {
      Subspace<S> img(dim_);
      auto& eng = FiltrationEngineT<S>::instance();
      for (int e = 0; e <= cap_; ++e) {
        for (const auto& row : eng.ideal_cell(n, e, k_).rows())
          img.insert(reduce_poly(poly_of_sparse_row(row, e, k_)));
      }
      return img;
    }
    // Table-backed: ideal recursion from commutators. J[j] = image of I_{j+2}.
    std::vector<Subspace<S>> J;
    J.push_back(ideal_closure(commutator_span()));
    for (int n_cur = 3; n_cur <= n; ++n_cur) {
      const Subspace<S>& prev = J.back();
      if (static_cast<int>(J.size()) >= 2 &&
          prev.dim() == J[J.size() - 2].dim()) {
        break; // stable: all later terms coincide
      }
      Subspace<S> next(dim_);
      // [J_{n-1}, A] part
      for (const auto& v : prev.rows()) {
        for (int i = 0; i < dim_; ++i) {
          Vec ei = zero();
          ei(i) = S(1);
          next.insert(bracket(v, ei));
        }
      }
      // J_a * J_{max(2, n-a)} parts
      for (int a = 2; a <= n_cur - 1; ++a) {
        const Subspace<S>& left = J[static_cast<std::size_t>(a - 2)];
        const std::size_t bidx =
            static_cast<std::size_t>(std::max(2, n_cur - a) - 2);
        if (bidx >= J.size()) continue;
        const Subspace<S>& right = J[bidx];
        for (const auto& u : left.rows())
          for (const auto& w : right.rows()) next.insert(mul(u, w));
      }
      J.push_back(ideal_closure(std::move(next)));
    }
    const std::size_t idx =
        std::min<std::size_t>(static_cast<std::size_t>(n - 2), J.size() - 1);
    return J[idx];
  }

  // Marked basis of the abelianization kernel (image of I_2).
  std::vector<Vec> abelianization_kernel_basis() const {
    return filtration_image(2).rows();
  }

  // Least d >= 0 with I_{d+1} = 0 in the quotient; absent if the filtration
  // stabilizes at a nonzero ideal (non-NC-nilpotent algebra).
  // Least d >= 0 with I_{d+2} = 0 (so commutative algebras have degree 0),
  // or nullopt when the filtration stabilizes at a nonzero ideal.
  std::optional<int> nc_degree() const {
    if (word_backed_) {
      for (int n = 2; n <= cap_ + 2; ++n) {
        if (filtration_image(n).dim() == 0) return n - 2;
      }
      return std::nullopt; // unreachable: I_{cap+1} = 0 in a truncated algebra
    }
    int prev = -1;
    for (int n = 2; n <= dim_ + 2; ++n) {
      const int d = filtration_image(n).dim();
      if (d == 0) return n - 2;
      if (d == prev) return std::nullopt; // stable nonzero ideal
      prev = d;
    }
    return std::nullopt;
  }

  // Structure constants row: coordinates of b_i * b_j.
  Vec structure_constant(int i, int j) const {
    if (!word_backed_) return table_[i][j];
    Vec ei = zero(), ej = zero();
    ei(i) = S(1);
    ej(j) = S(1);
    return mul(ei, ej);
  }

private:
  int coord_of_word(const Word& w) const {
    const int e = static_cast<int>(w.size());
    const auto& m = freepos_[static_cast<std::size_t>(e)];
    auto it = m.find(static_cast<int>(word_index(w, k_)));
    if (it == m.end())
      throw std::logic_error("coord_of_word: word is not a basis residue");
    return it->second;
  }

  Subspace<S> commutator_span() const {
    Subspace<S> sp(dim_);
    for (int i = 0; i < dim_; ++i) {
      for (int j = i + 1; j < dim_; ++j) {
        Vec ei = zero(), ej = zero();
        ei(i) = S(1);
        ej(j) = S(1);
        sp.insert(bracket(ei, ej));
      }
    }
    return sp;
  }

  Subspace<S> ideal_closure(Subspace<S> sp) const {
    // Two-sided ideal closure: saturate under multiplication by basis vectors.
    bool grew = true;
    while (grew) {
      grew = false;
      const auto vs = sp.rows();
      for (const auto& v : vs) {
        for (int i = 0; i < dim_; ++i) {
          Vec ei = zero();
          ei(i) = S(1);
          if (sp.insert(mul(ei, v))) grew = true;
          if (sp.insert(mul(v, ei))) grew = true;
        }
      }
    }
    return sp;
  }

  bool word_backed_ = false;
  int dim_ = 0;

  // word-backed state
  int k_ = 0, cap_ = -1;
  std::vector<SparseSubspaceT<S>> cells_;
  std::vector<Word> basis_words_;
  std::vector<std::map<int, int>> freepos_;

  // table-backed state
  std::vector<std::string> names_;
  std::vector<std::vector<Vec>> table_;
  Vec unit_vec_;
  std::vector<int> gen_idx_;
};

using FinAlg = FinAlgT<Rat>;

// ---------------------------------------------------------------------------
// Homomorphisms and fiber products
// ---------------------------------------------------------------------------

template <class S>
struct AlgebraHomT {
  const FinAlgT<S>* src = nullptr;
  const FinAlgT<S>* dst = nullptr;
  typename FinAlgT<S>::Mat matrix; // dst.dim x src.dim

  typename FinAlgT<S>::Vec apply(const typename FinAlgT<S>::Vec& v) const {
    return matrix * v;
  }

  bool is_algebra_hom() const {
    const int Ds = src->dim();
    if (apply(src->one()) != dst->one()) return false;
    for (int i = 0; i < Ds; ++i) {
      for (int j = 0; j < Ds; ++j) {
        typename FinAlgT<S>::Vec ei = src->zero(), ej = src->zero();
        ei(i) = S(1);
        ej(j) = S(1);
        if (apply(src->mul(ei, ej)) != dst->mul(apply(ei), apply(ej)))
          return false;
      }
    }
    return true;
  }

  bool is_surjective() const { return rank_of(matrix) == dst->dim(); }

  typename FinAlgT<S>::Mat kernel() const { return kernel_basis(matrix); }
};

using AlgebraHom = AlgebraHomT<Rat>;

// Build a homomorphism from a word-backed source by generator images.
// Verifies that the source's relations (including the degree cap) map to
// zero; returns nullopt if the assignment does not define a homomorphism.
template <class S>
inline std::optional<AlgebraHomT<S>> hom_on_generators(
    const FinAlgT<S>& src, const FinAlgT<S>& dst,
    const std::vector<typename FinAlgT<S>::Vec>& images) {
  if (!src.word_backed())
    throw std::logic_error("hom_on_generators: source must be word-backed");
  const int k = src.generator_count();
  if (static_cast<int>(images.size()) != k)
    throw std::invalid_argument("hom_on_generators: wrong image count");

  // Evaluate every free word of degree <= cap+1 in the target, reusing
  // prefixes degree by degree.
  const int cap = src.degree_cap();
  std::vector<std::vector<typename FinAlgT<S>::Vec>> word_val(
      static_cast<std::size_t>(cap) + 2);
  word_val[0] = {dst.one()};
  for (int e = 1; e <= cap + 1; ++e) {
    const long cnt = words_count(e, k);
    word_val[static_cast<std::size_t>(e)].reserve(static_cast<std::size_t>(cnt));
    const long tail = words_count(e - 1, k);
    for (long j = 0; j < cnt; ++j) {
      const int g = static_cast<int>(j / tail);
      const long rest = j % tail;
      word_val[static_cast<std::size_t>(e)].push_back(dst.mul(
          images[static_cast<std::size_t>(g)],
          word_val[static_cast<std::size_t>(e - 1)][static_cast<std::size_t>(rest)]));
    }
  }
  // Relations must die: each relation-cell row and each word beyond the cap.
  for (int e = 0; e <= cap; ++e) {
    // Reconstruct the relation rows from the quotient: a word is either a
    // basis residue or reduces; the difference (word - its residue) spans the
    // relation cell, so checking those images suffices.
    const long cnt = words_count(e, k);
    for (long j = 0; j < cnt; ++j) {
      NcPolyT<S> w = NcPolyT<S>::monomial(word_of_index(j, e, k), S(1));
      const auto resid = src.lift(src.reduce_poly(w));
      NcPolyT<S> diff = w - resid;
      if (diff.is_zero()) continue;
      typename FinAlgT<S>::Vec img = dst.zero();
      for (const auto& [word, c] : diff.terms()) {
        img += c * word_val[word.size()][static_cast<std::size_t>(
                   word_index(word, k))];
      }
      if (img != dst.zero()) return std::nullopt;
    }
  }
  for (const auto& v : word_val[static_cast<std::size_t>(cap) + 1]) {
    if (v != dst.zero()) return std::nullopt;
  }
  // Assemble the matrix on basis words.
  AlgebraHomT<S> h;
  h.src = &src;
  h.dst = &dst;
  h.matrix.resize(dst.dim(), src.dim());
  for (int i = 0; i < src.dim(); ++i) {
    const Word& w = src.basis_words()[static_cast<std::size_t>(i)];
    h.matrix.col(i) =
        word_val[w.size()][static_cast<std::size_t>(word_index(w, k))];
  }
  return h;
}

// Quotient of an algebra by a two-sided ideal given as a subspace, as a
// table-backed algebra on the non-pivot coordinates, with the projection
// matrix (quotient dim x source dim). Wrap it in an AlgebraHomT once both
// algebras have stable addresses.
template <class S>
struct QuotientT {
  FinAlgT<S> algebra;
  typename FinAlgT<S>::Mat projection_matrix;
};

template <class S>
inline QuotientT<S> quotient_by_ideal(const FinAlgT<S>& a,
                                      const Subspace<S>& ideal) {
  using Vec = typename FinAlgT<S>::Vec;
  using Mat = typename FinAlgT<S>::Mat;
  const int D = a.dim();
  // Verify the subspace is a two-sided ideal.
  for (const auto& v : ideal.rows()) {
    for (int i = 0; i < D; ++i) {
      Vec ei = a.zero();
      ei(i) = S(1);
      if (!ideal.contains(a.mul(ei, v)) || !ideal.contains(a.mul(v, ei)))
        throw std::invalid_argument("quotient_by_ideal: not a two-sided ideal");
    }
  }
  std::vector<int> keep; // non-pivot coordinates survive
  {
    std::vector<bool> is_piv(static_cast<std::size_t>(D), false);
    for (int p : ideal.pivots()) is_piv[static_cast<std::size_t>(p)] = true;
    for (int i = 0; i < D; ++i)
      if (!is_piv[static_cast<std::size_t>(i)]) keep.push_back(i);
  }
  const int Q = static_cast<int>(keep.size());
  auto project = [&](const Vec& v) {
    Vec r = ideal.reduce(v);
    Vec out(Q);
    for (int i = 0; i < Q; ++i) out(i) = r(keep[static_cast<std::size_t>(i)]);
    return out;
  };
  std::vector<std::vector<Vec>> table(static_cast<std::size_t>(Q));
  for (int i = 0; i < Q; ++i) {
    for (int j = 0; j < Q; ++j) {
      Vec ei = a.zero(), ej = a.zero();
      ei(keep[static_cast<std::size_t>(i)]) = S(1);
      ej(keep[static_cast<std::size_t>(j)]) = S(1);
      table[static_cast<std::size_t>(i)].push_back(project(a.mul(ei, ej)));
    }
  }
  std::vector<std::string> names;
  for (int i = 0; i < Q; ++i)
    names.push_back("q:" + a.basis_name(keep[static_cast<std::size_t>(i)]));
  QuotientT<S> out;
  out.algebra =
      FinAlgT<S>::from_table(std::move(names), std::move(table), project(a.one()));
  Mat pm(Q, D);
  for (int j = 0; j < D; ++j) {
    Vec ej = a.zero();
    ej(j) = S(1);
    pm.col(j) = project(ej);
  }
  out.projection_matrix = std::move(pm);
  return out;
}

// The fiber product of two surjective homomorphisms with common target, as a
// table-backed algebra on a canonical basis of the pair subspace, together
// with the two projections (as coordinate matrices onto the factors).
template <class S>
struct FiberProductT {
  FinAlgT<S> algebra;
  typename FinAlgT<S>::Mat to_first;  // dim Λ' x dim F
  typename FinAlgT<S>::Mat to_second; // dim Λ'' x dim F
};

template <class S>
inline FiberProductT<S> fiber_product(const AlgebraHomT<S>& p1,
                                      const AlgebraHomT<S>& p2) {
  if (p1.dst != p2.dst)
    throw std::invalid_argument("fiber_product: targets differ");
  if (!p1.is_algebra_hom() || !p2.is_algebra_hom())
    throw std::invalid_argument("fiber_product: inputs are not homomorphisms");
  if (!p1.is_surjective() || !p2.is_surjective())
    throw std::invalid_argument("non-surjective input");
  using Vec = typename FinAlgT<S>::Vec;
  using Mat = typename FinAlgT<S>::Mat;
  const int D1 = p1.src->dim(), D2 = p2.src->dim(), Dt = p1.dst->dim();

  Mat glue(Dt, D1 + D2);
  glue.leftCols(D1) = p1.matrix;
  glue.rightCols(D2) = -p2.matrix;
  Mat pairs = kernel_basis(glue); // columns span the pair subspace
  const int D = static_cast<int>(pairs.cols());

  Subspace<S> coordsys(D1 + D2);
  for (int c = 0; c < D; ++c) coordsys.insert(pairs.col(c));
  // Re-read the basis in canonical order so coordinates are reproducible.
  Mat basis(D1 + D2, D);
  {
    const auto rows = coordsys.rows();
    for (int c = 0; c < D; ++c) basis.col(c) = rows[static_cast<std::size_t>(c)];
  }

  auto coords = [&](const Vec& v) {
    auto c = coordsys.coords_of(v);
    if (!c) throw std::logic_error("fiber_product: product left the subspace");
    return *c;
  };

  std::vector<std::vector<Vec>> table(static_cast<std::size_t>(D));
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      Vec xi = basis.col(i), xj = basis.col(j);
      Vec prod(D1 + D2);
      prod.head(D1) = p1.src->mul(xi.head(D1), xj.head(D1));
      prod.tail(D2) = p2.src->mul(xi.tail(D2), xj.tail(D2));
      table[static_cast<std::size_t>(i)].push_back(coords(prod));
    }
  }
  Vec unit(D1 + D2);
  unit.head(D1) = p1.src->one();
  unit.tail(D2) = p2.src->one();

  std::vector<std::string> names;
  for (int i = 0; i < D; ++i) names.push_back("p" + std::to_string(i));

  FiberProductT<S> out;
  out.algebra = FinAlgT<S>::from_table(std::move(names), std::move(table),
                                       coords(unit));
  out.to_first = basis.topRows(D1);
  out.to_second = basis.bottomRows(D2);
  return out;
}

// ---------------------------------------------------------------------------
// Central square-zero extensions and the rearrangement isomorphism
// ---------------------------------------------------------------------------

// Is p a central square-zero extension: kernel central and kernel^2 = 0?
template <class S>
inline bool is_central_extension(const AlgebraHomT<S>& p) {
  using Vec = typename FinAlgT<S>::Vec;
  const auto& A = *p.src;
  const auto K = p.kernel();
  for (int c = 0; c < K.cols(); ++c) {
    const Vec v = K.col(c);
    for (int i = 0; i < A.dim(); ++i) {
      Vec ei = A.zero();
      ei(i) = S(1);
      if (A.bracket(v, ei) != A.zero()) return false;
    }
    for (int d = 0; d < K.cols(); ++d) {
      if (A.mul(v, K.col(d)) != A.zero()) return false;
    }
  }
  return true;
}

// For a central square-zero extension p: A' -> A with kernel I, the fiber
// product A' x_A A' rearranges as A' x_{A^ab} (A^ab + I): the map
// (x, y) -> (x, (x^ab, y - x)) is an algebra isomorphism onto the fiber
// product over the abelianization, where A^ab + I is the trivial square-zero
// extension. This constructs both sides explicitly and checks the map is a
// bijective algebra homomorphism.
template <class S>
inline bool central_rearrangement_check(const AlgebraHomT<S>& p1) {
  using Vec = typename FinAlgT<S>::Vec;
  using Mat = typename FinAlgT<S>::Mat;
  if (!p1.is_algebra_hom() || !p1.is_surjective())
    throw std::invalid_argument("rearrangement: input is not surjective hom");
  if (!is_central_extension(p1))
    throw std::invalid_argument("rearrangement: input is not central square-zero");
  const FinAlgT<S>& Ap = *p1.src;
  const FinAlgT<S>& A = *p1.dst;
  const int D1 = Ap.dim();

  // Kernel subspace I.
  Subspace<S> I(D1);
  I.insert_all(p1.kernel());
  const int Di = I.dim();

  // Abelianization of the target and the two legs.
  QuotientT<S> qab = quotient_by_ideal(A, A.filtration_image(2));
  const FinAlgT<S>& Aab = qab.algebra;
  const int Dab = Aab.dim();
  const Mat r_matrix = qab.projection_matrix * p1.matrix; // A' -> A^ab

  // A section of p1 (right inverse), for the module action of A^ab on I.
  Mat sec(D1, A.dim());
  for (int j = 0; j < A.dim(); ++j) {
    Vec ej = A.zero();
    ej(j) = S(1);
    auto x = solve_linear(p1.matrix, ej);
    if (!x) throw std::logic_error("rearrangement: surjectivity lost");
    sec.col(j) = *x;
  }
  // Section of the abelianization projection, into A.
  Mat sab(A.dim(), Dab);
  for (int j = 0; j < Dab; ++j) {
    Vec ej = Aab.zero();
    ej(j) = S(1);
    auto x = solve_linear(qab.projection_matrix, ej);
    if (!x) throw std::logic_error("rearrangement: quotient section failed");
    sab.col(j) = *x;
  }

  // B = A^ab + I, trivial square-zero extension; basis = ab block then I.
  const int DB = Dab + Di;
  auto act = [&](int abj, int ii) {
    // (lift of ab basis j) * (I basis ii), read in I coordinates
    const Vec lift = sec * (sab.col(abj));
    const Vec prod = Ap.mul(lift, I.rows()[static_cast<std::size_t>(ii)]);
    auto c = I.coords_of(prod);
    if (!c) throw std::logic_error("rearrangement: action left the kernel");
    return *c;
  };
  std::vector<std::vector<Vec>> btable(static_cast<std::size_t>(DB));
  for (int i = 0; i < DB; ++i)
    btable[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(DB),
                                               Vec::Zero(DB));
  for (int i = 0; i < Dab; ++i) {
    for (int j = 0; j < Dab; ++j) {
      Vec ei = Aab.zero(), ej = Aab.zero();
      ei(i) = S(1);
      ej(j) = S(1);
      Vec prod = Vec::Zero(DB);
      prod.head(Dab) = Aab.mul(ei, ej);
      btable[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = prod;
    }
    for (int ii = 0; ii < Di; ++ii) {
      Vec prod = Vec::Zero(DB);
      prod.tail(Di) = act(i, ii);
      btable[static_cast<std::size_t>(i)][static_cast<std::size_t>(Dab + ii)] =
          prod;
      btable[static_cast<std::size_t>(Dab + ii)][static_cast<std::size_t>(i)] =
          prod; // central
    }
  }
  std::vector<std::string> bnames;
  for (int i = 0; i < Dab; ++i) bnames.push_back("ab" + std::to_string(i));
  for (int i = 0; i < Di; ++i) bnames.push_back("i" + std::to_string(i));
  Vec bunit = Vec::Zero(DB);
  bunit.head(Dab) = Aab.one();
  const FinAlgT<S> B = FinAlgT<S>::from_table(bnames, btable, bunit);

  // Legs into A^ab and both fiber products.
  AlgebraHomT<S> r{&Ap, &Aab, r_matrix};
  Mat q_matrix(Dab, DB);
  q_matrix.setZero();
  for (int i = 0; i < Dab; ++i) q_matrix(i, i) = S(1);
  AlgebraHomT<S> q{&B, &Aab, q_matrix};

  FiberProductT<S> F1 = fiber_product(p1, p1);
  FiberProductT<S> F2 = fiber_product(r, q);
  if (F1.algebra.dim() != F2.algebra.dim()) return false;
  const int DF = F1.algebra.dim();

  // Coordinates in F2's pair subspace.
  Subspace<S> pair2(D1 + DB);
  {
    Mat stacked(D1 + DB, DF);
    stacked.topRows(D1) = F2.to_first;
    stacked.bottomRows(DB) = F2.to_second;
    pair2.insert_all(stacked);
  }
  if (pair2.dim() != DF) return false;

  // phi(x, y) = (x, (x^ab, y - x)) on the F1 basis.
  Mat phi(DF, DF);
  for (int c = 0; c < DF; ++c) {
    const Vec x = F1.to_first.col(c);
    const Vec y = F1.to_second.col(c);
    Vec target(D1 + DB);
    target.head(D1) = x;
    target.segment(D1, Dab) = r_matrix * x;
    auto icoords = I.coords_of(y - x);
    if (!icoords) return false; // y - x must land in the kernel
    target.tail(Di) = *icoords;
    auto c2 = pair2.coords_of(target);
    if (!c2) return false;
    phi.col(c) = *c2;
  }
  if (rank_of(phi) != DF) return false;
  AlgebraHomT<S> iso{&F1.algebra, &F2.algebra, phi};
  return iso.is_algebra_hom();
}

} // namespace nctk

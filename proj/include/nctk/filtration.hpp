// Commutator filtration of a free associative algebra, computed exactly.
//
// For R free on k generators, the filtration ideal
//
//   I_n = sum of products  R * L_{i_1} * R * L_{i_2} * ... * L_{i_m} * R
//
// over all tuples i_1, ..., i_m >= 2 with i_1 + ... + i_m >= n, where L_i is
// the span of Lie monomials of weight i. Conventions: I_0 = R and I_1 = I_2,
// so gr^0 is the abelianization and gr^1 vanishes.
//
// Everything here is graded by word degree, so each cell of the computation
// is a subspace of the degree-e word space (dimension k^e). Two memoized
// families drive the recursion:
//
//   lie_cell(i, e):   degree-e piece of L_i,
//                     L_2^[e] spanned by [w_a, w_b] over words with
//                     |w_a| + |w_b| = e, and
//                     L_{i+1}^[e] = sum_a [words of degree a, L_i^[e-a]];
//
//   ideal_cell(n, e): degree-e piece of I_n, via the peeled recursion
//                     I_n = sum_{i>=2} L_i * T_{n-i}  +  sum_g x_g * I_n,
//                     with T_s the full word space for s <= 0 and
//                     T_s = I_max(s,2) for s >= 1.
//
// The peel is exhaustive: any generating product of I_n either starts with a
// generator (prefix row) or starts with a Lie factor of some weight i and
// degree e_L, followed by an arbitrary element of T_{n-i} (product row).
//
// Dimension bookkeeping uses the necklace (Witt) numbers
// l_i = (1/i) sum_{d|i} mu(d) k^{i/d}: the generating series of graded ranks
// is prod_{i>=2} (1-q^i)^{-l_i}, and gr_n is a free module of that rank over
// the abelianization, giving the cross-check
//   dim I_n^[m] - dim I_{n+1}^[m] = gr_rank(n,k) * C(m-n+k-1, k-1).
//
// The engine is templated on the base field: the exact paths run over Rat,
// the enumerative mod-p modes over Fp<P>, with identical code.
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "nctk/ncpoly.hpp"
#include "nctk/rat.hpp"
#include "nctk/sparsesub.hpp"
#include "nctk/word.hpp"

namespace nctk {

// ---------------------------------------------------------------------------
// Necklace numbers and graded-rank series
// ---------------------------------------------------------------------------

inline Int int_pow(long base, int exp) {
  Int r = 1;
  for (int j = 0; j < exp; ++j) r *= base;
  return r;
}

inline int moebius_mu(int n) {
  int mu = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      mu = -mu;
    }
  }
  if (n > 1) mu = -mu;
  return mu;
}

// l_i = (1/i) sum_{d|i} mu(d) k^{i/d}: the rank of the degree-i piece of the
// free Lie algebra on k generators.
inline Int witt_number(int i, int k) {
  if (i <= 0) throw std::invalid_argument("witt_number: i must be positive");
  Int acc = 0;
  for (int d = 1; d <= i; ++d) {
    if (i % d != 0) continue;
    acc += Int(moebius_mu(d)) * int_pow(k, i / d);
  }
  Int q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), Int(i).get_mpz_t());
  if (r != 0) throw std::logic_error("witt_number: divisibility failed");
  return q;
}

inline Int binomial_int(Int n, int r) {
  if (r < 0) return 0;
  Int acc = 1;
  for (int j = 0; j < r; ++j) {
    acc *= (n - j);
    Int q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), acc.get_mpz_t(),
                Int(j + 1).get_mpz_t());
    acc = q;
  }
  return acc;
}

// Coefficients [q^0 .. q^N] of prod_{i=2..N} (1 - q^i)^{-l_i}.
inline std::vector<Int> gr_rank_series(int k, int N) {
  std::vector<Int> c(static_cast<std::size_t>(N) + 1, Int(0));
  c[0] = 1;
  for (int i = 2; i <= N; ++i) {
    const Int li = witt_number(i, k);
    // Multiply by (1 - q^i)^{-l_i} = sum_j C(l_i + j - 1, j) q^{i j}.
    std::vector<Int> next(c.size(), Int(0));
    for (int n = 0; n <= N; ++n) {
      if (c[n] == 0) continue;
      for (int j = 0; n + i * j <= N; ++j) {
        next[n + i * j] += c[n] * binomial_int(li + j - 1, j);
      }
    }
    c = std::move(next);
  }
  return c;
}

// Rank of gr_n as a free module over the abelianization.
inline Int gr_rank(int n, int k) {
  if (n < 0) throw std::invalid_argument("gr_rank: n must be >= 0");
  if (n == 0) return 1;
  if (n == 1) return 0;
  return gr_rank_series(k, n)[static_cast<std::size_t>(n)];
}

// ---------------------------------------------------------------------------
// Sparse rows over word spaces
// ---------------------------------------------------------------------------

inline Word word_of_index(long idx, int degree, int k) {
  Word w(static_cast<std::size_t>(degree));
  for (int pos = degree - 1; pos >= 0; --pos) {
    w[static_cast<std::size_t>(pos)] = static_cast<uint8_t>(idx % k);
    idx /= k;
  }
  return w;
}

// The degree-`degree` component of p as a sparse coordinate row.
template <class S>
inline SparseRowT<S> sparse_of_poly_component(const NcPolyT<S>& p, int degree,
                                              int k) {
  SparseRowT<S> row;
  for (const auto& [w, c] : p.terms()) {
    if (static_cast<int>(w.size()) != degree) continue;
    row.emplace_back(static_cast<int>(word_index(w, k)), c);
  }
  return row; // DegLexLess on fixed degree is index order, so already sorted
}

template <class S>
inline NcPolyT<S> poly_of_sparse_row(const SparseRowT<S>& row, int degree,
                                     int k) {
  NcPolyT<S> p;
  for (const auto& [idx, c] : row) p.add_term(word_of_index(idx, degree, k), c);
  return p;
}

// ---------------------------------------------------------------------------
// Memoized cell engine
// ---------------------------------------------------------------------------

template <class S>
class FiltrationEngineT {
public:
  static FiltrationEngineT& instance() {
    static FiltrationEngineT engine;
    return engine;
  }

  // Degree-e piece of the weight-i Lie span, i >= 2.
  const SparseSubspaceT<S>& lie_cell(int i, int e, int k) {
    std::lock_guard<std::mutex> lock(mu_);
    return lie_cell_locked(i, e, k);
  }

  // Degree-e piece of I_n for n >= 1 (n <= 1 maps to max(n, 2) following the
  // I_1 = I_2 convention; n <= 0 is the caller's "full space" case).
  const SparseSubspaceT<S>& ideal_cell(int n, int e, int k) {
    std::lock_guard<std::mutex> lock(mu_);
    return ideal_cell_locked(n, e, k);
  }

private:
  FiltrationEngineT() = default;

  const SparseSubspaceT<S>& lie_cell_locked(int i, int e, int k) {
    const auto key = std::make_tuple(i, e, k);
    auto it = lie_.find(key);
    if (it != lie_.end()) return it->second;

    SparseSubspaceT<S> cell(words_count(e, k));
    if (e >= i) {
      if (i == 2) {
        for (int a = 1; a <= e - 1; ++a) {
          const int b = e - a;
          const long na = words_count(a, k), nb = words_count(b, k);
          for (long wa = 0; wa < na; ++wa) {
            for (long wb = 0; wb < nb; ++wb) {
              // [w_a, w_b] = w_a w_b - w_b w_a
              SparseRowT<S> row;
              const int i1 = static_cast<int>(wa * nb + wb);
              const int i2 = static_cast<int>(wb * na + wa);
              if (i1 == i2) continue;
              if (i1 < i2) {
                row.emplace_back(i1, S(1));
                row.emplace_back(i2, S(-1));
              } else {
                row.emplace_back(i2, S(-1));
                row.emplace_back(i1, S(1));
              }
              cell.insert(std::move(row));
            }
          }
        }
      } else {
        for (int a = 1; a <= e - (i - 1); ++a) {
          const SparseSubspaceT<S>& inner = lie_cell_locked(i - 1, e - a, k);
          const long na = words_count(a, k);
          const long nin = words_count(e - a, k);
          for (long w = 0; w < na; ++w) {
            for (const SparseRowT<S>& v : inner.rows()) {
              cell.insert(bracket_word_row(w, a, v, nin, k));
            }
          }
        }
      }
    }
    cell.canonicalize();
    return lie_.emplace(key, std::move(cell)).first->second;
  }

  const SparseSubspaceT<S>& ideal_cell_locked(int n, int e, int k) {
    if (n <= 1) n = 2; // I_1 = I_2 convention; n <= 0 handled by callers
    const auto key = std::make_tuple(n, e, k);
    auto it = ideal_.find(key);
    if (it != ideal_.end()) return it->second;

    SparseSubspaceT<S> cell(words_count(e, k));
    if (e >= n && e >= 2) {
      // Prefix rows: x_g * I_n^[e-1].
      {
        // A copy of the row list keeps the recursive call from invalidating
        // references while we insert.
        const std::vector<SparseRowT<S>> prev =
            ideal_cell_locked(n, e - 1, k).rows();
        const long tail = words_count(e - 1, k);
        for (int g = 0; g < k; ++g) {
          for (const SparseRowT<S>& v : prev) {
            SparseRowT<S> row;
            row.reserve(v.size());
            for (const auto& [j, c] : v)
              row.emplace_back(static_cast<int>(g * tail + j), c);
            cell.insert(std::move(row));
          }
        }
      }
      // Product rows: L_i^[eL] * T_{n-i}^[e-eL].
      for (int i = 2; i <= e; ++i) {
        for (int eL = i; eL <= e; ++eL) {
          const int et = e - eL;
          const std::vector<SparseRowT<S>> lrows =
              lie_cell_locked(i, eL, k).rows();
          const long nt = words_count(et, k);
          if (n - i <= 0) {
            // Trailing factor ranges over the full word space.
            for (const SparseRowT<S>& u : lrows) {
              for (long t = 0; t < nt; ++t) {
                SparseRowT<S> row;
                row.reserve(u.size());
                for (const auto& [j, c] : u)
                  row.emplace_back(static_cast<int>(j * nt + t), c);
                cell.insert(std::move(row));
              }
            }
          } else {
            if (et < n - i) continue; // trailing ideal cell is empty there
            const std::vector<SparseRowT<S>> trows =
                ideal_cell_locked(n - i, et, k).rows();
            for (const SparseRowT<S>& u : lrows) {
              for (const SparseRowT<S>& t : trows) {
                cell.insert(row_product(u, t, nt));
              }
            }
          }
        }
      }
    }
    cell.canonicalize();
    return ideal_.emplace(key, std::move(cell)).first->second;
  }

  static SparseRowT<S> row_product(const SparseRowT<S>& u,
                                   const SparseRowT<S>& t, long tail_count) {
    SparseRowT<S> row;
    row.reserve(u.size() * t.size());
    for (const auto& [ju, cu] : u) {
      for (const auto& [jt, ct] : t) {
        row.emplace_back(static_cast<int>(ju * tail_count + jt), cu * ct);
      }
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return row;
  }

  // [w, v] for a word w of degree a and a sparse row v of degree e - a.
  static SparseRowT<S> bracket_word_row(long w, int a, const SparseRowT<S>& v,
                                        long v_count, int k) {
    const long a_count = words_count(a, k);
    SparseRowT<S> row;
    row.reserve(2 * v.size());
    for (const auto& [j, c] : v) {
      row.emplace_back(static_cast<int>(w * v_count + j), c);
      row.emplace_back(static_cast<int>(j * a_count + w), -c);
    }
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    // Merge duplicate indices (the two shifts can collide).
    SparseRowT<S> out;
    for (auto& [idx, c] : row) {
      if (!out.empty() && out.back().first == idx) {
        out.back().second += c;
        if (is_zero(out.back().second)) out.pop_back();
      } else {
        out.emplace_back(idx, std::move(c));
      }
    }
    return out;
  }

  std::mutex mu_;
  std::map<std::tuple<int, int, int>, SparseSubspaceT<S>> lie_;
  std::map<std::tuple<int, int, int>, SparseSubspaceT<S>> ideal_;
};

using FiltrationEngine = FiltrationEngineT<Rat>;

// ---------------------------------------------------------------------------
// Public cell queries (rational field)
// ---------------------------------------------------------------------------

inline long ideal_cell_dim(int n, int e, int k) {
  if (n <= 0) return words_count(e, k);
  return FiltrationEngine::instance().ideal_cell(n, e, k).dim();
}

inline long lie_cell_dim(int i, int e, int k) {
  return FiltrationEngine::instance().lie_cell(i, e, k).dim();
}

// Does the degree-e graded component `row` lie in I_n^[e]?
inline bool ideal_cell_contains(int n, int e, int k, const SparseRow& row) {
  if (n <= 0) return true;
  return FiltrationEngine::instance().ideal_cell(n, e, k).contains(row);
}

// Is p in I_n + (words of degree > m_cap)? Checks every graded component of
// degree <= m_cap separately; the filtration ideal is graded, so this is
// exact membership in the truncated quotient.
inline bool filtration_contains(int n, int m_cap, int k, const NcPoly& p) {
  if (n <= 0) return true;
  for (int e = 0; e <= m_cap; ++e) {
    SparseRow row = sparse_of_poly_component(p, e, k);
    if (row.empty()) continue;
    if (!ideal_cell_contains(n, e, k, row)) return false;
  }
  return true;
}

// Reduce the degree-e component to its canonical residue modulo I_n^[e].
inline SparseRow ideal_cell_reduce(int n, int e, int k, SparseRow row) {
  if (n <= 0) return {};
  return FiltrationEngine::instance().ideal_cell(n, e, k).reduce(std::move(row));
}

// ---------------------------------------------------------------------------
// filtration_basis: explicit graded bases of I_n in degrees <= m
// ---------------------------------------------------------------------------

struct FiltrationBasis {
  int n = 0, m = 0, k = 0;
  // by_degree[e] is a canonical (reduced-echelon) basis of I_n^[e], e = 0..m.
  std::vector<std::vector<NcPoly>> by_degree;
  long dim = 0;       // dim I_n^[m], the top-degree block
  long total_dim = 0; // sum over e <= m, i.e. dim of I_n inside R / m^{m+1}
};

inline FiltrationBasis filtration_basis(int n, int m, int k) {
  if (m < 0 || k < 1) throw std::invalid_argument("filtration_basis: bad m/k");
  FiltrationBasis out;
  out.n = n;
  out.m = m;
  out.k = k;
  out.by_degree.resize(static_cast<std::size_t>(m) + 1);
  auto& eng = FiltrationEngine::instance();
  for (int e = 0; e <= m; ++e) {
    std::vector<NcPoly> block;
    if (n <= 0) {
      const long cnt = words_count(e, k);
      for (long j = 0; j < cnt; ++j)
        block.push_back(NcPoly::monomial(word_of_index(j, e, k), Rat(1)));
    } else {
      for (const SparseRow& row : eng.ideal_cell(n, e, k).rows())
        block.push_back(poly_of_sparse_row(row, e, k));
    }
    out.total_dim += static_cast<long>(block.size());
    if (e == m) out.dim = static_cast<long>(block.size());
    out.by_degree[static_cast<std::size_t>(e)] = std::move(block);
  }
  return out;
}

} // namespace nctk

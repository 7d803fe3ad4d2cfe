// Finite groups by multiplication table, homomorphisms, and central /
// abelian-kernel extensions 1 -> A -> G' -> G -> 1 presented by an explicit
// surjection of tables.  Elements are indices; the identity is element 0.
#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nctk {

struct FinGroup {
  int n = 1;
  std::vector<int> table; // n*n, table[a*n+b] = a*b
  std::vector<int> inv_;

  int mul(int a, int b) const { return table[static_cast<std::size_t>(a * n + b)]; }
  int inv(int a) const { return inv_[static_cast<std::size_t>(a)]; }
  int id() const { return 0; }
  int conj(int g, int a) const { return mul(mul(g, a), inv(g)); }

  bool abelian() const {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b)
        if (mul(a, b) != mul(b, a)) return false;
    return true;
  }

  void validate() const {
    if (n < 1 || static_cast<int>(table.size()) != n * n)
      throw std::invalid_argument("group: bad table size");
    for (int v : table)
      if (v < 0 || v >= n) throw std::invalid_argument("group: entry range");
    for (int a = 0; a < n; ++a)
      if (mul(0, a) != a || mul(a, 0) != a)
        throw std::invalid_argument("group: element 0 is not an identity");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (mul(mul(a, b), c) != mul(a, mul(b, c)))
            throw std::invalid_argument("group: not associative");
    for (int a = 0; a < n; ++a) {
      if (mul(a, inv(a)) != 0 || mul(inv(a), a) != 0)
        throw std::invalid_argument("group: bad inverse");
    }
  }

  static FinGroup from_table(int n, std::vector<int> table) {
    FinGroup G;
    G.n = n;
    G.table = std::move(table);
    G.inv_.assign(static_cast<std::size_t>(n), -1);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (G.table[static_cast<std::size_t>(a * n + b)] == 0) G.inv_[static_cast<std::size_t>(a)] = b;
    G.validate();
    return G;
  }

  static FinGroup trivial() { return from_table(1, {0}); }

  static FinGroup cyclic(int m) {
    if (m < 1) throw std::invalid_argument("cyclic: m >= 1");
    std::vector<int> t(static_cast<std::size_t>(m * m));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) t[static_cast<std::size_t>(a * m + b)] = (a + b) % m;
    return from_table(m, std::move(t));
  }

  static FinGroup product(const FinGroup& A, const FinGroup& B) {
    const int n = A.n * B.n;
    std::vector<int> t(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    auto enc = [&](int a, int b) { return a * B.n + b; };
    for (int a1 = 0; a1 < A.n; ++a1)
      for (int b1 = 0; b1 < B.n; ++b1)
        for (int a2 = 0; a2 < A.n; ++a2)
          for (int b2 = 0; b2 < B.n; ++b2)
            t[static_cast<std::size_t>(enc(a1, b1) * n + enc(a2, b2))] =
                enc(A.mul(a1, a2), B.mul(b1, b2));
    return from_table(n, std::move(t));
  }

  // dihedral group of order 2m: element eps*m + k is rotation k, flip eps
  static FinGroup dihedral(int m) {
    if (m < 1) throw std::invalid_argument("dihedral: m >= 1");
    const int n = 2 * m;
    auto enc = [&](int k, int e) { return e * m + ((k % m + m) % m); };
    std::vector<int> t(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int k = 0; k < m; ++k)
      for (int e = 0; e < 2; ++e)
        for (int k2 = 0; k2 < m; ++k2)
          for (int e2 = 0; e2 < 2; ++e2)
            t[static_cast<std::size_t>(enc(k, e) * n + enc(k2, e2))] =
                enc(e ? k - k2 : k + k2, e ^ e2);
    return from_table(n, std::move(t));
  }

  // quaternion group {±1, ±i, ±j, ±k}; element 2*axis + sign
  static FinGroup quaternion8() {
    static const int ax[4][4] = {
        {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const int sg[4][4] = {
        {0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
    std::vector<int> t(64);
    for (int a = 0; a < 4; ++a)
      for (int s = 0; s < 2; ++s)
        for (int b = 0; b < 4; ++b)
          for (int u = 0; u < 2; ++u)
            t[static_cast<std::size_t>((2 * a + s) * 8 + (2 * b + u))] =
                2 * ax[a][b] + (s ^ u ^ sg[a][b]);
    return from_table(8, std::move(t));
  }

  // symmetric group on m letters (m <= 4 in practice), permutations ranked
  // lexicographically with the identity ranked 0
  static FinGroup symmetric(int m) {
    std::vector<std::vector<int>> perms;
    std::vector<int> p(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) p[static_cast<std::size_t>(i)] = i;
    do
      perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    const int n = static_cast<int>(perms.size());
    auto rank = [&](const std::vector<int>& q) {
      return static_cast<int>(std::lower_bound(perms.begin(), perms.end(), q) -
                              perms.begin());
    };
    std::vector<int> t(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::vector<int> c(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
          c[static_cast<std::size_t>(i)] = perms[static_cast<std::size_t>(a)][static_cast<std::size_t>(
              perms[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)])];
        t[static_cast<std::size_t>(a * n + b)] = rank(c);
      }
    return from_table(n, std::move(t));
  }
};

// map src -> dst given by images of every element; checked multiplicative
struct GroupHom {
  std::vector<int> map;

  int operator()(int a) const { return map[static_cast<std::size_t>(a)]; }

  static GroupHom checked(const FinGroup& src, const FinGroup& dst,
                          std::vector<int> images) {
    if (static_cast<int>(images.size()) != src.n)
      throw std::invalid_argument("hom: wrong size");
    for (int v : images)
      if (v < 0 || v >= dst.n) throw std::invalid_argument("hom: range");
    for (int a = 0; a < src.n; ++a)
      for (int b = 0; b < src.n; ++b)
        if (images[static_cast<std::size_t>(src.mul(a, b))] !=
            dst.mul(images[static_cast<std::size_t>(a)], images[static_cast<std::size_t>(b)]))
          throw std::invalid_argument("hom: not multiplicative");
    GroupHom h;
    h.map = std::move(images);
    return h;
  }
};

// 1 -> A -> G' -> G -> 1 with A abelian; A is realised as ker(p) inside G'
// and carries the conjugation action of G (well defined because A is abelian).
struct FinExtension {
  FinGroup Gp; // total group G'
  FinGroup G;
  GroupHom p;               // surjection G' -> G
  std::vector<int> kernel;  // elements of G' mapping to id, kernel[0] = 0
  std::vector<int> kidx;    // G'-element -> kernel index, or -1
  FinGroup A;               // abstract kernel group on kernel indices
  std::vector<std::vector<int>> ad; // ad[g in G][a in A] kernel-index action

  int lift(int g) const { // least preimage, deterministic
    for (int x = 0; x < Gp.n; ++x)
      if (p(x) == g) return x;
    throw std::logic_error("extension: missing preimage");
  }
  std::vector<int> fiber(int g) const {
    std::vector<int> out;
    for (int x = 0; x < Gp.n; ++x)
      if (p(x) == g) out.push_back(x);
    return out;
  }
  // A written additively in reports; internally group ops on kernel indices
  int a_mul(int a, int b) const { return A.mul(a, b); }
  int a_inv(int a) const { return A.inv(a); }
  int ad_of(int g, int a) const { return ad[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)]; }

  static FinExtension make(FinGroup Gp, FinGroup G, std::vector<int> proj) {
    FinExtension E;
    E.Gp = std::move(Gp);
    E.G = std::move(G);
    E.p = GroupHom::checked(E.Gp, E.G, std::move(proj));
    std::vector<char> hit(static_cast<std::size_t>(E.G.n), 0);
    for (int x = 0; x < E.Gp.n; ++x) hit[static_cast<std::size_t>(E.p(x))] = 1;
    for (char h : hit)
      if (!h) throw std::invalid_argument("extension: p not surjective");
    E.kidx.assign(static_cast<std::size_t>(E.Gp.n), -1);
    for (int x = 0; x < E.Gp.n; ++x)
      if (E.p(x) == 0) {
        E.kidx[static_cast<std::size_t>(x)] = static_cast<int>(E.kernel.size());
        E.kernel.push_back(x);
      }
    const int an = static_cast<int>(E.kernel.size());
    std::vector<int> at(static_cast<std::size_t>(an) * static_cast<std::size_t>(an));
    for (int a = 0; a < an; ++a)
      for (int b = 0; b < an; ++b) {
        int prod = E.Gp.mul(E.kernel[static_cast<std::size_t>(a)], E.kernel[static_cast<std::size_t>(b)]);
        at[static_cast<std::size_t>(a * an + b)] = E.kidx[static_cast<std::size_t>(prod)];
      }
    E.A = FinGroup::from_table(an, std::move(at));
    if (!E.A.abelian())
      throw std::invalid_argument("extension: kernel not abelian");
    // conjugation action of G on A: conj by any lift; check well-definedness
    E.ad.assign(static_cast<std::size_t>(E.G.n), std::vector<int>(static_cast<std::size_t>(an), -1));
    for (int g = 0; g < E.G.n; ++g) {
      bool first = true;
      for (int x = 0; x < E.Gp.n; ++x) {
        if (E.p(x) != g) continue;
        for (int a = 0; a < an; ++a) {
          int c = E.kidx[static_cast<std::size_t>(E.Gp.conj(x, E.kernel[static_cast<std::size_t>(a)]))];
          if (c < 0) throw std::logic_error("extension: kernel not normal");
          if (first)
            E.ad[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)] = c;
          else if (E.ad[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)] != c)
            throw std::invalid_argument(
                "extension: conjugation action depends on the lift");
        }
        first = false;
      }
    }
    return E;
  }

  // the reduction Z/(2m) -> Z/m style family: Z/4 -> Z/2 etc.
  static FinExtension cyclic_mod(int big, int small) {
    if (big % small != 0) throw std::invalid_argument("cyclic_mod: small | big");
    std::vector<int> proj(static_cast<std::size_t>(big));
    for (int x = 0; x < big; ++x) proj[static_cast<std::size_t>(x)] = x % small;
    return make(FinGroup::cyclic(big), FinGroup::cyclic(small), std::move(proj));
  }
};

} // namespace nctk

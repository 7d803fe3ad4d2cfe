#pragma once
// Worked pair-data instances for the hypercohomology layer.
//
//   dual_numbers_pair(N, p)  units of F_p[t]/t^2 acting on the rank-1 free
//                            module, over the units of F_p; the induced
//                            d_e : A0 -> A1 is multiplication by e, so it is
//                            zero at e = 0 and an isomorphism at e = 1
//   point_pair_over(N, X)    E' = E = point over an extension sheaf X; the
//                            hyper theory collapses onto the plain one
//   mobius_torsor_pair(N)    trivial groups, a 2-element torsor under A1=Z/2
//                            glued with one flip; the obstruction class is
//                            2-torsion and nothing upstairs exists at all
//   kronecker_f3()           two charts, G = units x units over F_3 acting on
//                            the nine pairs (a, b) of 1x1 matrices
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nctk/cech_catalogue.hpp"
#include "nctk/hyper.hpp"

namespace nctk {

// multiplicative group of F_p, indexed u-1 so that the identity is 0
inline FinGroup units_mod(int p) {
  const int n = p - 1;
  if (n < 1) throw std::invalid_argument("units_mod: p >= 2");
  std::vector<int> t(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      t[static_cast<std::size_t>(a * n + b)] = ((a + 1) * (b + 1)) % p - 1;
  return FinGroup::from_table(n, std::move(t));
}

// units of F_p[t]/t^2: u + c t with u != 0; index (u, c) -> (u-1) p + c
inline FinGroup dual_units(int p) {
  const int n = p * (p - 1);
  auto enc = [&](int u, int c) { return (u - 1) * p + c; };
  std::vector<int> t(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int u = 1; u < p; ++u)
    for (int c = 0; c < p; ++c)
      for (int v = 1; v < p; ++v)
        for (int d = 0; d < p; ++d)
          t[static_cast<std::size_t>(enc(u, c) * n + enc(v, d))] =
              enc((u * v) % p, (u * d + c * v) % p);
  return FinGroup::from_table(n, std::move(t));
}

inline HyperPair dual_numbers_pair(const Nerve& N, int p) {
  const FinGroup Gp = dual_units(p);
  const FinGroup G = units_mod(p);
  std::vector<int> proj(static_cast<std::size_t>(Gp.n));
  for (int u = 1; u < p; ++u)
    for (int c = 0; c < p; ++c)
      proj[static_cast<std::size_t>((u - 1) * p + c)] = u - 1;
  HyperPair HP;
  HP.X = ExtensionSheaf::constant(N, FinExtension::make(Gp, G, std::move(proj)));
  // E' = F_p[t]/t^2 as a set, (x, y) -> x p + y, (u + c t)(x + y t)
  std::vector<std::vector<int>> actp(
      static_cast<std::size_t>(Gp.n),
      std::vector<int>(static_cast<std::size_t>(p * p)));
  for (int u = 1; u < p; ++u)
    for (int c = 0; c < p; ++c)
      for (int x = 0; x < p; ++x)
        for (int y = 0; y < p; ++y)
          actp[static_cast<std::size_t>((u - 1) * p + c)]
              [static_cast<std::size_t>(x * p + y)] =
                  ((u * x) % p) * p + (u * y + c * x) % p;
  HP.Ep = SetSheaf::constant(N, p * p, Gp, actp);
  // E = F_p with the scalar action of the units
  std::vector<std::vector<int>> actq(static_cast<std::size_t>(G.n),
                                     std::vector<int>(static_cast<std::size_t>(p)));
  for (int u = 1; u < p; ++u)
    for (int x = 0; x < p; ++x)
      actq[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(x)] =
          (u * x) % p;
  HP.E = SetSheaf::constant(N, p, G, actq);
  // A1 = Z/p translating the t-coordinate; units act by scaling
  const FinGroup A1 = FinGroup::cyclic(p);
  std::vector<int> aid(static_cast<std::size_t>(p));
  for (int a = 0; a < p; ++a) aid[static_cast<std::size_t>(a)] = a;
  std::vector<std::vector<int>> tr(static_cast<std::size_t>(p),
                                   std::vector<int>(static_cast<std::size_t>(p * p)));
  for (int a = 0; a < p; ++a)
    for (int x = 0; x < p; ++x)
      for (int y = 0; y < p; ++y)
        tr[static_cast<std::size_t>(a)][static_cast<std::size_t>(x * p + y)] =
            x * p + (y + a) % p;
  std::vector<std::vector<int>> md(static_cast<std::size_t>(G.n),
                                   std::vector<int>(static_cast<std::size_t>(p)));
  for (int u = 1; u < p; ++u)
    for (int a = 0; a < p; ++a)
      md[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(a)] =
          (u * a) % p;
  std::vector<int> pr(static_cast<std::size_t>(p * p));
  for (int x = 0; x < p; ++x)
    for (int y = 0; y < p; ++y) pr[static_cast<std::size_t>(x * p + y)] = x;
  for (const auto& s : N.simplices) {
    HP.A1[s] = A1;
    HP.act1[s] = tr;
    HP.mod1[s] = md;
    HP.proj[s] = pr;
    for (const auto& t : N.simplices)
      if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
        HP.resA1[{s, t}] = aid;
  }
  return HP;
}

// the constant base cocycle (g = 1, e_i = e) of a dual-numbers pair
inline HyperCocycle1 dual_numbers_base(const Nerve& N, int e) {
  const PairIndexer P = PairIndexer::of(N);
  HyperCocycle1 c;
  c.g.val.assign(static_cast<std::size_t>(P.size()), 0);
  c.e.assign(static_cast<std::size_t>(N.charts), e);
  return c;
}

// E' = E = point, A1 trivial: the hyper layer over a plain extension sheaf
inline HyperPair point_pair_over(const Nerve& N, const ExtensionSheaf& X) {
  HyperPair HP;
  HP.X = X;
  HP.Ep = SetSheaf::point(N, X.total_sheaf(N));
  HP.E = SetSheaf::point(N, X.quot_sheaf(N));
  const FinGroup A1 = FinGroup::trivial();
  for (const auto& s : N.simplices) {
    HP.A1[s] = A1;
    HP.act1[s] = {{0}};
    HP.mod1[s].assign(static_cast<std::size_t>(X.at(s).G.n), {0});
    HP.proj[s] = {0};
    for (const auto& t : N.simplices)
      if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
        HP.resA1[{s, t}] = {0};
  }
  return HP;
}

// trivial groups; E' is a 2-element set glued with one flip, A1 = Z/2 acts
// simply transitively, E is a point.  The A1-part of the lifting obstruction
// is the mod-2 monodromy of the flip.
inline HyperPair mobius_torsor_pair(const Nerve& N) {
  HyperPair HP;
  HP.X = ExtensionSheaf::constant(N, ext_identity(FinGroup::trivial()));
  SetSheaf Ep;
  for (const auto& s : N.simplices) {
    Ep.card[s] = 2;
    Ep.act[s] = {{0, 1}};
    for (const auto& t : N.simplices) {
      if (s == t || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
        continue;
      if (s == Nerve::Simplex{1} && t == Nerve::Simplex{1, 2})
        Ep.res[{s, t}] = {1, 0}; // the flip
      else
        Ep.res[{s, t}] = {0, 1};
    }
  }
  HP.Ep = std::move(Ep);
  HP.E = SetSheaf::point(N, HP.X.quot_sheaf(N));
  const FinGroup A1 = FinGroup::cyclic(2);
  for (const auto& s : N.simplices) {
    HP.A1[s] = A1;
    HP.act1[s] = {{0, 1}, {1, 0}};
    HP.mod1[s] = {{0, 1}};
    HP.proj[s] = {0, 0};
    for (const auto& t : N.simplices)
      if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
        HP.resA1[{s, t}] = {0, 1};
  }
  return HP;
}

// a plain group-acting-on-set instance (no pair data): two charts, the group
// GL1 x GL1 over F_3 with entries (u1, u2) encoded as units_mod(3)^2, acting
// on the nine Kronecker pairs (a, b) of scalars by b -> u2 b u1^{-1}
struct HyperInstance {
  Nerve nerve;
  GroupSheaf S;
  SetSheaf E;
};

inline HyperInstance kronecker_f3() {
  HyperInstance I;
  I.nerve = Nerve::from_maximal(2, {{0, 1}});
  const FinGroup U = units_mod(3);
  const FinGroup G = FinGroup::product(U, U);
  I.S = GroupSheaf::constant(I.nerve, G);
  auto unit = [](int h) { return h == 0 ? 1 : 2; }; // index -> element of F_3
  std::vector<std::vector<int>> act(static_cast<std::size_t>(G.n),
                                    std::vector<int>(9));
  for (int h1 = 0; h1 < 2; ++h1)
    for (int h2 = 0; h2 < 2; ++h2)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          // u^{-1} = u in F_3^x, so conjugate-by-pair is the scalar u1 u2
          const int s = (unit(h1) * unit(h2)) % 3;
          act[static_cast<std::size_t>(h1 * 2 + h2)]
             [static_cast<std::size_t>(a * 3 + b)] =
                 ((s * a) % 3) * 3 + (s * b) % 3;
        }
  I.E = SetSheaf::constant(I.nerve, 9, G, act);
  return I;
}

} // namespace nctk
